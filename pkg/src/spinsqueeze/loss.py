"""Quantum-trajectory unravelling of one-axis twisting with one-body loss.

Both internal states lose atoms at the same rate Gamma per atom.  The
no-jump Hamiltonian is ``chi J_z^2 - i Gamma N / 2``: its anti-Hermitian part
is a multiple of the identity in each N-atom space, so jump times are
exponential with rate ``Gamma N`` independent of the state.  An ``a`` loss
maps ``|k>_N -> sqrt(k) |k-1>_(N-1)``, a ``b`` loss ``|k>_N -> sqrt(N-k) |k>_(N-1)``.

Starting from the +x coherent state the populations stay binomial(N', 1/2)
along every trajectory and the phase stays quadratic in k, so the
``"binomial"`` method tracks ``(N', a2, a1)`` with
``c_k ~ sqrt(C(N', k)) exp(-i (a2 k^2 + a1 k))`` at O(1) cost per jump.  The
``"amplitudes"`` method applies the maps to the full amplitude vector; both
consume the random stream identically.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import oat
from .errors import DegenerateFrameError, SamplingError
from .spin import DickeState, SpinMoments, coherent_state, moments, optimal_xi_squared

A_LOSS, B_LOSS = 0, 1


@dataclass(frozen=True)
class LossParams:
    """Times are in units of 1/chi_ref; ``chi`` is the twisting rate in that unit."""

    gamma_over_chi: float
    n_atoms_initial: int
    n_trajectories: int
    seed: int
    time_grid: np.ndarray
    chi: float = 1.0

    def __post_init__(self):
        grid = np.asarray(self.time_grid, dtype=float)
        if self.gamma_over_chi < 0:
            raise ValueError("gamma_over_chi must be >= 0")
        if self.n_atoms_initial < 1:
            raise ValueError("n_atoms_initial must be >= 1")
        if self.n_trajectories < 1:
            raise ValueError("n_trajectories must be >= 1")
        if np.any(grid < 0) or np.any(np.diff(grid) < 0):
            raise ValueError("time_grid must be nonnegative and sorted")
        object.__setattr__(self, "time_grid", grid)


@dataclass
class TrajectoryRecord:
    jump_times: np.ndarray
    jump_types: np.ndarray
    n_remaining: np.ndarray
    mean: np.ndarray  # (T, 3)
    second: np.ndarray  # (T, 3, 3) raw symmetrized second moments
    terminated_early: bool = False

    def moments_at(self, i: int) -> SpinMoments:
        return SpinMoments.from_raw(self.mean[i], self.second[i])


class _Amplitudes:
    def __init__(self, n):
        self.n = n
        self.c = coherent_state(n).amplitudes.copy()

    def twist(self, mu):
        m = np.arange(self.n + 1) - self.n / 2
        self.c *= np.exp(-1j * mu * m**2)

    def p_a(self):
        k = np.arange(self.n + 1)
        return float(np.abs(self.c) ** 2 @ k) / self.n

    def jump(self, kind):
        k = np.arange(self.n + 1)
        if kind == A_LOSS:
            c = np.sqrt(k[1:]) * self.c[1:]
        else:
            c = np.sqrt(self.n - k[:-1]) * self.c[:-1]
        self.n -= 1
        self.c = c / np.linalg.norm(c) if self.n > 0 else np.ones(1, complex)

    def state(self):
        return DickeState(self.n, self.c)


class _Binomial:
    def __init__(self, n):
        self.n = n
        self.a2 = 0.0
        self.a1 = 0.0

    def twist(self, mu):
        # mu (k - n/2)^2 = mu k^2 - mu n k + const
        self.a2 += mu
        self.a1 -= mu * self.n

    def p_a(self):
        return 0.5

    def jump(self, kind):
        if kind == A_LOSS:
            # re-index k -> k - 1
            self.a1 += 2 * self.a2
        self.n -= 1

    def state(self):
        n = self.n
        k = np.arange(n + 1)
        logc = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) - n * np.log(2))
        amps = np.exp(logc - 1j * np.mod(self.a2 * k**2 + self.a1 * k, 2 * np.pi))
        return DickeState.normalized(n, amps)


def trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), index]))


def run_trajectory(params: LossParams, seed_offset: int, method: str = "binomial") -> TrajectoryRecord:
    rng = trajectory_rng(params.seed, seed_offset)
    gamma = params.gamma_over_chi
    chi = params.chi
    state = {"binomial": _Binomial, "amplitudes": _Amplitudes}[method](params.n_atoms_initial)
    grid = params.time_grid
    n_t = len(grid)
    mean = np.zeros((n_t, 3))
    second = np.zeros((n_t, 3, 3))
    n_rem = np.zeros(n_t, dtype=np.int64)
    jump_times, jump_types = [], []

    def draw_wait():
        if gamma == 0 or state.n == 0:
            return np.inf
        return rng.exponential(1.0 / (gamma * state.n))

    t = 0.0
    next_jump = draw_wait()
    for i, tg in enumerate(grid):
        while next_jump <= tg:
            state.twist(chi * (next_jump - t))
            t = next_jump
            kind = A_LOSS if rng.random() < state.p_a() else B_LOSS
            state.jump(kind)
            jump_times.append(t)
            jump_types.append(kind)
            next_jump = t + draw_wait() if state.n > 0 else np.inf
        n_rem[i] = state.n
        if state.n == 0:
            continue  # vacuum: all spin moments vanish
        state.twist(chi * (tg - t))
        t = tg
        moms = moments(state.state())
        mean[i] = moms.mean
        second[i] = moms.second
    return TrajectoryRecord(
        np.array(jump_times),
        np.array(jump_types, dtype=np.int8),
        n_rem,
        mean,
        second,
        terminated_early=bool(n_rem[-1] == 0) if n_t else False,
    )


def _run_one(args):
    params, index, method = args
    return run_trajectory(params, index, method)


def run_ensemble(params: LossParams, method: str = "binomial", threads: int = 1) -> list[TrajectoryRecord]:
    """All trajectories, ordered by index regardless of scheduling."""
    jobs = [(params, i, method) for i in range(params.n_trajectories)]
    if threads == 1:
        return [_run_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=None if threads <= 0 else threads) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // 64)))


@dataclass
class EnsembleAverages:
    mean: np.ndarray  # (T, 3)
    second: np.ndarray  # (T, 3, 3)
    n_mean: np.ndarray  # (T,)
    records: list[TrajectoryRecord] = field(repr=False, default_factory=list)

    def moments_at(self, i: int) -> SpinMoments:
        return SpinMoments.from_raw(self.mean[i], self.second[i])


def average(records: list[TrajectoryRecord]) -> EnsembleAverages:
    mean = np.mean([r.mean for r in records], axis=0)
    second = np.mean([r.second for r in records], axis=0)
    n_mean = np.mean([r.n_remaining for r in records], axis=0)
    return EnsembleAverages(mean, second, n_mean, records)


def _xi2(mean, second, n_norm):
    try:
        return optimal_xi_squared(SpinMoments.from_raw(mean, second), n_norm).xi2
    except DegenerateFrameError:
        return np.nan


@dataclass
class LossCurve:
    chi_t: np.ndarray
    xi2_loss: np.ndarray
    xi2_stderr: np.ndarray
    xi2_lossless: np.ndarray
    mean_n: np.ndarray
    theta_loss: np.ndarray
    n_trajectories: int

    @property
    def lost_fraction(self) -> np.ndarray:
        return 1.0 - self.mean_n / self.mean_n[0] if self.chi_t[0] == 0 else None


def xi2_with_loss(
    params: LossParams,
    normalize_by: str = "mean",
    method: str = "binomial",
    threads: int = 1,
    n_groups: int = 50,
    check_sampling: bool = True,
) -> LossCurve:
    """Trajectory-averaged squeezing under loss and the lossless reference.

    Moments are averaged over trajectories before xi^2 is formed.  The N in
    xi^2 is the ensemble-mean remaining atom number (``normalize_by="mean"``)
    or the initial one (``"initial"``).  Standard errors come from a
    delete-one-group jackknife.
    """
    records = run_ensemble(params, method, threads)
    avg = average(records)
    n0 = params.n_atoms_initial
    grid = params.time_grid
    norm_n = avg.n_mean if normalize_by == "mean" else np.full(len(grid), float(n0))

    xi2 = np.full(len(grid), np.nan)
    theta = np.full(len(grid), np.nan)
    for i in range(len(grid)):
        if avg.n_mean[i] > 0:
            try:
                res = optimal_xi_squared(avg.moments_at(i), norm_n[i])
            except DegenerateFrameError:
                continue  # mean spin lost with the atoms
            xi2[i], theta[i] = res.xi2, res.theta_opt

    m = len(records)
    groups = np.array_split(np.arange(m), min(n_groups, m))
    stderr = np.zeros(len(grid))
    if len(groups) > 1:
        means = np.array([r.mean for r in records])
        seconds = np.array([r.second for r in records])
        ns = np.array([r.n_remaining for r in records], dtype=float)
        tot_m, tot_s, tot_n = means.sum(0), seconds.sum(0), ns.sum(0)
        g = len(groups)
        for i in range(len(grid)):
            if avg.n_mean[i] <= 0:
                continue
            vals = []
            for idx in groups:
                rest = m - len(idx)
                mm = (tot_m[i] - means[idx, i].sum(0)) / rest
                ss = (tot_s[i] - seconds[idx, i].sum(0)) / rest
                nn = (tot_n[i] - ns[idx, i].sum()) / rest if normalize_by == "mean" else n0
                vals.append(_xi2(mm, ss, nn))
            vals = np.array(vals)
            stderr[i] = np.sqrt((g - 1) / g * np.sum((vals - vals.mean()) ** 2))  # nan if any group degenerates

    lossless = oat.xi2_curve(oat.TwistingParams(params.chi, n0), grid) if params.chi != 0 else None
    xi2_lossless = (
        np.array([r.xi2 for r in lossless]) if lossless is not None else np.ones(len(grid))
    )
    curve = LossCurve(grid, xi2, stderr, xi2_lossless, avg.n_mean, theta, m)
    if check_sampling and np.isfinite(xi2).any():
        i = int(np.nanargmin(xi2))
        if not stderr[i] <= 0.1 * xi2[i]:
            raise SamplingError(
                f"xi^2 stderr {stderr[i]:.3g} exceeds 10% of minimum {xi2[i]:.3g}: "
                "increase n_trajectories"
            )
    return curve
