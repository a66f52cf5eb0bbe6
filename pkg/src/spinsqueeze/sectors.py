"""Fixed-N_a sector ensemble: per-sector coupled GPEs and spin moments.

Each sector k = N_a carries ``k`` atoms in mode phi_a(k) and ``N - k`` in
phi_b(k); the many-body state is ``sum_k c_k |k: phi_a(k), phi_b(k)>``.

Phase convention.  Modes evolve with their full GPE phase (no
chemical-potential rotation).  The product of mode phases counts the
interaction energy twice, so the sector amplitude picks up the variational
correction ``d(arg c_k)/dt = + E_int(k)``; with frozen modes this leaves the
exact sector energy ``E(k)`` as the only phase, as it must.  Overlaps are
``<bra|ket> = sum conj(bra) ket`` with the higher sector as the bra.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import stats
from scipy.special import gammaln

from . import oat
from .errors import GridError, StabilityError, WindowError
from .gpe import (
    LEAK_TOL,
    CondensateParams,
    RadialGrid,
    RadialField,
    ground_state,
    overlap_integral,
    sine_transform,
)
from .spin import SpinMoments, assemble_moments, optimal_xi_squared

WINDOW_SIGMAS = 8.0
COVERAGE_TOL = 1e-10
NORM_DRIFT_TOL = 1e-8  # per unit time


def sector_window(n_atoms: int, n_sigma: float = WINDOW_SIGMAS) -> tuple[int, int]:
    """Window symmetric about N/2 of half-width n_sigma * sqrt(N)/2, clamped to [0, N]."""
    half = int(np.ceil(n_sigma * np.sqrt(n_atoms) / 2))
    k_min = max(0, n_atoms // 2 - half)
    return k_min, n_atoms - k_min


def truncated_mass(n_atoms: int, k_min: int, k_max: int) -> float:
    dist = stats.binom(n_atoms, 0.5)
    return float(dist.cdf(k_min - 1) + dist.sf(k_max))


def binomial_amplitudes(n_atoms: int, k_min: int, k_max: int) -> np.ndarray:
    k = np.arange(k_min, k_max + 1)
    logp = gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1)
    c = np.exp(0.5 * (logp - logp.max()))
    return c / np.linalg.norm(c)


@dataclass(frozen=True)
class SectorEnsemble:
    """Sector amplitudes and modes; ``ua``/``ub`` hold u-representation rows per sector."""

    n_atoms: int
    k_min: int
    k_max: int
    amplitudes: np.ndarray
    ua: np.ndarray
    ub: np.ndarray
    grid: RadialGrid
    time: float = 0.0

    def __post_init__(self):
        size = self.k_max - self.k_min + 1
        if not (0 <= self.k_min <= self.k_max <= self.n_atoms):
            raise WindowError(f"bad sector window [{self.k_min}, {self.k_max}]")
        if self.amplitudes.shape != (size,):
            raise ValueError("one amplitude per sector required")
        shape = (size, self.grid.n_points)
        if self.ua.shape != shape or self.ub.shape != shape:
            raise ValueError(f"mode arrays must have shape {shape}")
        missing = truncated_mass(self.n_atoms, self.k_min, self.k_max)
        if missing > COVERAGE_TOL:
            raise WindowError(
                f"sector window misses binomial mass {missing:.2e} > {COVERAGE_TOL:.0e}"
            )

    @classmethod
    def after_pulse(cls, n_atoms: int, mode: RadialField, n_sigma: float = WINDOW_SIGMAS):
        """State right after the pi/2 pulse: binomial amplitudes, every mode = phi_0."""
        k_min, k_max = sector_window(n_atoms, n_sigma)
        amps = binomial_amplitudes(n_atoms, k_min, k_max).astype(complex)
        u = np.broadcast_to(mode.u, (k_max - k_min + 1, mode.grid.n_points))
        return cls(n_atoms, k_min, k_max, amps, u.copy(), u.copy(), mode.grid)

    @property
    def k(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    @property
    def size(self) -> int:
        return self.k_max - self.k_min + 1

    @property
    def truncation(self) -> float:
        return truncated_mass(self.n_atoms, self.k_min, self.k_max)

    def mode(self, k: int, species: str) -> RadialField:
        rows = self.ua if species == "a" else self.ub
        return RadialField.from_u(self.grid, rows[k - self.k_min])

    def norms(self) -> np.ndarray:
        return np.stack(
            [np.sum(np.abs(self.ua) ** 2, axis=1), np.sum(np.abs(self.ub) ** 2, axis=1)]
        )

    def leak(self) -> float:
        f = self.grid.density_factor[-1]
        return float(max(np.abs(self.ua[:, -1]).max(), np.abs(self.ub[:, -1]).max()) ** 2 * f)

    def mean_r2(self) -> float:
        """Atom-averaged <r^2> of the whole cloud."""
        r2 = self.grid.r**2
        wa = np.abs(self.ua) ** 2 @ r2
        wb = np.abs(self.ub) ** 2 @ r2
        p = np.abs(self.amplitudes) ** 2
        k = self.k
        return float(np.sum(p * (k * wa + (self.n_atoms - k) * wb)) / self.n_atoms)


    def width_split(self) -> float:
        """Population-weighted |<r^2>_a(k) - <r^2>_b(k)| relative to the cloud <r^2>.

        Zero right after the pulse; it returns to (near) zero whenever the two
        components of each sector reach the same, i.e. the initial, relative
        width, which is when the mode overlaps revive.
        """
        r2 = self.grid.r**2
        wa = (np.abs(self.ua) ** 2 @ r2) / np.sum(np.abs(self.ua) ** 2, axis=1)
        wb = (np.abs(self.ub) ** 2 @ r2) / np.sum(np.abs(self.ub) ** 2, axis=1)
        p = np.abs(self.amplitudes) ** 2
        return float(p @ np.abs(wa - wb) / p.sum() / self.mean_r2())


def _couplings(params: CondensateParams, k: np.ndarray):
    n = params.n_atoms
    na, nb = k, n - k
    return (
        params.g_aa * (na - 1),  # a-a on a
        params.g_ab * nb,  # a-b on a
        params.g_bb * (nb - 1),  # b-b on b
        params.g_ab * na,  # a-b on b
    )


def interaction_energy(ens: SectorEnsemble, params: CondensateParams) -> np.ndarray:
    """E_int(k) = g_aa k(k-1)/2 I_aa + g_bb N_b(N_b-1)/2 I_bb + g_ab k N_b I_ab."""
    f = ens.grid.density_factor
    da = np.abs(ens.ua) ** 2
    db = np.abs(ens.ub) ** 2
    return _interaction(da, db, f, params, ens.k)


def _interaction(da, db, f, params, k):
    na = k.astype(float)
    nb = params.n_atoms - na
    i_aa = (da**2) @ f
    i_bb = (db**2) @ f
    i_ab = (da * db) @ f
    return (
        0.5 * params.g_aa * na * (na - 1) * i_aa
        + 0.5 * params.g_bb * nb * (nb - 1) * i_bb
        + params.g_ab * na * nb * i_ab
    )


def sector_energy(ens: SectorEnsemble, params: CondensateParams) -> np.ndarray:
    """Hartree-Fock energy of each sector."""
    grid = ens.grid
    single = []
    for rows in (ens.ua, ens.ub):
        uk = sine_transform(rows)
        single.append(np.abs(uk) ** 2 @ grid.kinetic + np.abs(rows) ** 2 @ grid.potential)
    k = ens.k.astype(float)
    return k * single[0] + (params.n_atoms - k) * single[1] + interaction_energy(ens, params)


def evolve_sectors(
    ens: SectorEnsemble,
    params: CondensateParams,
    t_final: float,
    dt: float = 0.005,
    observe=None,
    observe_every: int = 1,
    workers=None,
) -> SectorEnsemble:
    """Advance every sector by Strang splitting (potential/2, kinetic, potential/2).

    The kinetic step is exact in the sine basis; the potential-plus-mean-field
    step is exact pointwise because it leaves densities unchanged, so
    consecutive half steps are fused.  ``observe(ensemble)`` is called at
    t = 0 and after every ``observe_every`` steps.
    """
    if params.n_atoms != ens.n_atoms:
        raise ValueError("ensemble and params disagree on n_atoms")
    n_steps = int(round(t_final / dt))
    if n_steps < 0 or abs(n_steps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be a nonnegative multiple of dt")
    grid = ens.grid
    k = ens.k
    size = ens.size
    g_a_self, g_a_cross, g_b_self, g_b_cross = (c[:, None] for c in _couplings(params, k))
    v = grid.potential[None, :]
    f = grid.density_factor[None, :]
    kin_phase = np.exp(-1j * grid.kinetic * dt)
    u = np.concatenate([ens.ua, ens.ub]).astype(complex)
    amps = ens.amplitudes.astype(complex).copy()
    norm0 = np.sum(np.abs(u) ** 2, axis=1)
    t0 = ens.time

    def potential_step(u, amps, tau):
        dens = np.abs(u) ** 2 * f
        da, db = dens[:size], dens[size:]
        va = v + g_a_self * da + g_a_cross * db
        vb = v + g_b_self * db + g_b_cross * da
        u[:size] *= np.exp(-1j * tau * va)
        u[size:] *= np.exp(-1j * tau * vb)
        e_int = _interaction(
            np.abs(u[:size]) ** 2, np.abs(u[size:]) ** 2, grid.density_factor, params, k
        )
        amps *= np.exp(1j * tau * e_int)

    def snapshot(u, amps, t):
        return SectorEnsemble(
            ens.n_atoms, ens.k_min, ens.k_max, amps.copy(), u[:size].copy(), u[size:].copy(), grid, t
        )

    def check(u, t):
        drift = np.abs(np.sum(np.abs(u) ** 2, axis=1) - norm0).max()
        if drift > NORM_DRIFT_TOL * max(1.0, t - t0):
            raise StabilityError(f"norm drift {drift:.2e} at t = {t:.4f}")
        leak = (np.abs(u[:, -1]).max() ** 2) * grid.density_factor[-1]
        if leak >= LEAK_TOL:
            raise GridError(f"|phi(r_max)|^2 = {leak:.2e} at t = {t:.4f}")

    if observe is not None:
        observe(snapshot(u, amps, t0))
    pending_half = True
    for step in range(1, n_steps + 1):
        if pending_half:
            potential_step(u, amps, 0.5 * dt)
        u = sine_transform(kin_phase * sine_transform(u, workers), workers)
        boundary = step == n_steps or (observe is not None and step % observe_every == 0)
        if boundary:
            potential_step(u, amps, 0.5 * dt)
            t = t0 + step * dt
            check(u, t)
            if observe is not None and step % observe_every == 0:
                observe(snapshot(u, amps, t))
            pending_half = True
        else:
            potential_step(u, amps, dt)
            pending_half = False
    return snapshot(u, amps, t0 + n_steps * dt)


def frozen_mode_ensemble(ens: SectorEnsemble, params: CondensateParams, t: float) -> SectorEnsemble:
    """Modes pinned to their current shape; sectors only acquire exp(-i E(k) t)."""
    phase = np.exp(-1j * sector_energy(ens, params) * t)
    return replace(ens, amplitudes=ens.amplitudes * phase, time=ens.time + t)


def _power(z, n):
    # integer powers of overlaps close to 1; exact for any branch of log
    with np.errstate(divide="ignore"):
        return np.exp(n * np.log(z))


def ensemble_moments(ens: SectorEnsemble) -> SpinMoments:
    """Spin moments of the sector ensemble with Hartree-Fock overlap factors.

    ``<k+1|J_+|k> = sqrt((k+1)(N-k)) <a'|b> <a'|a>^k <b'|b>^(N-k-1)`` with primes
    on the k+1 modes, and analogously for J_+^2 and the diagonal J_+J_- terms.
    """
    if ens.truncation > 1e-8:
        raise WindowError(f"window truncation {ens.truncation:.2e} > 1e-8")
    n = ens.n_atoms
    c = ens.amplitudes
    k = ens.k.astype(float)
    m = k - n / 2
    p = np.abs(c) ** 2
    p_sum = p.sum()
    c = c / np.sqrt(p_sum)
    p = p / p_sum
    ua, ub = ens.ua, ens.ub

    def ov(bra, ket):
        return np.sum(np.conj(bra) * ket, axis=1)

    k1 = k[:-1]
    amp1 = damping_factors(ens, 1)
    a1 = np.sqrt((k1 + 1) * (n - k1))
    coh1 = np.conj(c[1:]) * c[:-1] * a1 * amp1
    jp = coh1.sum()
    jpz = (coh1 * (m[:-1] + 0.5)).sum()
    if ens.size > 2:
        k2 = k[:-2]
        a2 = np.sqrt((k2 + 1) * (k2 + 2) * (n - k2) * (n - k2 - 1))
        jp2 = (np.conj(c[2:]) * c[:-2] * a2 * damping_factors(ens, 2)).sum()
    else:
        jp2 = 0j
    same = np.abs(ov(ua, ub)) ** 2 / (ov(ua, ua).real * ov(ub, ub).real)
    # <J_+J_- + J_-J_+>/2 in sector k: N/2 + k (N-k) |<a|b>|^2
    jpjm = p @ (n / 2 + k * (n - k) * same)
    return assemble_moments(jp, p @ m, p @ m**2, jpz, jp2, jpjm)


def damping_factors(ens: SectorEnsemble, shift: int) -> np.ndarray:
    """A(k) for J_+ (shift 1) or A_2(k) for J_+^2 (shift 2); |A| <= 1."""
    n = ens.n_atoms
    k = ens.k[:-shift].astype(float)
    ua, ub = ens.ua, ens.ub
    hi = slice(shift, None)
    lo = slice(None, -shift)
    # overlaps of unit-normalized modes: rounding in the norms would
    # otherwise be raised to powers ~N
    na = np.sqrt(np.sum(np.abs(ua) ** 2, axis=1))
    nb = np.sqrt(np.sum(np.abs(ub) ** 2, axis=1))
    o_ab = np.sum(np.conj(ua[hi]) * ub[lo], axis=1) / (na[hi] * nb[lo])
    o_aa = np.sum(np.conj(ua[hi]) * ua[lo], axis=1) / (na[hi] * na[lo])
    o_bb = np.sum(np.conj(ub[hi]) * ub[lo], axis=1) / (nb[hi] * nb[lo])
    return o_ab**shift * _power(o_aa, k) * _power(o_bb, n - k - shift)


@dataclass
class Fig1Curve:
    t: np.ndarray
    xi2: np.ndarray
    theta: np.ndarray
    jx: np.ndarray
    width: np.ndarray
    width_split: np.ndarray
    xi2_spin: np.ndarray
    theta_spin: np.ndarray
    jx_spin: np.ndarray
    chi: float
    mu: float
    overlap_integral: float
    max_damping: float
    final: SectorEnsemble | None = None


def twisting_constants(params: CondensateParams, mode: RadialField) -> oat.InteractionConstants:
    return oat.InteractionConstants.from_scattering_lengths(
        params.a_aa, params.a_bb, params.a_ab, overlap_integral(mode)
    )


def run_fig1(
    params: CondensateParams,
    t_final: float = 20.0,
    n_out: int = 2000,
    dt: float = 0.005,
    grid: RadialGrid | None = None,
    n_sigma: float = WINDOW_SIGMAS,
    frozen: bool = False,
    workers=None,
) -> Fig1Curve:
    """Squeezing after the pi/2 pulse: sector GPE curve and the H_spin comparison.

    Output times are ``t_final * j / n_out`` for j = 0..n_out; each must be a
    whole number of steps.  ``frozen=True`` skips the mode evolution.
    """
    if grid is None:
        grid = RadialGrid.for_params(params)
    gs = ground_state(params, grid)
    ens0 = SectorEnsemble.after_pulse(params.n_atoms, gs.field, n_sigma)
    every = int(round(t_final / n_out / dt))
    if every < 1 or abs(every * dt * n_out - t_final) > 1e-9 * t_final:
        raise ValueError("output spacing must be a whole number of steps")
    rows = []
    max_damp = [0.0]

    def record(ens):
        moms = ensemble_moments(ens)
        res = optimal_xi_squared(moms, ens.n_atoms)
        for s in (1, 2):
            max_damp[0] = max(max_damp[0], float(np.abs(damping_factors(ens, s)).max()))
        rows.append((ens.time, res.xi2, res.theta_opt, moms.mean[0], ens.mean_r2(), ens.width_split()))

    if frozen:
        for j in range(n_out + 1):
            final = frozen_mode_ensemble(ens0, params, every * dt * j)
            record(final)
    else:
        final = evolve_sectors(
            ens0, params, every * dt * n_out, dt, observe=record, observe_every=every, workers=workers
        )
    arr = np.array(rows)
    consts = twisting_constants(params, gs.field)
    chi = oat.estimate_chi(consts)
    spin = oat.xi2_curve(oat.TwistingParams(chi, params.n_atoms), arr[:, 0])
    return Fig1Curve(
        t=arr[:, 0],
        xi2=arr[:, 1],
        theta=arr[:, 2],
        jx=arr[:, 3],
        width=arr[:, 4],
        width_split=arr[:, 5],
        xi2_spin=np.array([r.xi2 for r in spin]),
        theta_spin=np.array([r.theta_opt for r in spin]),
        jx_spin=np.array([r.moments.mean[0] for r in spin]),
        chi=chi,
        mu=gs.energy.chemical_potential,
        overlap_integral=consts.overlap_integral,
        max_damping=max_damp[0],
        final=final,
    )
