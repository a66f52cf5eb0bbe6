"""Collective-spin algebra on the symmetric (Dicke) subspace.

Basis index ``k`` is the number of atoms in internal state ``|a>``; ``J_z``
acts as ``k - N/2`` and ``J_+`` (``= |a><b|`` summed over atoms) maps
``k -> k+1`` with matrix element ``sqrt((k+1)(N-k))``.  Units: hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg
from scipy.special import gammaln, xlogy

from .errors import DegenerateFrameError

NORM_TOL = 1e-12
FRAME_TOL = 1e-10
WITNESS_TOL = 1e-9
# relative anisotropy of the y-z covariance block below which theta is a tie
ISOTROPY_TOL = 1e-10


@dataclass(frozen=True)
class DickeState:
    n_atoms: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        if amps.shape != (self.n_atoms + 1,):
            raise ValueError(
                f"expected {self.n_atoms + 1} amplitudes, got shape {amps.shape}"
            )
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: sum |c_k|^2 = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, n_atoms: int, amplitudes) -> "DickeState":
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(n_atoms, amps / np.sqrt(np.vdot(amps, amps).real))

    @classmethod
    def basis(cls, n_atoms: int, k: int) -> "DickeState":
        amps = np.zeros(n_atoms + 1, dtype=complex)
        amps[k] = 1.0
        return cls(n_atoms, amps)

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class SpinFrame:
    n1: np.ndarray
    n2: np.ndarray
    n3: np.ndarray

    def __post_init__(self):
        vecs = [np.asarray(v, dtype=float).reshape(3) for v in (self.n1, self.n2, self.n3)]
        gram = np.array([[a @ b for b in vecs] for a in vecs])
        if np.abs(gram - np.eye(3)).max() > FRAME_TOL:
            raise ValueError("frame vectors must be orthonormal")
        for name, v in zip(("n1", "n2", "n3"), vecs):
            object.__setattr__(self, name, v)

    @classmethod
    def from_theta(cls, theta: float) -> "SpinFrame":
        """n1 = (0, cos t, sin t) in the y-z plane, n2 = x, n3 = n1 x n2."""
        n1 = np.array([0.0, np.cos(theta), np.sin(theta)])
        n2 = np.array([1.0, 0.0, 0.0])
        return cls(n1, n2, np.cross(n1, n2))

    @classmethod
    def from_matrix(cls, rot) -> "SpinFrame":
        rot = np.asarray(rot, dtype=float)
        return cls(rot[:, 0], rot[:, 1], rot[:, 2])

    def rotated(self, rot) -> "SpinFrame":
        rot = np.asarray(rot, dtype=float)
        return SpinFrame(rot @ self.n1, rot @ self.n2, rot @ self.n3)


@dataclass(frozen=True)
class SpinMoments:
    """Mean spin and symmetrized covariance ``(<J_iJ_j + J_jJ_i>/2 - <J_i><J_j>)``."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(3)
        cov = np.asarray(self.cov, dtype=float).reshape(3, 3)
        cov = 0.5 * (cov + cov.T)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_raw(cls, mean, second) -> "SpinMoments":
        """Build from the mean and the raw symmetrized second moments."""
        mean = np.asarray(mean, dtype=float)
        return cls(mean, np.asarray(second, dtype=float) - np.outer(mean, mean))

    @property
    def second(self) -> np.ndarray:
        return self.cov + np.outer(self.mean, self.mean)

    def variance(self, n) -> float:
        n = np.asarray(n, dtype=float)
        return float(n @ self.cov @ n)

    def expectation(self, n) -> float:
        return float(np.asarray(n, dtype=float) @ self.mean)


@dataclass(frozen=True)
class SqueezingResult:
    xi2: float
    theta_opt: float
    frame: SpinFrame
    moments: SpinMoments | None = field(default=None, compare=False)


class WitnessResult(NamedTuple):
    verdict: str  # "entangled" or "inconclusive"
    xi2: float | None
    diagnostic: str = ""

    @property
    def entangled(self) -> bool:
        return self.verdict == "entangled"


def coherent_state(n_atoms: int, polar: float = np.pi / 2, azimuth: float = 0.0) -> DickeState:
    """Spin-coherent state with Bloch direction (polar, azimuth); default +x.

    Each atom is ``cos(polar/2)|a> + exp(i azimuth) sin(polar/2)|b>``.
    """
    if n_atoms < 1:
        raise ValueError(f"n_atoms must be >= 1, got {n_atoms}")
    n = n_atoms
    k = np.arange(n + 1)
    ca, cb = np.cos(polar / 2), np.sin(polar / 2)
    logc = 0.5 * (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))
    with np.errstate(divide="ignore"):
        logmag = logc + xlogy(k, abs(ca)) + xlogy(n - k, abs(cb))
    mag = np.exp(logmag)
    phase = np.sign(ca) ** k * np.sign(cb) ** (n - k) * np.exp(1j * azimuth * (n - k))
    return DickeState.normalized(n, mag * phase)


def assemble_moments(jp, jz, jz2, jpz, jp2, jpjm):
    """Collect first/second moments from ladder-operator expectations.

    ``jpjm`` is ``<J_+J_- + J_-J_+>/2``, ``jpz`` the symmetrized ``<J_+J_z>``.
    """
    jx, jy = jp.real, jp.imag
    jx2 = 0.5 * (jpjm + jp2.real)
    jy2 = 0.5 * (jpjm - jp2.real)
    jxy = 0.5 * jp2.imag
    second = np.array(
        [
            [jx2, jxy, jpz.real],
            [jxy, jy2, jpz.imag],
            [jpz.real, jpz.imag, jz2],
        ]
    )
    return SpinMoments.from_raw([jx, jy, jz], second)


def ladder_coefficients(n_atoms: int):
    """Matrix elements of J_+ (k -> k+1) and J_+^2 (k -> k+2)."""
    k = np.arange(n_atoms + 1, dtype=float)
    n = float(n_atoms)
    a1 = np.sqrt((k[:-1] + 1) * (n - k[:-1]))
    a2 = np.sqrt((k[:-2] + 1) * (k[:-2] + 2) * (n - k[:-2]) * (n - k[:-2] - 1))
    return a1, a2


def moments(state: DickeState) -> SpinMoments:
    c = state.amplitudes
    n = state.n_atoms
    k = np.arange(n + 1, dtype=float)
    m = k - n / 2
    p = np.abs(c) ** 2
    a1, a2 = ladder_coefficients(n)
    coh1 = np.conj(c[1:]) * c[:-1] * a1
    jp = coh1.sum()
    jpz = (coh1 * (m[:-1] + 0.5)).sum()
    jp2 = (np.conj(c[2:]) * c[:-2] * a2).sum()
    jz = p @ m
    jz2 = p @ m**2
    jpjm = p @ (n / 2 * (n / 2 + 1) - m**2)
    return assemble_moments(jp, jz, jz2, jpz, jp2, jpjm)


def xi_squared(moms: SpinMoments, n_atoms: int, frame: SpinFrame) -> float:
    denom = moms.expectation(frame.n2) ** 2 + moms.expectation(frame.n3) ** 2
    scale = max(1.0, float(moms.mean @ moms.mean))
    if denom <= 1e-24 * scale:
        raise DegenerateFrameError(
            "mean spin orthogonal to both n2 and n3; xi^2 undefined"
        )
    return n_atoms * moms.variance(frame.n1) / denom


def optimal_theta(cov_yz) -> float:
    """Angle in [-pi/2, pi/2) minimizing the variance along (0, cos t, sin t)."""
    b = np.asarray(cov_yz, dtype=float)
    half_diff = 0.5 * (b[0, 0] - b[1, 1])
    radius = np.hypot(half_diff, b[0, 1])
    if radius <= ISOTROPY_TOL * max(abs(0.5 * (b[0, 0] + b[1, 1])), 1e-300):
        return 0.0
    # var(t) = mean + radius * cos(2t - phi); minimum at 2t = phi + pi
    phi = np.arctan2(b[0, 1], half_diff)
    theta = 0.5 * (phi + np.pi)
    return float((theta + np.pi / 2) % np.pi - np.pi / 2)


def optimal_xi_squared(moms: SpinMoments, n_atoms: int) -> SqueezingResult:
    """Minimize xi^2 over n1 in the y-z plane with n2 along x."""
    theta = optimal_theta(moms.cov[1:, 1:])
    frame = SpinFrame.from_theta(theta)
    return SqueezingResult(xi_squared(moms, n_atoms, frame), theta, frame, moms)


def min_xi_squared_any_frame(moms: SpinMoments, n_atoms: int) -> SqueezingResult:
    """Minimum of xi^2 over all orthonormal frames (no plane restriction).

    For unit n1 the denominator is ``|m|^2 - (n1.m)^2``.  Splitting
    ``n1 = alpha m_hat + y`` with ``y`` orthogonal to the mean and minimizing
    over alpha leaves the Schur complement of the covariance in the plane
    orthogonal to the mean.
    """
    mean = moms.mean
    mm = float(mean @ mean)
    if mm <= 1e-24:
        raise DegenerateFrameError("zero mean spin; xi^2 undefined in every frame")
    m_hat = mean / np.sqrt(mm)
    plane = linalg.null_space(m_hat[None, :])  # (3, 2)
    c = moms.cov
    c_mm = float(m_hat @ c @ m_hat)
    c_pm = plane.T @ c @ m_hat
    schur = plane.T @ c @ plane
    if c_mm > 1e-14 * max(1.0, np.trace(c)):
        schur = schur - np.outer(c_pm, c_pm) / c_mm
    else:
        c_mm, c_pm = 1.0, np.zeros(2)
    w, v = np.linalg.eigh(schur)
    alpha = -(c_pm @ v[:, 0]) / c_mm
    n1 = alpha * m_hat + plane @ v[:, 0]
    n1 /= np.linalg.norm(n1)
    perp = mean - (mean @ n1) * n1
    n2 = perp / np.linalg.norm(perp)
    frame = SpinFrame(n1, n2, np.cross(n1, n2))
    return SqueezingResult(xi_squared(moms, n_atoms, frame), float("nan"), frame, moms)


def witness_check(moms: SpinMoments, n_atoms: int, frame: SpinFrame, tol: float = WITNESS_TOL) -> WitnessResult:
    """xi^2 < 1 certifies entanglement; xi^2 >= 1 proves nothing."""
    try:
        xi2 = xi_squared(moms, n_atoms, frame)
    except DegenerateFrameError as exc:
        return WitnessResult("inconclusive", None, str(exc))
    if xi2 < 1.0 - tol:
        return WitnessResult("entangled", xi2)
    return WitnessResult("inconclusive", xi2, "xi^2 >= 1: criterion is one-sided")


def separable_moments(weights, bloch) -> SpinMoments:
    """Exact collective moments of ``sum_k P_k rho_k^(1) x ... x rho_k^(N)``.

    ``bloch`` has shape (terms, N, 3) with single-atom Bloch vectors
    (``<j_i> = r_i / 2``).  Distinct atoms factorize; a single atom
    contributes ``<{j_i, j_j}>/2 = delta_ij / 4``.
    """
    w = np.asarray(weights, dtype=float)
    r = np.asarray(bloch, dtype=float)
    n_atoms = r.shape[1]
    total = r.sum(axis=1)  # (terms, 3)
    mean_k = 0.5 * total
    second_k = 0.25 * (
        np.einsum("ki,kj->kij", total, total)
        - np.einsum("kni,knj->kij", r, r)
        + n_atoms * np.eye(3)[None]
    )
    return SpinMoments.from_raw(w @ mean_k, np.einsum("k,kij->ij", w, second_k))


def sample_separable_state(n_atoms: int, seed: int, n_terms: int | None = None) -> SpinMoments:
    """Random separable mixture: Dirichlet weights, Bloch vectors uniform in the ball."""
    if n_atoms < 2:
        raise ValueError(f"n_atoms must be >= 2, got {n_atoms}")
    rng = np.random.default_rng(seed)
    if n_terms is None:
        n_terms = int(rng.integers(1, 9))
    weights = rng.dirichlet(np.ones(n_terms))
    direction = rng.normal(size=(n_terms, n_atoms, 3))
    direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
    radius = rng.random((n_terms, n_atoms, 1)) ** (1 / 3)
    # bias half the samples toward pure, aligned states where the bound is tight
    if rng.random() < 0.5:
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        spread = rng.random() * 0.5
        direction = axis + spread * direction
        direction /= np.linalg.norm(direction, axis=-1, keepdims=True)
        radius = 1.0 - 0.1 * rng.random((n_terms, n_atoms, 1)) ** 3
    return separable_moments(weights, direction * radius)
