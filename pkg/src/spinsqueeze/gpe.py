"""Radial Gross-Pitaevskii machinery in oscillator units (d0, 1/omega, hbar omega).

Spherical symmetry reduces the Laplacian to ``u''/r`` with ``u = r phi``.
Fields are stored internally as ``u_j = sqrt(4 pi dr) r_j phi(r_j)`` on the
interior nodes ``r_j = j dr`` (j = 1..n), so that ``sum |u_j|^2 = 1`` is the
3D normalization and the orthonormal type-I sine transform diagonalizes the
kinetic term with Dirichlet walls at r = 0 and r = r_max.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft, linalg

from .errors import ConvergenceError, GridError

LEAK_TOL = 1e-12


@dataclass(frozen=True)
class CondensateParams:
    a_aa: float
    a_bb: float
    a_ab: float
    n_atoms: int

    def __post_init__(self):
        if not self.a_aa > 0:
            raise ValueError("a_aa must be positive")
        if self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if self.a_ab >= min(self.a_aa, self.a_bb):
            warnings.warn(
                "a_ab >= min(a_aa, a_bb): mode deviations are not bounded, "
                "the sector ansatz degrades",
                RuntimeWarning,
                stacklevel=3,
            )

    @classmethod
    def fig1_setup(cls, n_atoms: int = 10_000, a_aa: float = 6e-3) -> "CondensateParams":
        return cls(a_aa=a_aa, a_bb=a_aa, a_ab=a_aa / 2, n_atoms=n_atoms)

    @property
    def g_aa(self) -> float:
        return 4 * np.pi * self.a_aa

    @property
    def g_bb(self) -> float:
        return 4 * np.pi * self.a_bb

    @property
    def g_ab(self) -> float:
        return 4 * np.pi * self.a_ab

    @property
    def symmetric(self) -> bool:
        return self.a_aa == self.a_bb

    def thomas_fermi_radius(self) -> float:
        return (15 * self.n_atoms * self.a_aa) ** 0.2

    def thomas_fermi_mu(self) -> float:
        return 0.5 * (15 * self.n_atoms * self.a_aa) ** 0.4


@dataclass(frozen=True)
class RadialGrid:
    n_points: int
    r_max: float

    def __post_init__(self):
        if self.n_points < 64:
            raise ValueError("n_points must be >= 64")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")

    @classmethod
    def for_params(cls, params: CondensateParams, n_points: int | None = None, dr: float = 0.05):
        """Box of 6 Thomas-Fermi radii (at least 10 d0) with spacing near ``dr``."""
        r_max = max(6.0 * params.thomas_fermi_radius(), 10.0)
        if n_points is None:
            # n + 1 a power of two keeps the sine transform fast
            n_points = max(64, 2 ** int(np.ceil(np.log2(r_max / dr))) - 1)
        return cls(n_points, r_max)

    @cached_property
    def dr(self) -> float:
        return self.r_max / (self.n_points + 1)

    @cached_property
    def r(self) -> np.ndarray:
        return self.dr * np.arange(1, self.n_points + 1)

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for ``integral f d^3r = sum w_j f(r_j)``."""
        return 4 * np.pi * self.r**2 * self.dr

    @cached_property
    def kinetic(self) -> np.ndarray:
        """k_p^2 / 2 for the sine modes sin(k_p r), k_p = p pi / r_max."""
        k = np.pi * np.arange(1, self.n_points + 1) / self.r_max
        return 0.5 * k**2

    @cached_property
    def density_factor(self) -> np.ndarray:
        """|phi|^2 = |u|^2 * density_factor."""
        return 1.0 / (4 * np.pi * self.dr * self.r**2)

    @property
    def potential(self) -> np.ndarray:
        return 0.5 * self.r**2

    def integrate(self, f) -> float:
        return float(np.sum(self.weights * f))

    def to_u(self, phi) -> np.ndarray:
        return np.sqrt(4 * np.pi * self.dr) * self.r * np.asarray(phi)

    def to_phi(self, u) -> np.ndarray:
        return np.asarray(u) / (np.sqrt(4 * np.pi * self.dr) * self.r)


def sine_transform(u, workers=None):
    # orthonormal DST-I is an involution
    return fft.dst(u, type=1, norm="ortho", axis=-1, workers=workers)


def kinetic_step(u, grid: RadialGrid, dt: float, workers=None):
    phase = np.exp(-1j * grid.kinetic * dt)
    return sine_transform(phase * sine_transform(u, workers), workers)


@dataclass(frozen=True)
class RadialField:
    """Complex mode phi(r) with 4 pi integral |phi|^2 r^2 dr = 1."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError("field values do not match grid")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_u(cls, grid: RadialGrid, u) -> "RadialField":
        return cls(grid, grid.to_phi(u))

    @classmethod
    def gaussian(cls, grid: RadialGrid, width: float = 1.0) -> "RadialField":
        """Harmonic ground state of width ``width`` d0 (1 is the ideal gas)."""
        phi = (np.pi * width**2) ** -0.75 * np.exp(-0.5 * grid.r**2 / width**2)
        return cls(grid, phi)

    @property
    def u(self) -> np.ndarray:
        return self.grid.to_u(self.values)

    def norm(self) -> float:
        return self.grid.integrate(np.abs(self.values) ** 2)

    def leak(self) -> float:
        return float(np.abs(self.values[-1]) ** 2)

    def check_leak(self):
        if self.leak() >= LEAK_TOL:
            raise GridError(f"|phi(r_max)|^2 = {self.leak():.3e}: enlarge the box")

    def mean_r2(self) -> float:
        return self.grid.integrate(self.grid.r**2 * np.abs(self.values) ** 2)


def overlap_integral(field: RadialField) -> float:
    """4 pi integral |phi|^4 r^2 dr."""
    return field.grid.integrate(np.abs(field.values) ** 4)


@dataclass(frozen=True)
class EnergyTerms:
    kinetic: float
    potential: float
    interaction: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.interaction

    @property
    def chemical_potential(self) -> float:
        return self.kinetic + self.potential + 2 * self.interaction

    @property
    def virial(self) -> float:
        """2T - 2V + 3E_int, zero for a stationary state."""
        return 2 * self.kinetic - 2 * self.potential + 3 * self.interaction


def energy_terms(u, grid: RadialGrid, coupling: float) -> EnergyTerms:
    """Single-component GPE energy with nonlinearity ``coupling |phi|^2``."""
    uk = sine_transform(u)
    kin = float(np.sum(grid.kinetic * np.abs(uk) ** 2))
    dens = np.abs(u) ** 2
    pot = float(np.sum(grid.potential * dens))
    inter = 0.5 * coupling * float(np.sum(dens**2 * grid.density_factor))
    return EnergyTerms(kin, pot, inter)


def _kinetic_matrix(grid: RadialGrid) -> np.ndarray:
    s = sine_transform(np.eye(grid.n_points))
    return (s * grid.kinetic) @ s


def _newton_polish(u, grid: RadialGrid, coupling: float, tol: float = 1e-11, max_iter: int = 30):
    """Solve H[u] u = mu u, |u| = 1 for real u by Newton's method.

    Removes the O(dt^2) bias of the split-step imaginary-time fixed point.
    """
    n = grid.n_points
    t_mat = _kinetic_matrix(grid)
    v = grid.potential
    f = grid.density_factor
    u = np.real(u).copy()
    mu = float(u @ (t_mat @ u) + np.sum((v + coupling * f * u**2) * u**2))
    best = np.inf
    for _ in range(max_iter):
        h_u = t_mat @ u + (v + coupling * f * u**2) * u
        res = np.concatenate([h_u - mu * u, [0.5 * (u @ u - 1.0)]])
        res_norm = float(np.linalg.norm(res))
        # stop at the tolerance or once rounding stalls the quadratic convergence
        if res_norm < tol * (1 + abs(mu)) or res_norm > 0.5 * best:
            break
        best = res_norm
        jac = np.empty((n + 1, n + 1))
        jac[:n, :n] = t_mat
        jac[:n, :n][np.diag_indices(n)] += v + 3 * coupling * f * u**2 - mu
        jac[:n, n] = -u
        jac[n, :n] = u
        jac[n, n] = 0.0
        step = linalg.solve(jac, -res)
        u += step[:n]
        mu += step[n]
    if res_norm > 1e-9 * (1 + abs(mu)):
        raise ConvergenceError("Newton polish did not converge", residual=res_norm)
    return u, mu, res_norm


@dataclass(frozen=True)
class GroundState:
    field: RadialField
    coupling: float
    energy: EnergyTerms
    steps: int
    residual: float


def ground_state(
    params: CondensateParams,
    grid: RadialGrid,
    dt: float = 0.01,
    tol: float = 1e-12,
    max_steps: int = 200_000,
    polish: bool = True,
) -> GroundState:
    """All-|a> condensate mode by imaginary-time split-step propagation.

    The nonlinearity is ``g_aa (N - 1)``.  Propagation stops once the energy
    changes by less than ``tol`` per step; dt is halved whenever the energy
    rises.  ``polish`` then removes the splitting bias with Newton iterations.
    """
    coupling = params.g_aa * (params.n_atoms - 1)
    # Thomas-Fermi-sized Gaussian start
    width = max(1.0, 0.5 * params.thomas_fermi_radius())
    u = grid.to_u(RadialField.gaussian(grid, width).values).real
    u /= np.linalg.norm(u)
    v = grid.potential
    f = grid.density_factor
    e_old = energy_terms(u, grid, coupling).total
    steps = 0
    converged = False
    while steps < max_steps:
        half = np.exp(-0.5 * dt * (v + coupling * f * u**2))
        w = half * u
        w = sine_transform(np.exp(-dt * grid.kinetic) * sine_transform(w))
        w = np.exp(-0.5 * dt * (v + coupling * f * w**2)) * w
        w /= np.linalg.norm(w)
        e_new = energy_terms(w, grid, coupling).total
        steps += 1
        if e_new > e_old + 1e-14 * abs(e_old) and dt > 1e-6:
            dt *= 0.5
            continue
        u = w
        if abs(e_new - e_old) < tol:
            converged = True
            e_old = e_new
            break
        e_old = e_new
    if not converged:
        raise ConvergenceError(
            f"imaginary time not converged after {steps} steps", residual=abs(e_new - e_old)
        )
    residual = float("nan")
    if polish:
        u, _, residual = _newton_polish(u, grid, coupling)
    u = np.abs(u)  # nodeless ground state; fixes the sign convention
    u /= np.linalg.norm(u)
    field = RadialField.from_u(grid, u)
    field.check_leak()
    return GroundState(field, coupling, energy_terms(u, grid, coupling), steps, residual)
