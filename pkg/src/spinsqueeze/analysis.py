"""Curve analysis: chi from the <J_x> decay, dip detection, scaling fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .errors import FitError

FIT_WINDOW = (0.7, 0.999)


def fit_chi_from_jx(t, jx, n_atoms: int, window=FIT_WINDOW) -> float:
    """Least-squares chi in <J_x>(t) = (N/2) cos^(N-1)(chi t).

    Only samples with <J_x>/(N/2) inside ``window`` enter the fit; they
    must be strictly decreasing.
    """
    t = np.asarray(t, dtype=float)
    ratio = np.asarray(jx, dtype=float) / (0.5 * n_atoms)
    sel = (ratio >= window[0]) & (ratio <= window[1]) & (t > 0)
    if sel.sum() < 3:
        raise FitError(f"only {sel.sum()} samples with <J_x>/(N/2) in {window}")
    ts, rs = t[sel], ratio[sel]
    if np.any(np.diff(rs) >= 0):
        raise FitError("<J_x> is not strictly decreasing over the fit window")
    # small-angle guess: ln r = (N-1) ln cos(chi t) ~ -(N-1) chi^2 t^2 / 2
    guess = float(np.median(np.sqrt(-2 * np.log(rs) / (n_atoms - 1)) / ts))

    def residual(p):
        return np.cos(p[0] * ts) ** (n_atoms - 1) - rs

    res = optimize.least_squares(residual, [guess], x_scale=[guess], xtol=1e-14, ftol=1e-14, gtol=1e-14)
    if not res.success:
        raise FitError(res.message)
    return float(abs(res.x[0]))


def local_minima(y, prominence: float = 0.0) -> np.ndarray:
    """Indices of interior local minima of ``y``."""
    idx, _ = signal.find_peaks(-np.asarray(y, dtype=float), prominence=prominence)
    return idx


def width_revivals(t, width) -> np.ndarray:
    """Times where the cloud returns to (local maxima of closeness to) its initial width."""
    width = np.asarray(width, dtype=float)
    dev = np.abs(width - width[0])
    idx, _ = signal.find_peaks(-dev, prominence=0.25 * (dev.max() - dev.min()))
    return np.asarray(t)[idx]


def deep_dips(xi2, prominence: float = 0.05) -> np.ndarray:
    """Indices of local minima of log10(xi^2) standing out by ``prominence`` decades."""
    return local_minima(np.log10(np.asarray(xi2, dtype=float)), prominence=prominence)


def split_revivals(t, width_split, rel_prominence: float = 0.25) -> np.ndarray:
    """Times where the a/b width mismatch of the sectors returns to a minimum."""
    s = np.asarray(width_split, dtype=float)
    idx = local_minima(s, prominence=rel_prominence * (s.max() - s.min()))
    return np.asarray(t)[idx]


def nearest(times, targets) -> tuple[np.ndarray, np.ndarray]:
    """For each time, the closest target and the signed offset to it."""
    times = np.asarray(times, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        return np.full(times.shape, np.nan), np.full(times.shape, np.nan)
    j = np.abs(times[:, None] - targets[None, :]).argmin(axis=1)
    return targets[j], times - targets[j]


def squeezing_dips(t, xi2, xi2_spin, prominence: float = 0.05) -> np.ndarray:
    """Indices of the deep dips: local minima of log(xi2_GPE / xi2_Hspin).

    The ratio removes the monotone twisting trend, leaving the modulation
    by the mode overlaps.
    """
    ratio = np.log(np.asarray(xi2) / np.asarray(xi2_spin))
    return local_minima(ratio, prominence=prominence)


@dataclass
class PowerLawFit:
    exponent: float
    stderr: float
    prefactor: float


def fit_power_law(x, y) -> PowerLawFit:
    """Ordinary least squares of log y on log x."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    if len(lx) < 3:
        raise ValueError("need at least 3 points per swept axis")
    design = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, *_ = np.linalg.lstsq(design, ly, rcond=None)
    dof = len(lx) - 2
    resid = ly - design @ coef
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(design.T @ design)
    return PowerLawFit(float(coef[0]), float(np.sqrt(cov[0, 0])), float(np.exp(coef[1])))
