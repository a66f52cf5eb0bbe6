"""Experiment pipelines behind the command line; each returns (files, results)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import analysis, oat
from .checkpoint import save_checkpoint
from .config import (
    DressingConfig,
    GpeFig1Config,
    McFig2Config,
    OatCurveConfig,
    ScalingSweepConfig,
    WitnessSuiteConfig,
)
from .dressing import DressingParams, dressing_shift
from .errors import DegenerateFrameError, FitError, SpinSqueezeError
from .gpe import CondensateParams, RadialGrid
from .loss import LossParams, xi2_with_loss
from .output import gnuplot_script, write_csv
from .sectors import run_fig1
from .spin import (
    SpinFrame,
    coherent_state,
    min_xi_squared_any_frame,
    moments,
    sample_separable_state,
    witness_check,
    xi_squared,
)

DIP_PROMINENCE = 0.05  # decades of xi^2


def oat_curve(cfg: OatCurveConfig, out: Path, seed: int, threads: int):
    times = np.linspace(0.0, cfg.t_final, cfg.n_out + 1)
    curve = oat.xi2_curve(oat.TwistingParams(cfg.chi, cfg.n_atoms), times)
    rows = [(t, r.xi2, r.theta_opt, r.moments.mean[0]) for t, r in zip(times, curve)]
    path = write_csv(out / "oat_curve.csv", "oat_curve", rows)
    t_opt, xi2_min = oat.find_optimal_time(oat.TwistingParams(cfg.chi, cfg.n_atoms))
    results = {"t_opt": t_opt, "xi2_min": xi2_min, "asymptotic_min": oat.asymptotic_min(cfg.n_atoms)}
    return [path], results


def _grid(params: CondensateParams, n_points: int, r_max: float) -> RadialGrid:
    auto = RadialGrid.for_params(params)
    return RadialGrid(n_points or auto.n_points, r_max or auto.r_max)


def fig1_dips(curve, prominence: float = DIP_PROMINENCE):
    """Deep dips of the GPE curve and the nearest width revival of each."""
    idx = analysis.deep_dips(curve.xi2, prominence)
    revivals = analysis.split_revivals(curve.t, curve.width_split)
    near, offset = analysis.nearest(curve.t[idx], revivals)
    return idx, revivals, near, offset


def chi_from_jx(curve, n_atoms: int) -> float:
    try:
        return analysis.fit_chi_from_jx(curve.t, curve.jx, n_atoms)
    except FitError:
        return float("nan")


def gpe_fig1(cfg: GpeFig1Config, out: Path, seed: int, threads: int):
    params = CondensateParams(cfg.a_aa, cfg.a_bb, cfg.a_ab, cfg.n_atoms)
    grid = _grid(params, cfg.n_points, cfg.r_max)
    workers = None if threads in (0, 1) else threads
    curve = run_fig1(
        params, cfg.t_final, cfg.n_out, cfg.dt, grid, cfg.window_sigmas, frozen=cfg.frozen, workers=workers
    )
    gpe_rows = zip(curve.t, curve.xi2, curve.theta, curve.jx, curve.width, curve.width_split)
    spin_rows = zip(curve.t, curve.xi2_spin, curve.theta_spin, curve.jx_spin)
    files = [
        write_csv(out / "fig1_gpe.csv", "fig1_gpe", gpe_rows),
        write_csv(out / "fig1_hspin.csv", "fig1_hspin", spin_rows),
    ]
    idx, revivals, near, offset = fig1_dips(curve)
    dip_rows = [
        (curve.t[i], curve.xi2[i], curve.xi2_spin[i], curve.xi2[i] / curve.xi2_spin[i], r, o)
        for i, r, o in zip(idx, near, offset)
    ]
    files.append(write_csv(out / "fig1_dips.csv", "fig1_dips", dip_rows))
    plot = out / "fig1.gp"
    plot.write_text(
        gnuplot_script("fig1_gpe.csv", "t", ["xi2"]).replace("plot ", "plot 'fig1_hspin.csv' using 1:2 with lines, ", 1),
        encoding="utf-8",
    )
    files.append(plot)
    if cfg.checkpoint and curve.final is not None:
        save_checkpoint(out / "checkpoint", curve.final, params)
    results = {
        "chi_estimator_a": curve.chi,
        "chi_estimator_b": chi_from_jx(curve, cfg.n_atoms),
        "chemical_potential": curve.mu,
        "overlap_integral": curve.overlap_integral,
        "max_abs_damping": curve.max_damping,
        "n_points": grid.n_points,
        "r_max": grid.r_max,
        "xi2_min": float(curve.xi2.min()),
        "t_xi2_min": float(curve.t[curve.xi2.argmin()]),
        "dip_times": tuple(float(curve.t[i]) for i in idx),
        "revival_times": tuple(float(r) for r in revivals),
    }
    return files, results


def mc_fig2(cfg: McFig2Config, out: Path, seed: int, threads: int):
    grid = np.linspace(0.0, cfg.t_final, cfg.n_out + 1)
    params = LossParams(cfg.gamma_over_chi, cfg.n_atoms, cfg.n_trajectories, seed, grid)
    curve = xi2_with_loss(params, cfg.normalize_by, cfg.method, threads)
    rows = zip(
        curve.chi_t, curve.xi2_loss, curve.xi2_stderr, curve.xi2_lossless, curve.mean_n, curve.lost_fraction,
        curve.theta_loss,
    )
    path = write_csv(out / "fig2_loss.csv", "fig2_loss", rows)
    i = int(np.nanargmin(curve.xi2_loss))
    t_ref = 6e-4
    results = {
        "xi2_loss_min": float(curve.xi2_loss[i]),
        "xi2_loss_min_stderr": float(curve.xi2_stderr[i]),
        "chi_t_loss_min": float(curve.chi_t[i]),
        "xi2_lossless_min": float(np.min(curve.xi2_lossless)),
        "lost_fraction_at_6e-4": float(np.interp(t_ref, curve.chi_t, curve.lost_fraction)),
        "lost_fraction_analytic_at_6e-4": float(1 - np.exp(-cfg.gamma_over_chi * t_ref)),
    }
    return [path], results


def witness_suite(cfg: WitnessSuiteConfig, out: Path, seed: int, threads: int):
    rows = []
    worst = np.inf
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(cfg.n_states, dtype=np.uint64)
    sizes = np.random.default_rng(ss.spawn(1)[0]).integers(cfg.n_min, cfg.n_max + 1, cfg.n_states)
    violations = 0
    for i, (n, s) in enumerate(zip(sizes, seeds)):
        moms = sample_separable_state(int(n), int(s))
        try:
            best = min_xi_squared_any_frame(moms, int(n))
        except DegenerateFrameError:
            rows.append((i, int(n), float("nan"), "degenerate"))
            continue
        verdict = witness_check(moms, int(n), best.frame).verdict
        violations += verdict == "entangled"
        worst = min(worst, best.xi2)
        rows.append((i, int(n), best.xi2, verdict))
    path = write_csv(out / "witness.csv", "witness", rows)
    coherent_dev = max(
        abs(xi_squared(moments(coherent_state(n)), n, SpinFrame.from_theta(th)) - 1)
        for n in range(cfg.n_min, cfg.n_max + 1)
        for th in np.linspace(-np.pi / 2, np.pi / 2, 7, endpoint=False)
    )
    results = {"min_xi2_separable": float(worst), "violations": int(violations), "coherent_max_dev": coherent_dev}
    if violations:
        raise SpinSqueezeError(f"{violations} separable samples flagged entangled; see {path}")
    return [path], results


def scaling_point(a_aa: float, n_atoms: int, cfg: ScalingSweepConfig, workers=None) -> dict:
    """One sweep point: GPE run, deepest dip (t_opt), first dip, chi estimators."""
    params = CondensateParams(a_aa, a_aa, a_aa / 2, n_atoms)
    grid = RadialGrid.for_params(params)
    curve = run_fig1(params, cfg.t_final, cfg.n_out, cfg.dt, grid, cfg.window_sigmas, workers=workers)
    return point_from_curve(curve, a_aa, n_atoms)


def point_from_curve(curve, a_aa: float, n_atoms: int) -> dict:
    idx = analysis.deep_dips(curve.xi2, DIP_PROMINENCE)
    chi_b = chi_from_jx(curve, n_atoms)
    row = {
        "a_aa": a_aa,
        "n_atoms": n_atoms,
        "chi_a": curve.chi,
        "chi_b": chi_b,
        "t_opt_chi_b": oat.find_optimal_time(oat.TwistingParams(chi_b, n_atoms))[0] if np.isfinite(chi_b) else np.nan,
    }
    if idx.size == 0:
        row.update(t_opt=np.nan, xi2_min=np.nan, t_first_dip=np.nan, flagged=True)
    else:
        best = idx[np.argmin(curve.xi2[idx])]
        row.update(t_opt=curve.t[best], xi2_min=curve.xi2[best], t_first_dip=curve.t[idx[0]], flagged=False)
    return row


def fit_axis(rows, axis: str, quantity: str):
    key = "a_aa" if axis == "a" else "n_atoms"
    ok = [r for r in rows if not r["flagged"] and np.isfinite(r[quantity])]
    if len(ok) < 3:
        return None
    return analysis.fit_power_law([r[key] for r in ok], [r[quantity] for r in ok])


SCALING_TARGETS = {"a": -0.4, "n": -1.0 / 15.0}


def scaling_sweep(cfg: ScalingSweepConfig, out: Path, seed: int, threads: int, progress=None, cache=None):
    """Optimal-time scaling; ``cache`` maps (a_aa, N) to precomputed points."""
    if len(cfg.a_values) < 3 or len(cfg.n_values) < 3:
        raise ValueError("scaling sweep needs at least 3 points per swept axis")
    workers = None if threads in (0, 1) else threads
    cache = {} if cache is None else cache
    points = []
    for axis, pairs in (
        ("a", [(a, cfg.n_fixed) for a in cfg.a_values]),
        ("n", [(cfg.a_fixed, n) for n in cfg.n_values]),
    ):
        rows = []
        for a, n in pairs:
            if (a, n) not in cache:
                cache[(a, n)] = scaling_point(a, n, cfg, workers)
                if progress:
                    progress(cache[(a, n)])
            rows.append(cache[(a, n)])
        points.append((axis, rows))
    point_rows, fit_rows = [], []
    for axis, rows in points:
        for r in rows:
            point_rows.append(
                (axis, r["a_aa"], r["n_atoms"], r["t_opt"], r["xi2_min"], r["t_first_dip"], r["chi_a"], r["chi_b"],
                 r["t_opt_chi_b"], r["flagged"])
            )
        for quantity in ("t_opt", "t_first_dip", "t_opt_chi_b"):
            fit = fit_axis(rows, axis, quantity)
            fit_rows.append(
                (axis, quantity, fit.exponent if fit else np.nan, fit.stderr if fit else np.nan,
                 sum(not r["flagged"] for r in rows), SCALING_TARGETS[axis])
            )
    files = [
        write_csv(out / "scaling_points.csv", "scaling_points", point_rows),
        write_csv(out / "scaling_fit.csv", "scaling_fit", fit_rows),
    ]
    results = {f"exponent_{r[0]}_{r[1]}": r[2] for r in fit_rows}
    return files, results


def dressing(cfg: DressingConfig, out: Path, seed: int, threads: int):
    params = DressingParams(
        2 * np.pi * cfg.rabi_mhz * 1e6, 2 * np.pi * cfg.detuning_mhz * 1e6, cfg.cg2_shifted, cfg.cg2_reference
    )
    shift = dressing_shift(params)
    row = (cfg.rabi_mhz * 1e6, cfg.detuning_mhz * 1e6, shift.nanokelvin, shift.hertz)
    path = write_csv(out / "dressing.csv", "dressing", [row])
    return [path], {"delta_e_nk": shift.nanokelvin, "delta_e_hz": shift.hertz}


PIPELINES = {
    "oat-curve": oat_curve,
    "gpe-fig1": gpe_fig1,
    "mc-fig2": mc_fig2,
    "witness-suite": witness_suite,
    "scaling-sweep": scaling_sweep,
    "dressing": dressing,
}
