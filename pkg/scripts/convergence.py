"""Fig. 1 convergence: halve dt and double the grid, compare xi2 at the first deep dip.

    python3 -u scripts/convergence.py [n_atoms] [t_final]
"""
import sys

import numpy as np

from spinsqueeze import analysis
from spinsqueeze.gpe import CondensateParams, RadialGrid
from spinsqueeze.sectors import run_fig1

n = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
t_final = float(sys.argv[2]) if len(sys.argv) > 2 else 20.0
params = CondensateParams.fig1_setup(n)
base = RadialGrid.for_params(params)
runs = {
    "base": (base, 0.005),
    "dt/2": (base, 0.0025),
    "2n": (RadialGrid(2 * base.n_points + 1, base.r_max), 0.005),
}
ref = None
for name, (grid, dt) in runs.items():
    curve = run_fig1(params, t_final, int(t_final * 100), dt, grid)
    i = analysis.deep_dips(curve.xi2)[0]
    if ref is None:
        ref = curve.xi2[i]
    print(f"{name:5s} n={grid.n_points:5d} dt={dt}: first dip t={curve.t[i]:.2f} xi2={curve.xi2[i]:.6e} "
          f"rel={curve.xi2[i] / ref - 1:+.2e}", flush=True)
