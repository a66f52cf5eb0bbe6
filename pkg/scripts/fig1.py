"""Fig. 1 run at N = 1e4 and a short dip/revival summary.

    python3 -u scripts/fig1.py [out_dir] [config]
"""
import sys
from pathlib import Path

import numpy as np

from spinsqueeze import cli
from spinsqueeze.output import read_csv

root = Path(__file__).resolve().parents[1]
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/fig1")
config = sys.argv[2] if len(sys.argv) > 2 else str(root / "configs" / "fig1_n1e4.ini")

code = cli.run(["gpe-fig1", "--config", config, "--out", str(out)])
if code:
    sys.exit(code)
_, dips = read_csv(out / "fig1_dips.csv")
print(" t_dip   xi2_gpe    xi2_hspin  ratio  revival  offset")
for t, x, xs, r, rev, off in dips:
    print(f"{t:6.2f}  {x:.3e}  {xs:.3e}  {r:5.2f}  {rev:6.2f}  {off:+.2f}")
print("best dip", np.nanmin(dips[:, 1]) if len(dips) else "none")
