"""Optimal-time scaling sweep over a_aa and N; prints each point as it finishes.

    python3 -u scripts/scaling.py [out_dir]
"""
import sys
import time
from pathlib import Path

from spinsqueeze.config import load_config
from spinsqueeze.experiments import scaling_sweep
from spinsqueeze.output import write_manifest

root = Path(__file__).resolve().parents[1]
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/scaling")
out.mkdir(parents=True, exist_ok=True)
cfg = load_config(root / "configs" / "scaling.ini", "scaling-sweep")


def show(row):
    print(
        f"a={row['a_aa']:g} N={row['n_atoms']}: t_opt={row['t_opt']:.2f} xi2={row['xi2_min']:.3e} "
        f"first dip={row['t_first_dip']:.2f} chi_a={row['chi_a']:.4e} chi_b={row['chi_b']:.4e}",
        flush=True,
    )


start = time.perf_counter()
files, results = scaling_sweep(cfg, out, 0, 1, progress=show)
write_manifest(out / "manifest.ini", "scaling-sweep", cfg, files, 0, time.perf_counter() - start, results)
for k, v in results.items():
    print(k, v)
