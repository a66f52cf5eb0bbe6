"""Fig. 2: squeezing with 10% loss at chi t = 6e-4 (N = 1e5, Gamma = 200 chi).

    python3 -u scripts/fig2.py [out_dir] [threads]
"""
import sys
from pathlib import Path

from spinsqueeze import cli

root = Path(__file__).resolve().parents[1]
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs/fig2")
threads = sys.argv[2] if len(sys.argv) > 2 else "0"
code = cli.run(["mc-fig2", "--config", str(root / "configs" / "fig2.ini"), "--out", str(out), "--threads", threads])
if code == 0:
    print((out / "manifest.ini").read_text().split("[results]")[-1])
sys.exit(code)
