"""``spinsqueeze`` command line: one subcommand per experiment pipeline.

Each run writes its CSV tables and ``manifest.ini`` into ``--out``.  The
manifest holds the fully resolved config section, so passing it back as
``--config`` repeats the run.  Exit codes: 0 success, 2 bad config or
arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from .config import COMMANDS, load_config, with_overrides
from .errors import ConfigError, SpinSqueezeError
from .experiments import PIPELINES
from .output import write_manifest

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinsqueeze", description="Spin squeezing in two-component condensates.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(PIPELINES[name].__doc__ or "").strip().split("\n")[0] or None)
        p.add_argument("--config", type=Path, help="INI file with a [%s] section" % name)
        p.add_argument("--out", type=Path, default=Path("."), help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (overrides the config)")
        p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all cores")
    return parser


def _threads(n: int) -> int:
    if n < 0:
        raise ConfigError(f"--threads must be >= 0, got {n}")
    return n or (os.cpu_count() or 1)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    try:
        cfg = with_overrides(load_config(args.config, args.command), seed=args.seed)
        seed = getattr(cfg, "seed", 0) if args.seed is None else args.seed
        threads = _threads(args.threads)
        args.out.mkdir(parents=True, exist_ok=True)
        start = time.perf_counter()
        files, results = PIPELINES[args.command](cfg, args.out, seed, threads)
        wall = time.perf_counter() - start
    except (ConfigError, ValueError) as exc:
        if isinstance(exc, SpinSqueezeError):
            print(f"spinsqueeze: numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        print(f"spinsqueeze: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpinSqueezeError as exc:
        print(f"spinsqueeze: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_manifest(args.out / "manifest.ini", args.command, cfg, files, seed, wall, results)
    for f in files:
        print(f)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
