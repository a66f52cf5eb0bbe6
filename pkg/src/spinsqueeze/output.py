"""CSV tables with versioned column schemas, run manifests, gnuplot snippets.

CSV: UTF-8, LF line ends, ``,`` separator, header row first; floats are
written with ``repr`` so a re-run with the same inputs is byte-identical.
"""

from __future__ import annotations

import platform
from pathlib import Path

import numpy as np

from . import __version__
from .config import format_value, to_ini_section

SCHEMA_VERSION = 1

SCHEMAS = {
    "oat_curve": ("t", "xi2", "theta_opt", "jx"),
    "fig1_gpe": ("t", "xi2", "theta_opt", "jx", "width", "width_split"),
    "fig1_hspin": ("t", "xi2", "theta_opt", "jx"),
    "fig1_dips": ("t", "xi2", "xi2_hspin", "ratio", "nearest_revival", "offset"),
    "fig2_loss": ("chi_t", "xi2_loss", "xi2_stderr", "xi2_lossless", "mean_n", "lost_fraction", "theta_loss"),
    "witness": ("index", "n_atoms", "xi2_min", "verdict"),
    "scaling_points": (
        "axis", "a_aa", "n_atoms", "t_opt", "xi2_min", "t_first_dip", "chi_a", "chi_b", "t_opt_chi_b", "flagged",
    ),
    "scaling_fit": ("axis", "quantity", "exponent", "stderr", "n_points", "target"),
    "dressing": ("rabi_hz", "detuning_hz", "delta_e_nk", "delta_e_hz"),
}


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if np.isnan(v) else repr(v)
    text = str(value)
    if any(c in text for c in ',"\n'):
        raise ValueError(f"CSV cell may not contain separators: {text!r}")
    return text


def write_csv(path: str | Path, schema: str, rows) -> Path:
    """Write ``rows`` (iterables matching the schema columns) to ``path``."""
    columns = SCHEMAS[schema]
    path = Path(path)
    lines = [",".join(columns)]
    for row in rows:
        row = list(row)
        if len(row) != len(columns):
            raise ValueError(f"{schema}: expected {len(columns)} cells, got {len(row)}")
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body (non-numeric cells become nan)."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")

    def num(c):
        try:
            return float(c)
        except ValueError:
            return np.nan

    body = np.array([[num(c) for c in line.split(",")] for line in text[1:]], dtype=float)
    return header, body.reshape(len(text) - 1, len(header))


def write_manifest(path: str | Path, command: str, config, files, seed, wall_time: float, results=None) -> Path:
    """INI manifest: the resolved config section (re-runnable) plus run metadata."""
    lines = to_ini_section(command, config)
    lines += [
        "",
        "[manifest]",
        f"command = {command}",
        f"code_version = {__version__}",
        f"schema_version = {SCHEMA_VERSION}",
        f"seed = {seed}",
        f"wall_time_s = {wall_time:.3f}",
        f"python = {platform.python_version()}",
        f"numpy = {np.__version__}",
        f"files = {', '.join(Path(f).name for f in files)}",
    ]
    if results:
        lines += ["", "[results]"] + [f"{k} = {format_value(v)}" for k, v in results.items()]
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def gnuplot_script(csv_name: str, x: str, ys, logscale_y: bool = True) -> str:
    """Plot-data helper: a gnuplot script for columns of one CSV."""
    cols = SCHEMAS_BY_FILE.get(csv_name)
    lines = ["set datafile separator ','", "set key autotitle columnhead"]
    if logscale_y:
        lines.append("set logscale y")
    parts = []
    for y in ys:
        ix, iy = (cols.index(x) + 1, cols.index(y) + 1) if cols else (x, y)
        parts.append(f"'{csv_name}' using {ix}:{iy} with lines")
    lines.append("plot " + ", ".join(parts))
    return "\n".join(lines) + "\n"


SCHEMAS_BY_FILE = {f"{k}.csv": v for k, v in SCHEMAS.items()}
