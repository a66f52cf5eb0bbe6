"""Experiment configuration: one INI section per command, typed by its dataclass.

A file may hold sections for several commands; only the section named after
the command being run is used.  A ``[manifest]`` section (written next to
every output) is ignored on input, so manifests re-run as configs.
"""

from __future__ import annotations

import configparser
import dataclasses
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


_PARSERS = {
    "int": _int,
    "float": float,
    "str": str,
    "bool": _bool,
    "tuple[float, ...]": _floats,
    "tuple[int, ...]": _ints,
}


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return str(value)


@dataclass
class OatCurveConfig:
    """Exact twisting curve; times in units of 1/chi when chi = 1."""

    n_atoms: int = 100
    chi: float = 1.0
    t_final: float = 0.3
    n_out: int = 300


@dataclass
class GpeFig1Config:
    """Sector GPE run after the pi/2 pulse; lengths in d0, times in 1/omega."""

    n_atoms: int = 10_000
    a_aa: float = 6e-3
    a_bb: float = 6e-3
    a_ab: float = 3e-3
    t_final: float = 20.0
    n_out: int = 2000
    dt: float = 0.005
    n_points: int = 0  # 0: chosen from the Thomas-Fermi radius
    r_max: float = 0.0  # 0: six Thomas-Fermi radii
    window_sigmas: float = 8.0
    frozen: bool = False
    checkpoint: bool = False


@dataclass
class McFig2Config:
    """Twisting with loss; times in units of 1/chi."""

    n_atoms: int = 100_000
    gamma_over_chi: float = 200.0
    n_trajectories: int = 200
    t_final: float = 1.5e-3
    n_out: int = 30
    method: str = "binomial"
    normalize_by: str = "mean"
    seed: int = 0


@dataclass
class WitnessSuiteConfig:
    n_states: int = 10_000
    n_min: int = 2
    n_max: int = 50
    seed: int = 0


@dataclass
class ScalingSweepConfig:
    """Squeezing-time scaling: a_aa swept at fixed N, N swept at fixed a_aa."""

    a_values: tuple[float, ...] = (3e-3, 6e-3, 12e-3)
    n_fixed: int = 10_000
    n_values: tuple[int, ...] = (1000, 3000, 10_000)
    a_fixed: float = 6e-3
    t_final: float = 20.0
    n_out: int = 400
    dt: float = 0.005
    window_sigmas: float = 8.0


@dataclass
class DressingConfig:
    rabi_mhz: float = 2.0
    detuning_mhz: float = 25.0
    cg2_shifted: float = 2.0 / 3.0
    cg2_reference: float = 0.5


COMMANDS = {
    "oat-curve": OatCurveConfig,
    "gpe-fig1": GpeFig1Config,
    "mc-fig2": McFig2Config,
    "witness-suite": WitnessSuiteConfig,
    "scaling-sweep": ScalingSweepConfig,
    "dressing": DressingConfig,
}

IGNORED_SECTIONS = ("manifest", "results")


def _key_line(text: str, section: str, key: str) -> int | None:
    """1-based line of ``key`` inside ``[section]``; configparser does not keep positions."""
    current = None
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]", re.IGNORECASE)
    for i, line in enumerate(text.splitlines(), 1):
        head = re.match(r"^\s*\[([^\]]+)\]", line)
        if head:
            current = head.group(1).strip()
        elif current == section and pattern.match(line):
            return i
    return None


def _section_line(text: str, section: str) -> int | None:
    for i, line in enumerate(text.splitlines(), 1):
        if re.match(rf"^\s*\[{re.escape(section)}\]", line):
            return i
    return None


def parse_config(text: str, command: str):
    """Typed config for ``command`` from INI text; missing keys take defaults."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    cls = COMMANDS[command]
    parser = configparser.ConfigParser(interpolation=None, default_section="\0none")
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], line=getattr(exc, "lineno", None)) from exc
    for section in parser.sections():
        if section not in COMMANDS and section not in IGNORED_SECTIONS:
            raise ConfigError(f"unknown section [{section}]", line=_section_line(text, section), key=section)
    values = {}
    if parser.has_section(command):
        known = {f.name: f for f in fields(cls)}
        for key, raw in parser.items(command):
            line = _key_line(text, command, key)
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{command}]", line=line, key=key)
            kind = known[key].type if isinstance(known[key].type, str) else known[key].type.__name__
            try:
                values[key] = _PARSERS[kind](raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line=line, key=key) from exc
    return cls(**values)


def load_config(path: str | Path | None, command: str):
    if path is None:
        return COMMANDS[command]()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, command)


def to_ini_section(command: str, config) -> list[str]:
    lines = [f"[{command}]"]
    for f in fields(config):
        lines.append(f"{f.name} = {format_value(getattr(config, f.name))}")
    return lines


def with_overrides(config, **kw):
    """Copy of ``config`` with those keyword values that are not None."""
    known = {f.name for f in fields(config)}
    return dataclasses.replace(config, **{k: v for k, v in kw.items() if v is not None and k in known})
