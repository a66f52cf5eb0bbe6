"""Sector-ensemble checkpoints.

``sectors.bin`` is a sequence of little-endian blocks, one per sector::

    uint32  block length in bytes (excluding this field)
    int32   N_a
    uint32  n_points
    complex128  sector amplitude c_k
    complex64[n_points]  u_a   (u = sqrt(4 pi dr) r phi)
    complex64[n_points]  u_b

``checkpoint.ini`` holds the parameters, grid, window and time.  The
amplitude keeps double precision because the sector phases carry the
squeezing; single precision is enough for the mode shapes.
"""

from __future__ import annotations

import configparser
import struct
from pathlib import Path

import numpy as np

from .gpe import CondensateParams, RadialGrid
from .sectors import SectorEnsemble

_HEAD = struct.Struct("<iI")
_LEN = struct.Struct("<I")


def save_checkpoint(directory: str | Path, ens: SectorEnsemble, params: CondensateParams) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    n = ens.grid.n_points
    with open(directory / "sectors.bin", "wb") as fh:
        for i, k in enumerate(ens.k):
            body = (
                _HEAD.pack(int(k), n)
                + np.asarray(ens.amplitudes[i], dtype="<c16").tobytes()
                + ens.ua[i].astype("<c8").tobytes()
                + ens.ub[i].astype("<c8").tobytes()
            )
            fh.write(_LEN.pack(len(body)) + body)
    meta = configparser.ConfigParser(interpolation=None)
    meta["params"] = {
        "a_aa": repr(params.a_aa),
        "a_bb": repr(params.a_bb),
        "a_ab": repr(params.a_ab),
        "n_atoms": str(params.n_atoms),
    }
    meta["grid"] = {"n_points": str(n), "r_max": repr(ens.grid.r_max)}
    meta["window"] = {"k_min": str(ens.k_min), "k_max": str(ens.k_max)}
    meta["state"] = {"time": repr(ens.time), "format": "sectors.bin v1 little-endian"}
    with open(directory / "checkpoint.ini", "w", encoding="utf-8", newline="\n") as fh:
        meta.write(fh)
    return directory


def load_checkpoint(directory: str | Path) -> tuple[SectorEnsemble, CondensateParams]:
    directory = Path(directory)
    meta = configparser.ConfigParser(interpolation=None)
    meta.read(directory / "checkpoint.ini", encoding="utf-8")
    p = meta["params"]
    params = CondensateParams(float(p["a_aa"]), float(p["a_bb"]), float(p["a_ab"]), int(p["n_atoms"]))
    grid = RadialGrid(int(meta["grid"]["n_points"]), float(meta["grid"]["r_max"]))
    k_min, k_max = int(meta["window"]["k_min"]), int(meta["window"]["k_max"])
    size = k_max - k_min + 1
    data = (directory / "sectors.bin").read_bytes()
    amps = np.empty(size, complex)
    ua = np.empty((size, grid.n_points), complex)
    ub = np.empty_like(ua)
    pos = 0
    for i in range(size):
        (length,) = _LEN.unpack_from(data, pos)
        pos += _LEN.size
        k, n = _HEAD.unpack_from(data, pos)
        if k != k_min + i or n != grid.n_points:
            raise ValueError(f"checkpoint block {i}: sector {k}, {n} points does not match manifest")
        off = pos + _HEAD.size
        amps[i] = np.frombuffer(data, "<c16", 1, off)[0]
        off += 16
        ua[i] = np.frombuffer(data, "<c8", n, off)
        ub[i] = np.frombuffer(data, "<c8", n, off + 8 * n)
        pos += length
    if pos != len(data):
        raise ValueError("trailing bytes in sectors.bin")
    ens = SectorEnsemble(params.n_atoms, k_min, k_max, amps, ua, ub, grid, float(meta["state"]["time"]))
    return ens, params
