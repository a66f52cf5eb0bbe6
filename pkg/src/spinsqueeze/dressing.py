"""Differential AC Stark shift of |F=1, m=0> under pi-polarized F=1 -> F=2 dressing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# CODATA 2018 (exact SI definitions)
PLANCK = 6.62607015e-34  # J s
HBAR = PLANCK / (2 * np.pi)
BOLTZMANN = 1.380649e-23  # J / K

# squared Clebsch-Gordan weights for pi transitions F=1, m -> F=2, m
CG2_M0 = 2.0 / 3.0
CG2_M1 = 1.0 / 2.0


@dataclass(frozen=True)
class DressingParams:
    """Angular frequencies in rad/s; Omega is the Rabi frequency on the m = +-1 lines."""

    rabi_frequency: float
    detuning: float
    cg2_shifted: float = CG2_M0
    cg2_reference: float = CG2_M1

    def __post_init__(self):
        if self.detuning == 0:
            raise ValueError("detuning must be nonzero")
        if abs(self.rabi_frequency / self.detuning) >= 0.5:
            raise ValueError("|Omega/delta| must be < 0.5 for the perturbative shift")

    @classmethod
    def from_mhz(cls, rabi_mhz: float, detuning_mhz: float) -> "DressingParams":
        return cls(2 * np.pi * rabi_mhz * 1e6, 2 * np.pi * detuning_mhz * 1e6)


@dataclass(frozen=True)
class DressingShift:
    joules: float

    @property
    def nanokelvin(self) -> float:
        return self.joules / BOLTZMANN * 1e9

    @property
    def hertz(self) -> float:
        return self.joules / PLANCK


def dressing_shift(params: DressingParams) -> DressingShift:
    """Energy by which m = 0 rises relative to m = +-1.

    Each level shifts by hbar Omega_m^2 / (4 delta) with Omega_m^2 scaling as
    the squared Clebsch-Gordan weight of its transition.
    """
    ratio = params.cg2_shifted / params.cg2_reference
    e = HBAR * params.rabi_frequency**2 / (4 * params.detuning) * (ratio - 1.0)
    return DressingShift(float(e))
