"""Digital quantum-simulation demos, each with a classical cross-check."""
from .adiabatic import AdiabaticResult, adiabatic_evolve
from .cooling import cooling_bound
from .fano_anderson import (
    FanoAndersonParams,
    fano_anderson_g,
    fano_anderson_hamiltonian,
    fano_anderson_spectrum,
)
from .ising import IsingParams, ising_scan, ising_thermal_state
from .lattice_gas import BurgersSetup, LatticeGasState, burgers_lattice_gas, burgers_reference

__all__ = [
    "AdiabaticResult",
    "BurgersSetup",
    "FanoAndersonParams",
    "IsingParams",
    "LatticeGasState",
    "adiabatic_evolve",
    "burgers_lattice_gas",
    "burgers_reference",
    "cooling_bound",
    "fano_anderson_g",
    "fano_anderson_hamiltonian",
    "fano_anderson_spectrum",
    "ising_scan",
    "ising_thermal_state",
]
