"""Three-spin antiferromagnetic Ising triangle: thermal amplitudes and (h, T) scans.

``H = J (Z1 Z2 + Z2 Z3 + Z1 Z3) + h (Z1 + Z2 + Z3)`` with k_B = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core import QuantumState, embed, pauli, shannon_entropy

N_SPINS = 3


@dataclass(frozen=True)
class IsingParams:
    J: float = 1.0
    h: float = 0.0
    T: float = 1.0

    def __post_init__(self):
        if not self.J > 0:
            raise ValueError("J must be positive (antiferromagnetic)")
        if not self.T > 0:
            raise ValueError("T must be positive")


def ising_hamiltonian(J: float, h: float) -> np.ndarray:
    Z = [embed(pauli("Z"), k, N_SPINS) for k in range(N_SPINS)]
    H = J * (Z[0] @ Z[1] + Z[1] @ Z[2] + Z[0] @ Z[2]) + h * (Z[0] + Z[1] + Z[2])
    return H.real


def magnetization_operator() -> np.ndarray:
    return sum(embed(pauli("Z"), k, N_SPINS) for k in range(N_SPINS)).real


def thermal_probabilities(J: float, h: float, T: float) -> np.ndarray:
    """Boltzmann weights of the 8 computational-basis configurations (the Hamiltonian is diagonal)."""
    E = np.diag(ising_hamiltonian(J, h))
    w = np.exp(-(E - E.min()) / T)
    return w / w.sum()


def ising_thermal_state(p: IsingParams) -> QuantumState:
    """Coherent superposition with amplitudes ``sqrt(exp(-E_k/T) / Z)``."""
    amps = np.sqrt(thermal_probabilities(p.J, p.h, p.T))
    return QuantumState.pure(amps / np.linalg.norm(amps))


@dataclass(frozen=True)
class IsingScan:
    h: np.ndarray
    T: np.ndarray
    magnetization: np.ndarray  # (len(h), len(T))
    entropy: np.ndarray  # nats, ensemble entropy

    def rows(self, which: str):
        grid = self.magnetization if which == "M" else self.entropy
        for i, h in enumerate(self.h):
            for k, T in enumerate(self.T):
                yield h, T, grid[i, k]


def ising_scan(J: float, h_grid, T_grid) -> IsingScan:
    """Magnetisation and ensemble entropy over an (h, T) grid.

    The magnetisation is ``<psi_beta| Z1 + Z2 + Z3 |psi_beta>``.  The entropy is
    that of the thermal ensemble (the basis probabilities); the coherent state
    itself is pure.
    """
    h_grid = np.atleast_1d(np.asarray(h_grid, dtype=float))
    T_grid = np.atleast_1d(np.asarray(T_grid, dtype=float))
    if h_grid.size == 0 or T_grid.size == 0:
        raise ValueError("grids must be nonempty")
    mz = np.diag(magnetization_operator())
    M = np.empty((h_grid.size, T_grid.size))
    S = np.empty_like(M)
    for i, h in enumerate(h_grid):
        for k, T in enumerate(T_grid):
            psi = ising_thermal_state(IsingParams(J, h, T)).data
            prob = np.abs(psi) ** 2
            M[i, k] = float(prob @ mz)
            S[i, k] = shannon_entropy(prob)
    return IsingScan(h_grid, T_grid, M, S)


def default_grids(J: float = 1.0, n_h: int = 81, n_T: int = 40):
    """``h`` in [-4J, 4J] and ``T`` in (0, 2J]."""
    h = np.linspace(-4 * J, 4 * J, n_h)
    T = np.linspace(2 * J / n_T, 2 * J, n_T)
    return h, T


GROUND_ENTROPY_H0 = math.log(6)
