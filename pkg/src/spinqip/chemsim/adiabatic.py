"""Linear adiabatic interpolation ``H(s) = (1 - s) H_A + s H_P`` with ``s = t / tau``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import QuantumState, _require_hermitian, embed, pauli, propagator

DEGENERACY_RTOL = 1e-9


def _ground_space(H: np.ndarray):
    evals, V = np.linalg.eigh(H)
    tol = DEGENERACY_RTOL * max(1.0, float(np.max(np.abs(evals))))
    k = int(np.sum(evals - evals[0] <= tol))
    return evals, V[:, :k]


@dataclass(frozen=True)
class AdiabaticResult:
    state: QuantumState
    overlap: float  # population in the ground space of H_P
    min_gap: float  # smallest gap seen at the step midpoints


def adiabatic_evolve(H_A, H_P, tau: float, n_steps: int) -> AdiabaticResult:
    """Start in the ground state of ``H_A`` and integrate piecewise constantly.

    Step ``k`` uses ``H`` at the midpoint ``s = (k + 1/2) / n_steps``.  A
    degenerate ground state of ``H_A`` is rejected because the start is then
    ambiguous.
    """
    H_A = _require_hermitian(H_A, "H_A")
    H_P = _require_hermitian(H_P, "H_P")
    if H_A.shape != H_P.shape:
        raise ValueError(f"dimension mismatch: {H_A.shape} vs {H_P.shape}")
    if tau < 0 or n_steps < 1:
        raise ValueError("need tau >= 0 and n_steps >= 1")
    _, gs_A = _ground_space(H_A)
    if gs_A.shape[1] != 1:
        raise ValueError(f"H_A ground state is {gs_A.shape[1]}-fold degenerate")
    psi = gs_A[:, 0].astype(complex)
    dt = tau / n_steps
    min_gap = np.inf
    for k in range(n_steps):
        s = (k + 0.5) / n_steps
        H = (1 - s) * H_A + s * H_P
        evals = np.linalg.eigvalsh(H)
        min_gap = min(min_gap, float(evals[1] - evals[0])) if len(evals) > 1 else 0.0
        if dt:
            psi = propagator(H, dt) @ psi
    psi = psi / np.linalg.norm(psi)
    _, gs_P = _ground_space(H_P)
    overlap = float(np.sum(np.abs(gs_P.conj().T @ psi) ** 2))
    return AdiabaticResult(QuantumState.pure(psi), min(max(overlap, 0.0), 1.0), min_gap)


def transverse_field(n: int) -> np.ndarray:
    """``-sum_i X_i``, whose ground state is the uniform superposition."""
    return -sum(embed(pauli("X"), i, n) for i in range(n)).real.astype(complex)


def random_ising_problem(n: int, rng) -> np.ndarray:
    """Diagonal problem Hamiltonian with random fields and nearest-neighbour couplings."""
    Z = [embed(pauli("Z"), i, n) for i in range(n)]
    H = sum(rng.normal() * Z[i] for i in range(n))
    for i in range(n - 1):
        H = H + rng.normal() * Z[i] @ Z[i + 1]
    return np.asarray(H, dtype=complex)
