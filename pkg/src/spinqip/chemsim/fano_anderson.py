"""Fano-Anderson impurity model: one conduction mode hybridised with one impurity level.

Qubit 0 holds the conduction mode, qubit 1 the impurity, and (for the circuit
path) qubit 2 the ancilla.  Occupied orbitals are ``|1>``, so the number operator
is ``(I - Z)/2`` and nearest-neighbour hopping maps to ``(XX + YY)/2`` under the
Jordan-Wigner transformation (no string operator between adjacent qubits).

The filled Fermi sea of this two-orbital model is the empty register ``|00>``;
the correlation function is

    G(t) = <00| exp(iHt) X_imp exp(-iHt) X_imp |00>,

which equals ``exp(-i eps t)`` when ``V = 0``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..core import QuantumState, embed, expectation, pauli, propagator

MODE, IMPURITY, ANCILLA = 0, 1, 2


@dataclass(frozen=True)
class FanoAndersonParams:
    eps_k: float
    eps: float
    V: float

    def __post_init__(self):
        for name in ("eps_k", "eps", "V"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def fano_anderson_hamiltonian(p: FanoAndersonParams, n_modes: int = 1) -> np.ndarray:
    if n_modes != 1:
        raise NotImplementedError("only a single conduction mode is supported")
    I2 = np.eye(4)
    Z0, Z1 = embed(pauli("Z"), MODE, 2), embed(pauli("Z"), IMPURITY, 2)
    hop = embed(pauli("X"), MODE, 2) @ embed(pauli("X"), IMPURITY, 2) \
        + embed(pauli("Y"), MODE, 2) @ embed(pauli("Y"), IMPURITY, 2)
    return p.eps_k * (I2 - Z0) / 2 + p.eps * (I2 - Z1) / 2 + p.V * hop / 2


def number_operator() -> np.ndarray:
    return (2 * np.eye(4) - embed(pauli("Z"), MODE, 2) - embed(pauli("Z"), IMPURITY, 2)) / 2


def single_excitation_energies(p: FanoAndersonParams) -> np.ndarray:
    """Closed-form eigenvalues of the one-particle block, ascending."""
    mean = 0.5 * (p.eps_k + p.eps)
    half = 0.5 * math.sqrt((p.eps_k - p.eps) ** 2 + 4 * p.V**2)
    return np.array([mean - half, mean + half])


def _g_matrix_element(H: np.ndarray, times) -> np.ndarray:
    X_imp = embed(pauli("X"), IMPURITY, 2)
    fs = np.zeros(4, dtype=complex)
    fs[0] = 1.0
    evals, V = np.linalg.eigh(H)
    out = np.empty(len(times), dtype=complex)
    for k, t in enumerate(times):
        U = (V * np.exp(-1j * evals * t)) @ V.conj().T
        out[k] = fs.conj() @ U.conj().T @ X_imp @ U @ X_imp @ fs
    return out


def _controlled(op: np.ndarray) -> np.ndarray:
    """Ancilla-controlled version of a 2-qubit register operator (ancilla is qubit 2)."""
    P0 = np.diag([1.0, 0.0])
    P1 = np.diag([0.0, 1.0])
    return np.kron(np.eye(4), P0) + np.kron(op, P1)


def _g_circuit(H: np.ndarray, times) -> np.ndarray:
    X_imp = embed(pauli("X"), IMPURITY, 2)
    cx = _controlled(X_imp)
    plus = np.array([1.0, 1.0]) / math.sqrt(2)
    psi0 = np.kron(np.array([1.0, 0.0, 0.0, 0.0]), plus).astype(complex)
    psi0 = cx @ psi0
    Xa = embed(pauli("X"), ANCILLA, 3)
    Ya = embed(pauli("Y"), ANCILLA, 3)
    out = np.empty(len(times), dtype=complex)
    for k, t in enumerate(times):
        U = np.kron(propagator(H, t), np.eye(2))
        state = QuantumState.pure(cx @ U @ psi0)
        out[k] = expectation(Xa, state) + 1j * expectation(Ya, state)
    return out


class GSeries(NamedTuple):
    times: np.ndarray
    circuit: np.ndarray
    matrix_element: np.ndarray

    @property
    def max_delta(self) -> float:
        return float(np.max(np.abs(self.circuit - self.matrix_element), initial=0.0))


def fano_anderson_g(p: FanoAndersonParams, times) -> GSeries:
    """G(t) from the ancilla-interferometry circuit and from the direct matrix element."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    H = fano_anderson_hamiltonian(p)
    return GSeries(times, _g_circuit(H, times), _g_matrix_element(H, times))


class Spectrum(NamedTuple):
    peaks: np.ndarray  # rad/s, ascending
    bin_width: float  # rad/s
    omega: np.ndarray
    power: np.ndarray


def fano_anderson_spectrum(p: FanoAndersonParams, t_max: float, n_samples: int,
                           rel_height: float = 0.05) -> Spectrum:
    """Peak frequencies of ``sum_k w_k G(t_k) exp(+i omega t_k)`` (Hann window ``w``).

    Samples are ``t_k = k t_max / n_samples``; the frequency bin is ``2 pi / t_max``.
    Peaks are local maxima whose magnitude exceeds ``rel_height`` of the largest.
    """
    if n_samples < 4 or not t_max > 0:
        raise ValueError("need t_max > 0 and at least 4 samples")
    dt = t_max / n_samples
    nyquist = math.pi / dt
    energies = single_excitation_energies(p)
    if np.max(np.abs(energies)) >= nyquist:
        warnings.warn(
            f"eigenfrequency {np.max(np.abs(energies)):.4g} rad/s exceeds the Nyquist limit "
            f"{nyquist:.4g} rad/s; peaks will alias",
            RuntimeWarning,
            stacklevel=2,
        )
    times = dt * np.arange(n_samples)
    g = fano_anderson_g(p, times).circuit
    window = np.hanning(n_samples)
    spec = np.fft.ifft(g * window) * n_samples
    omega = 2 * np.pi * np.fft.fftfreq(n_samples, d=dt)
    order = np.argsort(omega)
    omega, power = omega[order], np.abs(spec[order]) ** 2
    interior = (power[1:-1] > power[:-2]) & (power[1:-1] >= power[2:])
    idx = np.nonzero(interior)[0] + 1
    idx = idx[np.sqrt(power[idx]) >= rel_height * np.sqrt(power.max())]
    return Spectrum(np.sort(omega[idx]), 2 * np.pi / t_max, omega, power)
