"""Position-grid wavefunctions on qubit registers and the Fourier split-operator step.

Each degree of freedom uses ``m`` qubits, i.e. ``N = 2**m`` grid points
``x_j = x_min + j * dx`` with ``dx = (x_max - x_min) / N`` (periodic window).
Momentum eigenvalues follow signed FFT ordering, ``p_k = 2 pi k / (N dx)`` with
``k = 0, 1, ..., N/2 - 1, -N/2, ..., -1``.  Units are dimensionless (hbar = 1).

The quantum Fourier transform has entries ``omega^(jk) / sqrt(N)`` with
``omega = exp(2 pi i / N)``; on arrays this is ``sqrt(N) * ifft``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import MAX_SPINS, DimensionCapError

NORM_ATOL = 1e-10


def qft(m: int) -> np.ndarray:
    if m < 1:
        raise ValueError("qft needs m >= 1")
    N = 2**m
    jk = np.outer(np.arange(N), np.arange(N))
    return np.exp(2j * np.pi * jk / N) / math.sqrt(N)


def apply_qft(psi: np.ndarray, axis: int = 0) -> np.ndarray:
    N = psi.shape[axis]
    return np.fft.ifft(psi, axis=axis, norm="ortho") if N else psi


def apply_qft_dagger(psi: np.ndarray, axis: int = 0) -> np.ndarray:
    return np.fft.fft(psi, axis=axis, norm="ortho")


@dataclass(frozen=True)
class GridRegister:
    m: int
    n_dof: int
    x_min: float
    x_max: float
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.m < 1 or self.n_dof < 1:
            raise ValueError("m and n_dof must be >= 1")
        if self.m * self.n_dof > 2 * MAX_SPINS:
            raise DimensionCapError(f"dimension cap exceeded: {self.m * self.n_dof} grid qubits")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != 2 ** (self.m * self.n_dof):
            raise ValueError(f"register needs {2 ** (self.m * self.n_dof)} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"register norm {norm!r} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def N(self) -> int:
        return 2**self.m

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.N

    def positions(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.N)

    def momenta(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.N, d=self.dx)

    def tensor(self) -> np.ndarray:
        """Amplitudes as an ``(N,) * n_dof`` array, degree of freedom 0 first."""
        return self.amplitudes.reshape((self.N,) * self.n_dof)

    def with_amplitudes(self, amps) -> "GridRegister":
        return GridRegister(self.m, self.n_dof, self.x_min, self.x_max, np.asarray(amps).ravel())

    @classmethod
    def gaussian(cls, m: int, x_min: float, x_max: float, centers, widths, momenta=None) -> "GridRegister":
        """Normalised product of Gaussians ``exp(-(x-c)^2 / (2 w^2) + i p x)``."""
        centers = np.atleast_1d(centers).astype(float)
        widths = np.broadcast_to(np.atleast_1d(widths).astype(float), centers.shape)
        momenta = np.zeros_like(centers) if momenta is None else np.broadcast_to(
            np.atleast_1d(momenta).astype(float), centers.shape)
        N = 2**m
        x = x_min + (x_max - x_min) / N * np.arange(N)
        psi = np.ones(1, dtype=complex)
        for c, w, p in zip(centers, widths, momenta):
            psi = np.kron(psi, np.exp(-((x - c) ** 2) / (2 * w * w) + 1j * p * x))
        return cls(m, len(centers), x_min, x_max, psi / np.linalg.norm(psi))

    def mean_position(self, dof: int = 0) -> float:
        prob = np.abs(self.tensor()) ** 2
        marginal = prob.sum(axis=tuple(a for a in range(self.n_dof) if a != dof))
        return float(marginal @ self.positions())

    def mean_momentum(self, dof: int = 0) -> float:
        phi = np.fft.fft(self.tensor(), axis=dof, norm="ortho")
        prob = np.abs(phi) ** 2
        marginal = prob.sum(axis=tuple(a for a in range(self.n_dof) if a != dof))
        return float(marginal @ self.momenta())


def _potential_grid(reg: GridRegister, V: Callable) -> np.ndarray:
    axes = np.meshgrid(*([reg.positions()] * reg.n_dof), indexing="ij")
    vals = np.asarray(V(*axes), dtype=float)
    return np.broadcast_to(vals, (reg.N,) * reg.n_dof)


def _kinetic_phase(reg: GridRegister, masses, dt: float) -> list[np.ndarray]:
    masses = np.broadcast_to(np.atleast_1d(masses).astype(float), (reg.n_dof,))
    p2 = reg.momenta() ** 2
    return [np.exp(-0.5j * p2 * dt / mass) for mass in masses]


def _step(psi: np.ndarray, v_phase: np.ndarray, k_phases: list[np.ndarray]) -> np.ndarray:
    psi = psi * v_phase
    for axis, kp in enumerate(k_phases):
        shape = [1] * psi.ndim
        shape[axis] = -1
        # the QFT basis index k carries momentum -p_k; only p^2 enters, so the sign is moot
        psi = apply_qft(psi, axis)
        psi = psi * kp.reshape(shape)
        psi = apply_qft_dagger(psi, axis)
    return psi


def split_operator_step(reg: GridRegister, V: Callable, mass: float, dt: float) -> GridRegister:
    """One first-order step: potential phase, QFT, kinetic phase, inverse QFT."""
    return multi_dof_evolve(reg, V, mass, dt, 1)


def multi_dof_evolve(reg: GridRegister, V: Callable, masses, dt: float, steps: int) -> GridRegister:
    """``steps`` split-operator steps with one QFT pair per degree of freedom.

    ``V`` receives one coordinate array per degree of freedom (``meshgrid``
    ``ij`` layout) and returns the joint potential.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    v_phase = np.exp(-1j * _potential_grid(reg, V) * dt)
    k_phases = _kinetic_phase(reg, masses, dt)
    psi = np.array(reg.tensor())
    for _ in range(steps):
        psi = _step(psi, v_phase, k_phases)
    return reg.with_amplitudes(psi)


def dense_hamiltonian(reg: GridRegister, V: Callable, masses) -> np.ndarray:
    """Grid Hamiltonian as a dense matrix (kinetic term diagonal in the Fourier basis)."""
    N, n = reg.N, reg.n_dof
    masses = np.broadcast_to(np.atleast_1d(masses).astype(float), (n,))
    F = qft(reg.m)
    T1 = [F.conj().T @ np.diag(reg.momenta() ** 2 / (2 * mass)) @ F for mass in masses]
    H = np.diag(_potential_grid(reg, V).ravel()).astype(complex)
    for d in range(n):
        term = np.ones((1, 1))
        for a in range(n):
            term = np.kron(term, T1[d] if a == d else np.eye(N))
        H += term
    return H
