"""Exact and Trotterized propagation plus a phenomenological T1/T2* channel."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import QuantumState, _require_hermitian, propagator
from .noise import CoherenceCurve, NoiseModel, dephasing_trajectories  # noqa: F401  (re-export)


def evolve(state: QuantumState, H: np.ndarray, t: float) -> QuantumState:
    if H.shape[0] != state.dim:
        raise ValueError(f"dimension mismatch: H is {H.shape[0]}, state is {state.dim}")
    U = propagator(H, t)
    if state.is_pure_vector:
        return QuantumState.pure(U @ state.data)
    return QuantumState.density(U @ state.data @ U.conj().T, state.pseudopure_alpha)


def trotter_evolve(terms, t: float, n_steps: int) -> np.ndarray:
    """First-order product formula ``[prod_k exp(-i H_k t/n)]^n``.

    The first term in ``terms`` acts first within each step.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("trotter_evolve needs at least one term")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    dim = terms[0].shape[0]
    step = np.eye(dim, dtype=complex)
    for H in terms:
        if H.shape != (dim, dim):
            raise ValueError("all terms must share one dimension")
        step = propagator(_require_hermitian(H), t / n_steps) @ step
    return np.linalg.matrix_power(step, n_steps)


@dataclass(frozen=True)
class RelaxationParams:
    T1: tuple[float, ...]
    T2_star: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "T1", tuple(float(x) for x in np.atleast_1d(self.T1)))
        object.__setattr__(self, "T2_star", tuple(float(x) for x in np.atleast_1d(self.T2_star)))
        if len(self.T1) != len(self.T2_star):
            raise ValueError("T1 and T2_star need one entry per spin")
        for t1, t2 in zip(self.T1, self.T2_star):
            if not (t1 > 0 and t2 > 0):
                raise ValueError("relaxation times must be positive")
            if t2 > 2 * t1 * (1 + 1e-12):
                raise ValueError(f"T2* = {t2} exceeds 2*T1 = {2 * t1}")

    @property
    def n(self) -> int:
        return len(self.T1)


def apply_relaxation(state: QuantumState, params: RelaxationParams, t: float) -> QuantumState:
    """Independent per-spin decay toward the maximally mixed state.

    Populations of each spin relax as ``(p0 - p1) -> (p0 - p1) exp(-t/T1)``,
    coherences shrink by ``exp(-t/T2*)``.
    """
    if state.is_pure_vector:
        raise TypeError("apply_relaxation needs a density matrix; call to_density() first")
    if t < 0:
        raise ValueError("t must be non-negative")
    n = params.n
    if state.dim != 2**n:
        raise ValueError(f"state dimension {state.dim} does not match {n} spins")
    rho = state.data.reshape((2,) * (2 * n)).copy()
    for k in range(n):
        e1 = math.exp(-t / params.T1[k])
        e2 = math.exp(-t / params.T2_star[k])
        r = np.moveaxis(rho, (k, n + k), (0, 1))
        mean = 0.5 * (r[0, 0] + r[1, 1])
        half_diff = 0.5 * (r[0, 0] - r[1, 1]) * e1
        out = np.empty_like(r)
        out[0, 0] = mean + half_diff
        out[1, 1] = mean - half_diff
        out[0, 1] = r[0, 1] * e2
        out[1, 0] = r[1, 0] * e2
        rho = np.moveaxis(out, (0, 1), (k, n + k))
    rho = rho.reshape(state.dim, state.dim)
    return QuantumState.density(0.5 * (rho + rho.conj().T))
