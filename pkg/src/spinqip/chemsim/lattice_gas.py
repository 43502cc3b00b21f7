"""Two-velocity quantum lattice gas for the viscous Burgers equation.

Each node holds two qubits: qubit 0 the right-moving occupancy ``f1``, qubit 1
the left-moving ``f2``.  One time step is

1. encode every node as the product state ``(sqrt(1-f1)|0> + sqrt(f1)|1>) x (same for f2)``;
2. apply the collision unitary to all nodes at once;
3. read the occupancies ``<n_a>`` back and stream ``f1`` one node right, ``f2`` one node left.

The collision is a real rotation by ``theta`` in the one-particle subspace
``{|01>, |10>}`` and leaves ``|00>`` and ``|11>`` alone, so it conserves the
particle number per node exactly.  On the measured occupancies it acts as

    f1' = f1 - sin^2(theta) (f1 - f2) + sin(2 theta) sqrt(f1 f2 (1 - f1)(1 - f2))
    f2' = f2 + sin^2(theta) (f1 - f2) - sin(2 theta) sqrt(f1 f2 (1 - f1)(1 - f2))

With ``rho = f1 + f2`` the current ``j = f1 - f2`` relaxes toward an
equilibrium ``F(rho) ~ cot(theta) rho (1 - rho/2)``, so ``u = cot(theta) (1 - rho)``
is advected by itself: ``u_t + u u_x = nu u_xx`` in lattice units.  Near
``rho = 1`` the collision multiplies current deviations by
``lam = cos(2 theta) - sin(2 theta) F(1)``, giving ``nu = (1 + lam) / (2 (1 - lam))``.
The viscosity drifts with ``rho``, so the match to Burgers degrades as
``U0 / cot(theta)`` grows.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

log = logging.getLogger(__name__)

OCC_ATOL = 1e-12


def collision_unitary(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    U = np.eye(4)
    # basis |n1 n2>: index 1 = |01> (left mover), index 2 = |10> (right mover)
    U[1, 1], U[1, 2] = c, -s
    U[2, 1], U[2, 2] = s, c
    return U


def relaxation_factor(theta: float) -> float:
    """Factor applied by one collision to a small current deviation at ``rho = 1``."""
    return math.cos(2 * theta) - math.sin(2 * theta) * float(equilibrium_current(1.0, theta))


def viscosity_for_theta(theta: float) -> float:
    lam = relaxation_factor(theta)
    return 0.5 * (1 + lam) / (1 - lam)


def theta_for_viscosity(nu: float) -> float:
    if not nu > 0:
        raise ValueError("viscosity must be positive")
    # nu runs from 0 (theta -> pi/2) upward as theta decreases
    return brentq(lambda th: viscosity_for_theta(th) - nu, 1e-6, math.pi / 2 - 1e-9)


@dataclass(frozen=True)
class LatticeGasState:
    f1: np.ndarray
    f2: np.ndarray
    theta: float

    def __post_init__(self):
        f1 = np.array(self.f1, dtype=float)
        f2 = np.array(self.f2, dtype=float)
        if f1.shape != f2.shape or f1.ndim != 1 or f1.size < 2:
            raise ValueError("f1 and f2 must be equal-length 1-D arrays with >= 2 nodes")
        for name, f in (("f1", f1), ("f2", f2)):
            if np.any(f < -OCC_ATOL) or np.any(f > 1 + OCC_ATOL):
                raise ValueError(f"{name} occupancy outside [0, 1]; parameters are unstable")
        f1.setflags(write=False)
        f2.setflags(write=False)
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "f2", f2)

    @property
    def n_nodes(self) -> int:
        return self.f1.size

    @property
    def nu(self) -> float:
        return viscosity_for_theta(self.theta)

    def density(self) -> np.ndarray:
        return self.f1 + self.f2

    def velocity(self) -> np.ndarray:
        return (1.0 - self.density()) / math.tan(self.theta)

    @classmethod
    def from_velocity(cls, u, theta: float, gradient_correction: bool = True) -> "LatticeGasState":
        """Occupancies reproducing the velocity field ``u``.

        The current is set to its equilibrium value plus, by default, the
        first-order non-equilibrium part ``-tau (1 - u^2) d rho/dx`` with
        ``tau = 1 / (1 - lam)``; without it the start excites a slowly decaying
        oscillation of the current.
        """
        u = np.asarray(u, dtype=float)
        rho = 1.0 - u * math.tan(theta)
        j = equilibrium_current(rho, theta)
        if gradient_correction:
            tau = 1.0 / (1.0 - relaxation_factor(theta))
            drho = 0.5 * (np.roll(rho, -1) - np.roll(rho, 1))
            j = j - tau * (1 - u**2) * drho
        return cls(0.5 * (rho + j), 0.5 * (rho - j), theta)


def equilibrium_current(rho, theta: float) -> np.ndarray:
    """Current ``j = f1 - f2`` left unchanged by one collision at density ``rho``.

    Solves ``j^2 = c (rho^2 - j^2)((2 - rho)^2 - j^2)`` with ``c = cot(theta)^2 / 4``
    for the smaller root; the current is non-negative.
    """
    rho = np.asarray(rho, dtype=float)
    c = 0.25 / math.tan(theta) ** 2
    a2, b2 = rho**2, (2 - rho) ** 2
    B = 1.0 + c * (a2 + b2)
    disc = np.sqrt(np.maximum(B * B - 4 * c * c * a2 * b2, 0.0))
    s = (B - disc) / (2 * c)
    return np.sqrt(np.maximum(s, 0.0))


def collide_classical(f1: np.ndarray, f2: np.ndarray, theta: float):
    """Closed-form occupancies after one collision (oracle for the state-vector path)."""
    q = np.sqrt(np.clip(f1 * f2 * (1 - f1) * (1 - f2), 0.0, None))
    s2 = math.sin(theta) ** 2
    s2t = math.sin(2 * theta)
    return f1 - s2 * (f1 - f2) + s2t * q, f2 + s2 * (f1 - f2) - s2t * q


def _encode(f: np.ndarray) -> np.ndarray:
    return np.stack([np.sqrt(np.clip(1 - f, 0, None)), np.sqrt(np.clip(f, 0, None))], axis=-1)


def collide_quantum(f1: np.ndarray, f2: np.ndarray, U: np.ndarray):
    """Encode, collide and measure every node; returns ``(<n1>, <n2>)``."""
    psi = np.einsum("la,lb->lab", _encode(f1), _encode(f2)).reshape(-1, 4)
    psi = psi @ U.T
    prob = (np.abs(psi) ** 2).reshape(-1, 2, 2)
    return prob[:, 1, :].sum(axis=1), prob[:, :, 1].sum(axis=1)


@dataclass(frozen=True)
class BurgersRun:
    times: np.ndarray  # step indices
    u: np.ndarray  # (steps + 1, nodes)
    mass: np.ndarray  # total occupancy after each step
    max_mass_drift: float
    clamped: int  # count of readouts clamped into [0, 1]
    nu: float


def burgers_lattice_gas(init: LatticeGasState, steps: int, readout_noise: float = 0.0,
                        rng: Optional[np.random.Generator] = None) -> BurgersRun:
    """Run ``steps`` collide-measure-stream cycles and record ``u`` after each.

    ``readout_noise`` adds Gaussian noise of that standard deviation to each
    measured occupancy (a stand-in for finite-sample readout); values pushed out
    of [0, 1] are clamped and counted.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if readout_noise and rng is None:
        raise ValueError("readout noise needs an explicit random generator")
    U = collision_unitary(init.theta)
    f1, f2 = np.array(init.f1), np.array(init.f2)
    cot = 1.0 / math.tan(init.theta)
    us = [(1 - f1 - f2) * cot]
    mass = [float(np.sum(f1 + f2))]
    drift = 0.0
    clamped = 0
    for _ in range(steps):
        before = float(np.sum(f1 + f2))
        f1, f2 = collide_quantum(f1, f2, U)
        if readout_noise:
            f1 = f1 + readout_noise * rng.standard_normal(f1.shape)
            f2 = f2 + readout_noise * rng.standard_normal(f2.shape)
            bad = int(np.sum((f1 < 0) | (f1 > 1)) + np.sum((f2 < 0) | (f2 > 1)))
            if bad:
                log.warning("clamped %d occupancies into [0, 1]", bad)
                clamped += bad
            f1, f2 = np.clip(f1, 0, 1), np.clip(f2, 0, 1)
        else:
            drift = max(drift, abs(float(np.sum(f1 + f2)) - before))
        f1, f2 = np.roll(f1, 1), np.roll(f2, -1)
        us.append((1 - f1 - f2) * cot)
        mass.append(float(np.sum(f1 + f2)))
    return BurgersRun(np.arange(steps + 1), np.array(us), np.array(mass), drift, clamped,
                      viscosity_for_theta(init.theta))


def burgers_reference(u0_coeffs, length: float, nu: float, x: np.ndarray, times,
                      n_fine: int = 4096, mean: float = 0.0) -> np.ndarray:
    """Exact periodic Burgers solution via the Cole-Hopf transform.

    The initial field is ``mean + sum_k a_k sin(2 pi k x / length)`` with
    ``u0_coeffs = [a_1, a_2, ...]``.  ``mean`` is handled by a Galilean shift.
    Returns ``u`` with shape ``(len(times), len(x))``.
    """
    xf = np.arange(n_fine) * length / n_fine
    # phi0 = exp(-(1 / 2 nu) * integral of (u0 - mean))
    integral = np.zeros(n_fine)
    for k, a in enumerate(u0_coeffs, start=1):
        kk = 2 * np.pi * k / length
        integral += -a / kk * (np.cos(kk * xf) - 1.0)
    expo = -integral / (2 * nu)
    phi0 = np.exp(expo - expo.max())
    phi_hat = np.fft.fft(phi0)
    kx = 2 * np.pi * np.fft.fftfreq(n_fine, d=length / n_fine)
    out = np.empty((len(times), len(x)))
    for i, t in enumerate(times):
        decay = np.exp(-nu * kx**2 * t)
        x_shift = np.asarray(x) - mean * t
        # evaluate phi and phi_x at arbitrary points by direct Fourier synthesis
        phase = np.exp(1j * np.outer(x_shift, kx))
        coef = phi_hat * decay / n_fine
        phi = (phase @ coef).real
        dphi = (phase @ (1j * kx * coef)).real
        out[i] = mean - 2 * nu * dphi / phi
    return out


def relative_l2(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@dataclass(frozen=True)
class BurgersSetup:
    n_nodes: int = 16
    u0: float = 0.2
    cot_theta: float = 0.8
    mean: float = 0.0
    x: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "x", np.arange(self.n_nodes, dtype=float))

    @property
    def theta(self) -> float:
        return math.atan2(1.0, self.cot_theta)

    @property
    def shock_time(self) -> float:
        """Steps until the inviscid profile would first develop a vertical front."""
        return self.n_nodes / (2 * math.pi * self.u0)

    def initial_velocity(self) -> np.ndarray:
        return self.mean + self.u0 * np.sin(2 * np.pi * self.x / self.n_nodes)

    def initial_state(self) -> LatticeGasState:
        return LatticeGasState.from_velocity(self.initial_velocity(), self.theta)
