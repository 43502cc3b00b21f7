"""Monte Carlo dephasing of a single spin under classical frequency noise.

The spin precesses as ``H(t) = x(t) Z / 2`` with ``x(t)`` a random frequency shift
(rad/s).  Instantaneous pulses from a :class:`DDSequence` interrupt the free
evolution.  Coherence ``W`` is the projection of the final Bloch vector onto the
noise-free final Bloch vector, averaged over trajectories.

Two stationary Gaussian noise kinds are provided:

``ornstein-uhlenbeck``
    exponential correlation ``sigma^2 exp(-|t|/tau_c)`` (Lorentzian spectrum,
    soft high-frequency roll-off), sampled exactly on a uniform grid and held
    piecewise constant between grid points.
``hard-cutoff``
    flat spectrum up to ``1/tau_c`` and zero above, synthesised from random-phase
    harmonics and integrated exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .io import write_csv
from .sequence import DDSequence

NOISE_KINDS = ("ornstein-uhlenbeck", "hard-cutoff")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "ornstein-uhlenbeck"
    sigma: float = 0.0
    tau_c: float = 1.0
    seed: int = 0
    grid_steps: int = 256
    n_modes: int = 64

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not self.tau_c > 0:
            raise ValueError("tau_c must be positive")
        if self.grid_steps < 1 or self.n_modes < 1:
            raise ValueError("grid_steps and n_modes must be positive")

    def correlation(self, tau) -> np.ndarray:
        """Stationary correlation ``<x(t) x(t + tau)>`` in (rad/s)^2."""
        tau = np.abs(np.asarray(tau, dtype=float))
        if self.kind == "ornstein-uhlenbeck":
            return self.sigma**2 * np.exp(-tau / self.tau_c)
        wc = 1.0 / self.tau_c
        return self.sigma**2 * np.sinc(wc * tau / math.pi)

    def double_integral(self, x) -> np.ndarray:
        """``F(x) = int_0^|x| (|x| - u) C(u) du``, so that ``F'' = C`` and ``F(0) = F'(0) = 0``."""
        x = np.abs(np.asarray(x, dtype=float))
        if self.kind == "ornstein-uhlenbeck":
            tc = self.tau_c
            return self.sigma**2 * (tc * x - tc * tc * -np.expm1(-x / tc))
        wc = 1.0 / self.tau_c
        si, _ = sici(wc * x)
        return self.sigma**2 * (x * si / wc - 2 * np.sin(0.5 * wc * x) ** 2 / wc**2)

    def describe(self) -> dict:
        return {
            "noise_kind": self.kind,
            "sigma_rad_s": self.sigma,
            "tau_c_s": self.tau_c,
            "seed": self.seed,
            "grid_steps": self.grid_steps,
            "n_modes": self.n_modes,
        }


@dataclass(frozen=True)
class CoherenceCurve:
    t: np.ndarray
    W: np.ndarray
    stderr: np.ndarray

    def to_csv(self, path, meta: dict | None = None) -> None:
        write_csv(path, ["t_s", "W", "stderr"], zip(self.t, self.W, self.stderr), meta=meta)


def _ou_integral(rng, n_traj: int, T: float, noise: NoiseModel, times: np.ndarray) -> np.ndarray:
    """Integrated OU frequency at ``times`` (shape ``(n_traj, len(times))``)."""
    M = noise.grid_steps
    dt = T / M
    a = math.exp(-dt / noise.tau_c)
    kick = noise.sigma * math.sqrt(max(0.0, 1.0 - a * a))
    x = np.empty((n_traj, M))
    x[:, 0] = noise.sigma * rng.standard_normal(n_traj)
    xi = rng.standard_normal((n_traj, M - 1)) if M > 1 else None
    for k in range(1, M):
        x[:, k] = a * x[:, k - 1] + kick * xi[:, k - 1]
    cum = np.concatenate([np.zeros((n_traj, 1)), np.cumsum(x * dt, axis=1)], axis=1)
    cell = np.clip(np.floor(times / dt).astype(int), 0, M - 1)
    return cum[:, cell] + x[:, cell] * (times - cell * dt)


def _hard_cutoff_integral(rng, n_traj: int, noise: NoiseModel, times: np.ndarray) -> np.ndarray:
    K = noise.n_modes
    wc = 1.0 / noise.tau_c
    w = wc * rng.random((n_traj, K))
    theta = 2 * math.pi * rng.random((n_traj, K))
    amp = noise.sigma * math.sqrt(2.0 / K)
    X = np.zeros((n_traj, len(times)))
    for m in range(K):
        wm, th = w[:, m:m + 1], theta[:, m:m + 1]
        X += (np.sin(wm * times + th) - np.sin(th)) / wm
    return amp * X


def noise_phases(seq: DDSequence, noise: NoiseModel, n_traj: int, rng) -> np.ndarray:
    """Accumulated phase in each free-evolution period, shape ``(n_traj, pulses + 1)``."""
    T = seq.total_time
    bounds = np.concatenate([[0.0], seq.pulse_times(), [T]])
    bounds = np.clip(bounds, 0.0, T)
    if noise.sigma == 0.0 or T == 0.0:
        return np.zeros((n_traj, len(bounds) - 1))
    if noise.kind == "ornstein-uhlenbeck":
        X = _ou_integral(rng, n_traj, T, noise, bounds)
    else:
        X = _hard_cutoff_integral(rng, n_traj, noise, bounds)
    return np.diff(X, axis=1)


def _final_bloch(psi: np.ndarray) -> np.ndarray:
    a, b = psi[..., 0], psi[..., 1]
    ab = np.conj(a) * b
    return np.stack([2 * ab.real, 2 * ab.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=-1)


def coherence_samples(seq: DDSequence, noise: NoiseModel, n_traj: int, rng) -> np.ndarray:
    """Per-trajectory coherence for one sequence, ``n_traj`` values."""
    phases = noise_phases(seq, noise, n_traj, rng)
    psi = np.tile(np.array([1.0, 1.0], dtype=complex) / math.sqrt(2), (n_traj, 1))
    ideal = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)
    for k in range(phases.shape[1]):
        psi[:, 0] *= np.exp(-0.5j * phases[:, k])
        psi[:, 1] *= np.exp(0.5j * phases[:, k])
        if k < seq.pulse_count:
            U = seq.events[k].unitary
            psi = psi @ U.T
            ideal = U @ ideal
    return _final_bloch(psi) @ _final_bloch(ideal)


def dephasing_trajectories(seq: DDSequence, noise: NoiseModel, n_traj: int,
                           durations=None) -> CoherenceCurve:
    """Ensemble coherence at the end of ``seq`` rescaled to each duration.

    With ``durations=None`` only the sequence's own ``total_time`` is evaluated.
    The noise realisations depend only on ``(noise.seed, duration index)``, so two
    sequences evaluated at the same durations see identical noise paths.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if durations is None:
        durations = [seq.total_time]
    durations = np.asarray(durations, dtype=float)
    W = np.empty(len(durations))
    err = np.empty(len(durations))
    for i, T in enumerate(durations):
        rng = np.random.default_rng([noise.seed, i])
        s = seq if T == seq.total_time else seq.scaled(T)
        w = coherence_samples(s, noise, n_traj, rng)
        W[i] = w.mean()
        err[i] = w.std(ddof=1) / math.sqrt(n_traj) if n_traj > 1 else 0.0
    return CoherenceCurve(durations, W, err)


def phase_variance(seq: DDSequence, correlation, n_grid: int = 2000) -> float:
    """Deterministic phase variance ``int int y(t) y(s) C(t - s)`` on a midpoint grid.

    ``y`` is the +-1 toggling sign imposed by the pulses (pi pulses about in-plane
    axes flip the sign of Z noise).  Used as a Gaussian-noise cross-check:
    ``W = exp(-variance / 2)``.
    """
    T = seq.total_time
    t = (np.arange(n_grid) + 0.5) * T / n_grid
    y = np.ones(n_grid)
    for p, ev in zip(seq.pulse_times(), seq.events):
        if abs(ev.axis[2]) < 1e-12 and abs(abs(ev.angle) - math.pi) < 1e-12:
            y[t > p] *= -1
    dt = T / n_grid
    C = correlation(np.abs(t[:, None] - t[None, :]))
    return float(y @ C @ y * dt * dt)


def gaussian_phase_variance(seq: DDSequence, noise: NoiseModel) -> float:
    """Exact ``int int y(t) y(s) C(t - s)`` for the piecewise-constant toggling sign ``y``.

    Each pair of free periods ``[a, b] x [c, d]`` contributes
    ``F(b - c) + F(a - d) - F(a - c) - F(b - d)`` with ``F`` from
    :meth:`NoiseModel.double_integral`.  For Gaussian noise the coherence is
    ``exp(-variance / 2)``.
    """
    T = seq.total_time
    bounds = [0.0]
    signs = [1.0]
    for p, ev in zip(seq.pulse_times(), seq.events):
        if abs(ev.axis[2]) < 1e-12 and abs(abs(ev.angle) - math.pi) < 1e-12:
            bounds.append(float(p))
            signs.append(-signs[-1])
    bounds.append(T)
    a, b = np.array(bounds[:-1]), np.array(bounds[1:])
    y = np.array(signs)
    F = noise.double_integral
    M = (F(b[:, None] - a[None, :]) + F(a[:, None] - b[None, :])
         - F(a[:, None] - a[None, :]) - F(b[:, None] - b[None, :]))
    return float(y @ M @ y)
