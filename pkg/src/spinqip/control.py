"""Piecewise-constant pulse programs and GRAPE optimisation of unitary gates.

Simulation runs in the frame rotating with each channel's carrier ``omega_rf``
under the rotating-wave approximation.  During step ``j`` channel ``k`` adds

    (omega_k(j) / 2) * (cos(phi_k(j)) X + sin(phi_k(j)) Y)

to every spin it addresses.  A spin addressed by channel ``k`` sees its chemical
shift reduced by that channel's carrier.

The optimiser works on Cartesian quadratures ``u = (ux, uy) = omega * (cos phi,
sin phi)`` so the objective is smooth everywhere, including at zero amplitude.
Gradients are exact: each step propagator is differentiated in its own
eigenbasis.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import embed, gate_fidelity, is_unitary, pauli, SpinSystem
from .hamiltonians import system_hamiltonian

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PulseProgram:
    dt: float
    omega: np.ndarray  # (channels, steps), rad/s
    phi: np.ndarray  # (channels, steps), rad
    omega_rf: np.ndarray  # (channels,), rad/s
    targets: tuple[tuple[int, ...], ...]
    omega_max: float = math.inf

    def __post_init__(self):
        omega = np.atleast_2d(np.asarray(self.omega, dtype=float)).copy()
        phi = np.atleast_2d(np.asarray(self.phi, dtype=float)).copy()
        rf = np.atleast_1d(np.asarray(self.omega_rf, dtype=float)).copy()
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if omega.shape != phi.shape:
            raise ValueError(f"omega {omega.shape} and phi {phi.shape} shapes differ")
        if rf.shape != (omega.shape[0],) or len(self.targets) != omega.shape[0]:
            raise ValueError("need one carrier and one target list per channel")
        if np.any(omega < 0):
            raise ValueError("amplitudes must be non-negative (encode sign in phi)")
        if np.max(omega, initial=0.0) > self.omega_max * (1 + 1e-12):
            raise ValueError(f"amplitude {omega.max():.6g} exceeds omega_max {self.omega_max:.6g}")
        for arr in (omega, phi, rf):
            arr.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "omega_rf", rf)
        object.__setattr__(self, "targets", tuple(tuple(int(s) for s in t) for t in self.targets))

    @property
    def n_steps(self) -> int:
        return self.omega.shape[1]

    @property
    def n_channels(self) -> int:
        return self.omega.shape[0]

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    def quadratures(self) -> np.ndarray:
        """``(channels, steps, 2)`` array of ``(ux, uy)``."""
        return np.stack([self.omega * np.cos(self.phi), self.omega * np.sin(self.phi)], axis=-1)

    def with_quadratures(self, u: np.ndarray) -> "PulseProgram":
        omega = np.hypot(u[..., 0], u[..., 1])
        phi = np.arctan2(u[..., 1], u[..., 0])
        omega = np.minimum(omega, self.omega_max)
        return PulseProgram(self.dt, omega, phi, self.omega_rf, self.targets, self.omega_max)

    @classmethod
    def constant(cls, n_steps: int, dt: float, omega, phi, targets, omega_rf=None,
                 omega_max: float = math.inf) -> "PulseProgram":
        omega = np.atleast_1d(omega).astype(float)
        phi = np.broadcast_to(np.atleast_1d(phi).astype(float), omega.shape)
        rf = np.zeros(len(omega)) if omega_rf is None else omega_rf
        return cls(dt, np.repeat(omega[:, None], n_steps, 1), np.repeat(phi[:, None], n_steps, 1),
                   rf, targets, omega_max)

    @classmethod
    def random(cls, n_steps: int, dt: float, targets, omega_max: float, seed: int,
                amplitude_fraction: float = 0.1, omega_rf=None) -> "PulseProgram":
        """Small random amplitudes with uniformly random phases."""
        rng = np.random.default_rng(seed)
        K = len(targets)
        omega = amplitude_fraction * omega_max * rng.random((K, n_steps))
        phi = rng.uniform(-math.pi, math.pi, (K, n_steps))
        rf = np.zeros(K) if omega_rf is None else omega_rf
        return cls(dt, omega, phi, rf, targets, omega_max)

    def to_dict(self) -> dict:
        return {
            "units": {"dt": "s", "omega": "rad/s", "phi": "rad", "omega_rf": "rad/s"},
            "n_steps": self.n_steps,
            "dt_s": self.dt,
            "omega_max_rad_s": None if math.isinf(self.omega_max) else self.omega_max,
            "channels": [
                {
                    "targets": list(self.targets[k]),
                    "omega_rf_rad_s": float(self.omega_rf[k]),
                    "omega_rad_s": self.omega[k].tolist(),
                    "phi_rad": self.phi[k].tolist(),
                }
                for k in range(self.n_channels)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PulseProgram":
        chans = data["channels"]
        if any(len(c["omega_rad_s"]) != data["n_steps"] for c in chans):
            raise ValueError("channel arrays must have n_steps entries")
        omax = data.get("omega_max_rad_s")
        return cls(
            data["dt_s"],
            np.array([c["omega_rad_s"] for c in chans], dtype=float),
            np.array([c["phi_rad"] for c in chans], dtype=float),
            np.array([c.get("omega_rf_rad_s", 0.0) for c in chans]),
            tuple(tuple(c["targets"]) for c in chans),
            math.inf if omax is None else omax,
        )


@dataclass(frozen=True)
class EnsembleSample:
    rf_scale: float = 1.0
    offset: float = 0.0  # rad/s, added to every spin
    weight: float = 1.0


@dataclass(frozen=True)
class EnsembleSpec:
    samples: tuple[EnsembleSample, ...] = (EnsembleSample(),)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if not self.samples:
            raise ValueError("ensemble needs at least one sample")
        w = [s.weight for s in self.samples]
        if min(w) < 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"weights must be non-negative and sum to 1, got {sum(w)!r}")

    @classmethod
    def nominal(cls) -> "EnsembleSpec":
        return cls()

    @classmethod
    def rf_spread(cls, scales) -> "EnsembleSpec":
        scales = list(scales)
        return cls(tuple(EnsembleSample(s, 0.0, 1.0 / len(scales)) for s in scales))


@dataclass(frozen=True)
class GrapeConfig:
    epsilon: Optional[float] = None  # None: chosen from the first gradient
    max_iters: int = 500
    threshold: float = 1e-12
    power_penalty: float = 0.0
    growth: float = 1.5
    max_backtracks: int = 40

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be non-negative")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")


@dataclass(frozen=True)
class GrapeResult:
    program: PulseProgram
    fidelity_trace: np.ndarray
    converged: bool
    seed: Optional[int] = None

    @property
    def fidelity(self) -> float:
        return float(self.fidelity_trace[-1])

    @property
    def iterations(self) -> int:
        return len(self.fidelity_trace) - 1


# --- Hamiltonians -------------------------------------------------------------------

@dataclass(frozen=True)
class _Model:
    """Drift and control operators for one ensemble sample."""

    drift: np.ndarray
    controls: np.ndarray  # (channels, 2, d, d): X-part, Y-part per channel
    rf_scale: float


def _check_targets(prog: PulseProgram, system: SpinSystem) -> None:
    for t in prog.targets:
        for s in t:
            if not 0 <= s < system.n:
                raise IndexError(f"channel target {s} out of range for {system.n} spins")


def _model(prog: PulseProgram, system: SpinSystem, sample: EnsembleSample) -> _Model:
    _check_targets(prog, system)
    n = system.n
    frame = {}
    for k, t in enumerate(prog.targets):
        for s in t:
            frame[s] = prog.omega_rf[k]
    drift = system_hamiltonian(system, frame)
    if sample.offset:
        for s in range(n):
            drift = drift + 0.5 * sample.offset * embed(pauli("Z"), s, n)
    d = 2**n
    controls = np.zeros((prog.n_channels, 2, d, d), dtype=complex)
    for k, t in enumerate(prog.targets):
        for s in t:
            controls[k, 0] += 0.5 * embed(pauli("X"), s, n)
            controls[k, 1] += 0.5 * embed(pauli("Y"), s, n)
    return _Model(drift, controls, sample.rf_scale)


def _step_hamiltonians(model: _Model, u: np.ndarray) -> np.ndarray:
    # u: (channels, steps, 2) -> (steps, d, d)
    return model.drift[None] + model.rf_scale * np.einsum("kjc,kcab->jab", u, model.controls)


def control_hamiltonian(prog: PulseProgram, j: int, system: SpinSystem,
                        sample: EnsembleSample = EnsembleSample()) -> np.ndarray:
    if not 0 <= j < prog.n_steps:
        raise IndexError(f"step {j} out of range for {prog.n_steps} steps")
    model = _model(prog, system, sample)
    return _step_hamiltonians(model, prog.quadratures()[:, j:j + 1])[0]


def _step_propagators(H: np.ndarray, dt: float):
    evals, V = np.linalg.eigh(H)
    phases = np.exp(-1j * dt * evals)
    U = np.einsum("jab,jb,jcb->jac", V, phases, V.conj())
    return U, evals, V, phases


def _chain(U: np.ndarray) -> np.ndarray:
    total = np.eye(U.shape[-1], dtype=complex)
    for Uj in U:
        total = Uj @ total
    return total


def program_propagator(prog: PulseProgram, system: SpinSystem,
                       sample: EnsembleSample = EnsembleSample()) -> np.ndarray:
    """``U_N ... U_1`` for the program (step 1 acts first)."""
    model = _model(prog, system, sample)
    U, *_ = _step_propagators(_step_hamiltonians(model, prog.quadratures()), prog.dt)
    return _chain(U)


def _check_target(target: np.ndarray, d: int) -> np.ndarray:
    target = np.asarray(target, dtype=complex)
    if target.shape != (d, d):
        raise ValueError(f"target shape {target.shape} does not match dimension {d}")
    if not is_unitary(target):
        raise ValueError("target is not unitary")
    return target


def power_integral(prog: PulseProgram) -> float:
    return float(np.sum(prog.omega**2) * prog.dt)


def ensemble_fidelity(prog: PulseProgram, target, system: SpinSystem,
                      ens: EnsembleSpec = EnsembleSpec(), power_penalty: float = 0.0) -> float:
    """Weighted gate fidelity over the ensemble minus ``power_penalty * sum(omega^2) dt``."""
    target = _check_target(target, 2**system.n)
    total = 0.0
    for s in ens.samples:
        total += s.weight * gate_fidelity(target, program_propagator(prog, system, s))
    return total - power_penalty * power_integral(prog)


def _divided_differences(evals: np.ndarray, dt: float) -> np.ndarray:
    """``(e^a_p - e^a_q) / (a_p - a_q)`` for ``a = -i dt evals``, batched over steps.

    For imaginary ``a`` this is ``exp((a_p + a_q)/2) * sinc``, which stays
    accurate for (near-)degenerate eigenvalues.
    """
    theta = dt * (evals[:, :, None] - evals[:, None, :])
    mean = 0.5 * dt * (evals[:, :, None] + evals[:, None, :])
    return np.exp(-1j * mean) * np.sinc(theta / (2 * np.pi))


def _sample_value_and_grad(u: np.ndarray, dt: float, model: _Model, Wd: np.ndarray):
    """Fidelity for one sample and its gradient with respect to ``u``."""
    d = Wd.shape[0]
    N = u.shape[1]
    H = _step_hamiltonians(model, u)
    U, evals, V, phases = _step_propagators(H, dt)
    fwd = np.empty_like(U)  # fwd[j] = U_j ... U_1
    acc = np.eye(d, dtype=complex)
    for j in range(N):
        acc = U[j] @ acc
        fwd[j] = acc
    bwd = np.empty_like(U)  # bwd[j] = W^dag U_N ... U_{j+1}
    acc = Wd.copy()
    for j in range(N - 1, -1, -1):
        bwd[j] = acc
        acc = acc @ U[j]
    g = np.trace(Wd @ fwd[-1])
    prev = np.concatenate([np.eye(d, dtype=complex)[None], fwd[:-1]])
    M = prev @ bwd  # Tr(W^dag ... dU_j ...) = Tr(M_j dU_j)
    G = np.swapaxes(V.conj().transpose(0, 2, 1) @ M @ V, 1, 2)
    L = _divided_differences(evals, dt)
    # dH_j / du_kc = rf_scale * controls[k, c]
    X = np.einsum("jba,kcbe,jef->jkcaf", V.conj(), model.controls, V)
    dg = np.einsum("jaf,jaf,jkcaf->kjc", G, L, X) * (-1j * dt * model.rf_scale)
    fid = abs(g) ** 2 / d**2
    grad = 2.0 * np.real(np.conj(g) * dg) / d**2
    return fid, grad


def _objective(u: np.ndarray, prog: PulseProgram, models, weights, Wd, penalty: float,
               with_grad: bool = True):
    val = 0.0
    grad = np.zeros_like(u)
    for m, w in zip(models, weights):
        f, gr = _sample_value_and_grad(u, prog.dt, m, Wd)
        val += w * f
        grad += w * gr
    val -= penalty * float(np.sum(u**2)) * prog.dt
    grad -= 2.0 * penalty * u * prog.dt
    return val, grad


def gradient(prog: PulseProgram, target, system: SpinSystem, ens: EnsembleSpec = EnsembleSpec(),
             power_penalty: float = 0.0) -> np.ndarray:
    """Exact derivative of :func:`ensemble_fidelity` with respect to the quadratures.

    Returns an array of shape ``(channels, steps, 2)`` holding ``dPhi/dux`` and
    ``dPhi/duy``.
    """
    target = _check_target(target, 2**system.n)
    models = [_model(prog, system, s) for s in ens.samples]
    weights = [s.weight for s in ens.samples]
    _, grad = _objective(prog.quadratures(), prog, models, weights, target.conj().T, power_penalty)
    return grad


def _project(u: np.ndarray, omega_max: float) -> np.ndarray:
    amp = np.hypot(u[..., 0], u[..., 1])
    scale = np.where(amp > omega_max, omega_max / np.where(amp > 0, amp, 1.0), 1.0)
    return u * scale[..., None]


def grape_optimize(initial: PulseProgram, target, system: SpinSystem,
                   ens: EnsembleSpec = EnsembleSpec(), cfg: GrapeConfig = GrapeConfig()) -> GrapeResult:
    """Projected gradient ascent with backtracking on the step size.

    A trial step ``u + eps * grad`` (projected onto ``|u| <= omega_max``) is
    accepted only if the objective does not decrease; otherwise ``eps`` is halved.
    After an accepted step ``eps`` grows by ``cfg.growth``.  Iteration stops when
    the accepted gain drops below ``cfg.threshold`` or no step size helps.
    """
    target = _check_target(target, 2**system.n)
    Wd = target.conj().T
    models = [_model(initial, system, s) for s in ens.samples]
    weights = [s.weight for s in ens.samples]
    u = _project(initial.quadratures(), initial.omega_max)
    val, grad = _objective(u, initial, models, weights, Wd, cfg.power_penalty)
    if not np.isfinite(val) or not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite fidelity or gradient at the initial program")
    trace = [val]
    gnorm = float(np.max(np.abs(grad)))
    if cfg.epsilon is not None:
        eps = cfg.epsilon
    else:
        scale = initial.omega_max if math.isfinite(initial.omega_max) else max(1.0, float(np.max(np.abs(u))))
        eps = 0.05 * scale / gnorm if gnorm > 0 else 1.0
    converged = False
    for it in range(cfg.max_iters):
        if gnorm == 0.0:
            converged = True
            break
        for _ in range(cfg.max_backtracks):
            trial = _project(u + eps * grad, initial.omega_max)
            tval, tgrad = _objective(trial, initial, models, weights, Wd, cfg.power_penalty)
            if not np.isfinite(tval) or not np.all(np.isfinite(tgrad)):
                raise FloatingPointError(f"GRAPE diverged at iteration {it} (step {eps:.3e})")
            if tval >= val:
                break
            eps *= 0.5
        else:
            converged = True
            break
        gain = tval - val
        u, val, grad = trial, tval, tgrad
        gnorm = float(np.max(np.abs(grad)))
        trace.append(val)
        eps *= cfg.growth
        if gain < cfg.threshold:
            converged = True
            break
    log.debug("GRAPE stopped after %d iterations at %.15f", len(trace) - 1, trace[-1])
    return GrapeResult(initial.with_quadratures(u), np.array(trace), converged)


def grape_multistart(make_initial, target, system: SpinSystem, seeds,
                     ens: EnsembleSpec = EnsembleSpec(), cfg: GrapeConfig = GrapeConfig()) -> GrapeResult:
    """Run :func:`grape_optimize` from ``make_initial(seed)`` for each seed; keep the best."""
    best = None
    for seed in seeds:
        res = grape_optimize(make_initial(seed), target, system, ens, cfg)
        res = GrapeResult(res.program, res.fidelity_trace, res.converged, seed)
        if best is None or res.fidelity > best.fidelity:
            best = res
    if best is None:
        raise ValueError("need at least one seed")
    return best


def controlled_z(n: int = 2) -> np.ndarray:
    if n != 2:
        raise ValueError("controlled_z is defined for two qubits")
    return np.diag([1, 1, 1, -1]).astype(complex)


def x_rotation(angle: float) -> np.ndarray:
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * pauli("X")
