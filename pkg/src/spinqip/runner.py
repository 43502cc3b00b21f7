"""Config-driven experiment runner.

Every experiment writes its data files into one directory and finishes with a
``manifest.json`` (config echo, versions, wall time, oracle deltas, sha256 of each
data file).  Data files depend only on ``(config, seed)``; the manifest also holds
the wall time and so differs between runs.

All randomness comes from ``SeedSequence(seed)``, split into a fixed number of
child seeds per experiment.
"""
from __future__ import annotations

import itertools
import logging
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import __version__
from .chemsim.adiabatic import adiabatic_evolve, random_ising_problem, transverse_field
from .chemsim.fano_anderson import (FanoAndersonParams, fano_anderson_g, fano_anderson_spectrum,
                                    single_excitation_energies)
from .chemsim.ising import ising_scan
from .chemsim.lattice_gas import (BurgersSetup, burgers_lattice_gas, burgers_reference,
                                  collide_classical, collide_quantum, collision_unitary, relative_l2)
from .control import (EnsembleSpec, GrapeConfig, PulseProgram, control_hamiltonian, controlled_z,
                      ensemble_fidelity, gradient, grape_optimize, x_rotation)
from .core import Spin, SpinSystem, gate_fidelity
from .decoupling import benchmark, build_sequence, filter_order
from .grid import GridRegister, multi_dof_evolve
from .hamiltonians import TWO_PI, malonic_acid_fixture
from .io import dumps, format_number, sha256_file, write_csv, write_json, write_json_atomic
from .noise import NoiseModel, gaussian_phase_variance
from .schemas import RunConfig, physics_diagnostics

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"


class ConfigError(ValueError):
    """The config failed schema or physics checks; nothing was computed."""


class NumericFailure(RuntimeError):
    """Computation broke down after outputs may already have been written."""


@dataclass
class RunContext:
    out: Path
    cfg: RunConfig
    seeds: list[int]
    files: list[str] = field(default_factory=list)
    oracle: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def meta(self, **extra) -> dict:
        return dict(experiment=self.cfg.experiment, seed=self.cfg.seed, **extra)

    def csv(self, name: str, header, rows, **meta) -> None:
        write_csv(self.out / name, header, rows, meta=self.meta(**meta))
        self.files.append(name)

    def json(self, name: str, obj) -> None:
        write_json(self.out / name, obj)
        self.files.append(name)


def child_seeds(seed: int, n: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


# --- grape --------------------------------------------------------------------------

def _grape_task(p):
    if p.task == "x90":
        system = SpinSystem((Spin("q0", 0.0, 0.0),))
        n_steps = p.n_steps or 50
        duration = p.duration_s or 0.5e-3
        omax = TWO_PI * (p.omega_max_hz or 5e3)
        return system, x_rotation(math.pi / 2), n_steps, duration, omax, ((0,),), np.zeros(1)
    sub = malonic_acid_fixture().system.subsystem(["C1", "Cm"])
    J = float(sub.couplings[0].parameters["J_hz"])
    n_steps = p.n_steps or 60
    duration = p.duration_s or 1.0 / (2 * J)
    omax = TWO_PI * (p.omega_max_hz or 1e4)
    # each channel is driven on resonance with its own spin
    rf = np.array([TWO_PI * s.offset_hz for s in sub.spins])
    return sub, controlled_z(), n_steps, duration, omax, ((0,), (1,)), rf


def _expm_propagator(prog: PulseProgram, system: SpinSystem, sample) -> np.ndarray:
    U = np.eye(2**system.n, dtype=complex)
    for j in range(prog.n_steps):
        U = expm(-1j * prog.dt * control_hamiltonian(prog, j, system, sample)) @ U
    return U


def _fd_gradient(prog, target, system, ens, h: float) -> np.ndarray:
    u = prog.quadratures()
    g = np.empty_like(u)
    for idx in np.ndindex(u.shape):
        up, dn = u.copy(), u.copy()
        up[idx] += h
        dn[idx] -= h
        g[idx] = (ensemble_fidelity(prog.with_quadratures(up), target, system, ens)
                  - ensemble_fidelity(prog.with_quadratures(dn), target, system, ens)) / (2 * h)
    return g


def run_grape(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    system, target, n_steps, duration, omax, targets, rf = _grape_task(p)
    ens = EnsembleSpec.rf_spread(p.rf_scales)
    gcfg = GrapeConfig(epsilon=p.epsilon, max_iters=p.max_iters, threshold=p.threshold,
                       power_penalty=p.power_penalty)
    start_seeds = child_seeds(ctx.seeds[0], p.n_starts)
    best, starts = None, []
    for s in start_seeds:
        init = PulseProgram.random(n_steps, duration / n_steps, targets, omax, seed=s, omega_rf=rf)
        res = grape_optimize(init, target, system, ens, gcfg)
        starts.append((s, res.fidelity, res.iterations, int(res.converged)))
        if best is None or res.fidelity > best.fidelity:
            best = res
    prog = best.program
    if not np.all(np.isfinite(prog.quadratures())):
        raise NumericFailure("optimised program contains non-finite amplitudes")
    ctx.json("pulse_program.json", prog.to_dict())
    ctx.csv("fidelity_trace.csv", ["iter", "phi_tot"], enumerate(best.fidelity_trace),
            task=p.task, duration_s=duration, omega_max_hz=omax / TWO_PI)
    ctx.csv("starts.csv", ["start_seed", "fidelity", "iterations", "converged"], starts)

    phi_oracle = sum(s.weight * gate_fidelity(target, _expm_propagator(prog, system, s))
                     for s in ens.samples)
    g = gradient(prog, target, system, ens)
    g_fd = _fd_gradient(prog, target, system, ens, h=1e-4 * omax)
    ctx.oracle.update(
        fidelity_vs_expm=abs(phi_oracle - best.fidelity),
        gradient_vs_central_difference=float(np.linalg.norm(g - g_fd) / max(np.linalg.norm(g_fd), 1e-300)),
    )
    ctx.summary.update(
        infidelity=1.0 - best.fidelity,
        iterations=best.iterations,
        trace_monotone=bool(np.all(np.diff(best.fidelity_trace) >= 0)),
        best_start_seed=starts[[s[1] for s in starts].index(best.fidelity)][0],
        duration_s=duration,
    )


# --- dynamical decoupling -----------------------------------------------------------

def run_dd_bench(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    noise = NoiseModel(p.noise_kind, TWO_PI * p.sigma_hz, p.tau_c_s, ctx.seeds[0],
                       p.grid_steps, p.n_modes)
    T_ref = max(p.durations_s)
    seqs = [build_sequence(name, p.order, T_ref) for name in p.sequences]
    seqs = [type(s)(s.events, s.total_time, name) for s, name in zip(seqs, p.sequences)]
    table = benchmark(seqs, noise, p.durations_s, p.n_traj)
    table.to_csv(ctx.out / "benchmark.csv")
    ctx.files.append("benchmark.csv")
    ctx.json("sequences.json", [s.to_dict() for s in seqs])

    # Gaussian noise: W = exp(-chi / 2) with chi the exact phase variance
    W_gauss = np.array([[math.exp(-0.5 * gaussian_phase_variance(s.scaled(T), noise)) for T in table.t]
                        for s in seqs])
    ctx.oracle.update(W_vs_gaussian_phase_variance=float(np.max(np.abs(table.W - W_gauss))),
                      max_monte_carlo_stderr=float(np.max(table.stderr)))
    ctx.summary.update(
        filter_order={name: filter_order(s) for name, s in zip(p.sequences, seqs)},
        W_at_longest={name: float(table.W[i, -1]) for i, name in enumerate(p.sequences)},
        noise=noise.describe(),
    )


# --- chemistry simulations ----------------------------------------------------------

def _ising_brute_force(J: float, h: float, T: float):
    states = list(itertools.product((1, -1), repeat=3))
    E = np.array([J * (a * b + b * c + a * c) + h * (a + b + c) for a, b, c in states])
    m = np.array([a + b + c for a, b, c in states], dtype=float)
    w = np.exp(-(E - E.min()) / T)
    prob = w / w.sum()
    nz = prob[prob > 0]
    return float(prob @ m), float(-np.sum(nz * np.log(nz)))


def run_sim_ising(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    h = np.linspace(p.h_min, p.h_max, p.n_h)
    T = np.linspace(p.T_min, p.T_max, p.n_T)
    scan = ising_scan(p.J, h, T)
    ctx.csv("magnetization.csv", ["h", "T", "M"], scan.rows("M"), J=p.J, units="k_B=1")
    ctx.csv("entropy.csv", ["h", "T", "S"], scan.rows("S"), J=p.J, units="nats")
    dM = dS = 0.0
    for i, hv in enumerate(h):
        for k, Tv in enumerate(T):
            M_ref, S_ref = _ising_brute_force(p.J, hv, Tv)
            dM = max(dM, abs(scan.magnetization[i, k] - M_ref))
            dS = max(dS, abs(scan.entropy[i, k] - S_ref))
    ctx.oracle.update(magnetization_vs_brute_force=dM, entropy_vs_brute_force=dS)
    ctx.summary.update(entropy_argmax_h_at_T_min=float(h[np.argmax(scan.entropy[:, 0])]))


def run_sim_fano(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    params = FanoAndersonParams(p.eps_k, p.eps, p.V)
    times = np.linspace(0.0, p.t_max, p.n_g_points)
    g = fano_anderson_g(params, times)
    ctx.csv("g_series.csv", ["t", "re_circuit", "im_circuit", "re_oracle", "im_oracle"],
            zip(times, g.circuit.real, g.circuit.imag, g.matrix_element.real, g.matrix_element.imag))
    spec = fano_anderson_spectrum(params, p.t_max, p.n_samples)
    ctx.csv("spectrum.csv", ["omega", "power"], zip(spec.omega, spec.power), bin_width=spec.bin_width)
    exact = single_excitation_energies(params)
    rows = []
    for w in spec.peaks:
        nearest = exact[np.argmin(np.abs(exact - w))]
        rows.append((w, nearest, abs(w - nearest) / spec.bin_width))
    ctx.csv("peaks.csv", ["omega_peak", "omega_exact", "offset_bins"], rows)
    ctx.oracle.update(
        g_circuit_vs_matrix_element=g.max_delta,
        peak_offset_bins=max((r[2] for r in rows), default=None),
    )
    ctx.summary.update(n_peaks=len(rows), exact_energies=exact.tolist())


def run_sim_burgers(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    setup = BurgersSetup(p.n_nodes, p.u0, p.cot_theta)
    steps = p.steps if p.steps is not None else int(setup.shock_time)
    rng = np.random.default_rng(ctx.seeds[0])
    init = setup.initial_state()
    run = burgers_lattice_gas(init, steps, p.readout_noise, rng if p.readout_noise else None)
    ctx.csv("mass.csv", ["step", "mass"], zip(run.times, run.mass))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ref = burgers_reference([p.u0], p.n_nodes, run.nu, setup.x, run.times)
    if not np.all(np.isfinite(ref)):
        raise NumericFailure(f"Cole-Hopf reference is not finite at nu = {run.nu:.3g}; viscosity too small")
    rows = ((k, x, run.u[k, i], ref[k, i]) for k in range(len(run.times))
            for i, x in enumerate(setup.x))
    ctx.csv("u_field.csv", ["step", "x", "u_lattice", "u_reference"], rows,
            nu=run.nu, cot_theta=p.cot_theta, u0=p.u0)
    U = collision_unitary(init.theta)
    q1, q2 = collide_quantum(init.f1, init.f2, U)
    c1, c2 = collide_classical(init.f1, init.f2, init.theta)
    errs = [relative_l2(run.u[k], ref[k]) for k in range(1, len(run.times))]
    ctx.oracle.update(
        max_relative_l2_vs_cole_hopf=max(errs, default=0.0),
        collision_quantum_vs_closed_form=float(max(np.max(np.abs(q1 - c1)), np.max(np.abs(q2 - c2)))),
    )
    ctx.summary.update(steps=steps, shock_time=setup.shock_time, nu=run.nu,
                       max_mass_drift_per_step=run.max_mass_drift, clamped=run.clamped)


def run_sim_particle(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    k = p.mass * p.omega**2
    K = k * np.eye(p.n_dof)
    if p.n_dof == 2:
        K[0, 1] = K[1, 0] = p.coupling

    def V(*xs):
        return 0.5 * sum(K[a, b] * xs[a] * xs[b] for a in range(p.n_dof) for b in range(p.n_dof))

    centers = [p.x0] + [0.0] * (p.n_dof - 1)
    reg = GridRegister.gaussian(p.m, p.x_min, p.x_max, centers, 1.0 / math.sqrt(p.mass * p.omega))
    x_init = np.array([reg.mean_position(d) for d in range(p.n_dof)])
    p_init = np.array([reg.mean_momentum(d) for d in range(p.n_dof)])
    # Ehrenfest is exact for a quadratic potential: <x>, <p> follow the classical flow
    n = p.n_dof
    A = np.block([[np.zeros((n, n)), np.eye(n) / p.mass], [-K, np.zeros((n, n))]])
    rows, dx_max, drift = [], 0.0, 0.0
    done = 0
    while True:
        t = done * p.dt
        xs = [reg.mean_position(d) for d in range(n)]
        cls = (expm(A * t) @ np.concatenate([x_init, p_init]))[:n]
        dx_max = max(dx_max, float(np.max(np.abs(np.array(xs) - cls))))
        rows.append((t, *xs, *cls, float(np.linalg.norm(reg.amplitudes))))
        if done >= p.steps:
            break
        chunk = min(p.record_every, p.steps - done)
        before = float(np.linalg.norm(reg.amplitudes))
        reg = multi_dof_evolve(reg, V, p.mass, p.dt, chunk)
        drift = max(drift, abs(float(np.linalg.norm(reg.amplitudes)) - before) / chunk)
        done += chunk
    header = ["t", *[f"x{d}_mean" for d in range(n)], *[f"x{d}_classical" for d in range(n)], "norm"]
    ctx.csv("expectation.csv", header, rows, grid_points=2**p.m, dt=p.dt)
    ctx.oracle.update(mean_position_vs_classical=dx_max)
    ctx.summary.update(norm_drift_per_step=drift, grid_points_per_dof=2**p.m)


def _schrodinger_oracle(H_A, H_P, tau: float) -> np.ndarray:
    psi0 = np.linalg.eigh(H_A)[1][:, 0].astype(complex)
    if tau == 0:
        return psi0

    def rhs(t, y):
        s = t / tau
        return -1j * (((1 - s) * H_A + s * H_P) @ y)

    sol = solve_ivp(rhs, (0.0, tau), psi0, method="DOP853", rtol=1e-10, atol=1e-12)
    return sol.y[:, -1]


ORACLE_MAX_DIM = 64


def run_adiabatic(ctx: RunContext) -> None:
    p = ctx.cfg.typed_parameters()
    rng = np.random.default_rng(ctx.seeds[0])
    H_A = transverse_field(p.n_qubits)
    H_P = random_ising_problem(p.n_qubits, rng)
    energies = np.diag(H_P).real
    ctx.csv("problem_energies.csv", ["basis_index", "energy"], enumerate(energies))
    ground = np.flatnonzero(energies - energies.min() <= 1e-9 * max(1.0, np.abs(energies).max()))
    rows, deltas = [], []
    for tau in p.taus:
        res = adiabatic_evolve(H_A, H_P, tau, p.n_steps)
        rows.append((tau, res.overlap, res.min_gap))
        if H_A.shape[0] <= ORACLE_MAX_DIM:
            psi = _schrodinger_oracle(H_A, H_P, tau)
            deltas.append(abs(float(np.sum(np.abs(psi[ground]) ** 2)) - res.overlap))
    ctx.csv("overlaps.csv", ["tau", "overlap", "min_gap"], rows, n_qubits=p.n_qubits, n_steps=p.n_steps)
    ctx.oracle.update(overlap_vs_continuous_time=max(deltas) if deltas else None)
    ctx.summary.update(ground_indices=ground.tolist())


EXPERIMENTS = {
    "grape": (run_grape, "GRAPE pulse optimisation (x90 or CZ on the malonic C1-Cm pair)"),
    "dd-bench": (run_dd_bench, "Monte Carlo coherence of decoupling sequences under dephasing noise"),
    "sim-ising": (run_sim_ising, "magnetisation and entropy of the frustrated Ising triangle"),
    "sim-fano": (run_sim_fano, "Fano-Anderson Green's function and spectrum"),
    "sim-burgers": (run_sim_burgers, "quantum lattice gas for the Burgers equation"),
    "sim-particle": (run_sim_particle, "split-operator wavepacket in a harmonic well"),
    "adiabatic": (run_adiabatic, "adiabatic interpolation to a random Ising problem"),
}
N_CHILD_SEEDS = 4


# --- driver -------------------------------------------------------------------------

def check_config(cfg: RunConfig) -> None:
    problems = physics_diagnostics(cfg)
    if problems:
        raise ConfigError("; ".join(problems))


def _versions() -> dict:
    import pydantic
    return {"spinqip": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "pydantic": pydantic.__version__, "python": platform.python_version()}


def run(cfg: RunConfig, output_dir) -> dict:
    """Execute ``cfg`` into ``output_dir`` and return the manifest.

    Raises :class:`ConfigError` before touching the filesystem, and
    :class:`NumericFailure` after writing a manifest that flags partial outputs.
    """
    check_config(cfg)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ctx = RunContext(out, cfg, child_seeds(cfg.seed, N_CHILD_SEEDS))
    fn = EXPERIMENTS[cfg.experiment][0]
    t0 = time.perf_counter()
    error = None
    try:
        fn(ctx)
    except NumericFailure as exc:
        error = str(exc)
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        error = f"{type(exc).__name__}: {exc}"
    manifest = {
        "status": "ok" if error is None else "numeric-failure",
        "partial": error is not None,
        "error": error,
        "config": cfg.model_dump(),
        "child_seeds": ctx.seeds,
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - t0,
        "oracle_deltas": ctx.oracle,
        "summary": ctx.summary,
        "outputs": [{"file": f, "sha256": sha256_file(out / f)} for f in ctx.files],
    }
    write_json_atomic(out / MANIFEST, manifest)
    if error is not None:
        raise NumericFailure(error)
    return manifest


def describe_result(manifest: dict) -> str:
    lines = [f"status: {manifest['status']}  wall time {manifest['wall_time_s']:.3f} s"]
    for k, v in manifest["oracle_deltas"].items():
        lines.append(f"  oracle {k}: {format_number(v) if isinstance(v, (int, float)) else v}")
    return "\n".join(lines)


__all__ = ["ConfigError", "NumericFailure", "EXPERIMENTS", "run", "check_config", "child_seeds",
           "describe_result", "dumps"]
