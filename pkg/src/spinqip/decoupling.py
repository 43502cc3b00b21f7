"""Dynamical-decoupling sequence generators, switching-function moments and a noise benchmark.

All pulses are instantaneous.  Timing conventions:

* ``cpmg(n, T)``: Y pulses at ``T (2j - 1) / 2n``.
* ``pdd(tau, k)``: ``k`` cycles of ``tau X tau Y tau X tau Y``; ``xy4(T) = pdd(T/4, 1)``.
* ``cdd(n, tau0)``: ``p0 = tau0``, ``p_{n+1} = p_n X p_n Z p_n X p_n Z``.
* ``udd(n, T)``: Y pulses at ``T sin^2(pi j / (2n + 2))``.
* ``cudd(level, T, udd_order)``: UDD blocks concatenated with alternating X / Z axes.
* ``qdd(n, T)``: outer X-axis UDD_n whose intervals each hold an inner Z-axis UDD_n.
* ``kdd(phi, tau)``: the five-pulse Knill composite with phases
  ``pi/6 + phi, phi, pi/2 + phi, phi, pi/6 + phi`` laid out as
  ``tau/2 P tau P tau P tau P tau P tau/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import propagator
from .io import write_csv
from .noise import NoiseModel, dephasing_trajectories
from .sequence import TIME_ATOL, DDSequence, PulseEvent, phase_axis

MOMENT_ATOL = 1e-10


def _udd_fractions(n: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.sin(np.pi * j / (2 * n + 2)) ** 2


def free(total_time: float) -> DDSequence:
    return DDSequence((), total_time, "free")


def cpmg(n_pulses: int, total_time: float) -> DDSequence:
    if n_pulses < 1:
        raise ValueError("cpmg needs n_pulses >= 1")
    j = np.arange(1, n_pulses + 1)
    return DDSequence.from_times(total_time * (2 * j - 1) / (2 * n_pulses), "Y", total_time,
                                 name=f"cpmg{n_pulses}")


def pdd(base_delay: float, n_repeats: int) -> DDSequence:
    if not base_delay > 0 or n_repeats < 1:
        raise ValueError("pdd needs base_delay > 0 and n_repeats >= 1")
    events = [PulseEvent(base_delay, ax) for _ in range(n_repeats) for ax in "XYXY"]
    return DDSequence(tuple(events), 4 * n_repeats * base_delay, f"pdd{n_repeats}")


def xy4(total_time: float) -> DDSequence:
    seq = pdd(total_time / 4, 1)
    return DDSequence(seq.events, total_time, "xy4")


def _cdd_tokens(level: int) -> list:
    # tokens: "d" for one base delay, or an axis letter for a pulse
    if level == 0:
        return ["d"]
    inner = _cdd_tokens(level - 1)
    return inner + ["X"] + inner + ["Z"] + inner + ["X"] + inner + ["Z"]


def _tokens_to_sequence(tokens, tau: float, name: str) -> DDSequence:
    events, pending = [], 0.0
    for tok in tokens:
        if tok == "d":
            pending += tau
        else:
            events.append(PulseEvent(pending, tok))
            pending = 0.0
    total = tau * sum(1 for t in tokens if t == "d")
    return DDSequence(tuple(events), total, name)


def cdd(level: int, base_delay: float) -> DDSequence:
    """Concatenated decoupling; ``4(4^n - 1)/3`` pulses and ``4^n`` free periods."""
    if level < 0:
        raise ValueError("cdd level must be >= 0")
    if not base_delay > 0:
        raise ValueError("base_delay must be positive")
    return _tokens_to_sequence(_cdd_tokens(level), base_delay, f"cdd{level}")


def cdd_pulse_count(level: int) -> int:
    return 4 * (4**level - 1) // 3


def udd(n: int, total_time: float) -> DDSequence:
    if n < 1:
        raise ValueError("udd needs n >= 1")
    return DDSequence.from_times(total_time * _udd_fractions(n), "Y", total_time, name=f"udd{n}")


def _cudd_block(level: int, order: int, start: float, length: float) -> list[tuple[float, str]]:
    """Absolute (time, axis) pulses of a level-``level`` CUDD block on [start, start + length]."""
    if level == 0:
        return []
    axis = "X" if level % 2 else "Z"
    edges = np.concatenate([[0.0], _udd_fractions(order), [1.0]]) * length + start
    pulses = []
    for k in range(order + 1):
        pulses += _cudd_block(level - 1, order, edges[k], edges[k + 1] - edges[k])
        if k < order:
            pulses.append((edges[k + 1], axis))
    if order % 2:
        # odd UDD orders leave a net pi rotation; close the block so each level is identity
        pulses.append((start + length, axis))
    return pulses


def cudd(level: int, total_time: float, udd_order: int = 1) -> DDSequence:
    """UDD blocks nested inside each other's free periods, axes alternating X, Z per level.

    With ``udd_order = 1`` the pulse count obeys ``c_l = 2 c_{l-1} + 2``, i.e. it
    doubles per level.
    """
    if level < 1 or udd_order < 1:
        raise ValueError("cudd needs level >= 1 and udd_order >= 1")
    pulses = _cudd_block(level, udd_order, 0.0, total_time)
    times = [p[0] for p in pulses]
    axes = [p[1] for p in pulses]
    return DDSequence.from_times(times, axes, total_time, name=f"cudd{level}_{udd_order}")


def qdd(n: int, total_time: float, swap: bool = False) -> DDSequence:
    """Outer UDD_n about X with an inner UDD_n about Z in each outer interval.

    ``swap=True`` exchanges the roles (Z outer, X inner).  The result has
    ``(n + 1)^2`` free-evolution intervals.
    """
    if n < 1:
        raise ValueError("qdd needs n >= 1")
    outer_axis, inner_axis = ("Z", "X") if swap else ("X", "Z")
    edges = np.concatenate([[0.0], _udd_fractions(n), [1.0]]) * total_time
    inner = _udd_fractions(n)
    times, axes = [], []
    for k in range(n + 1):
        a, b = edges[k], edges[k + 1]
        times += list(a + (b - a) * inner)
        axes += [inner_axis] * n
        if k < n:
            times.append(b)
            axes.append(outer_axis)
    return DDSequence.from_times(times, axes, total_time, name=f"qdd{n}")


KNILL_PHASES = (math.pi / 6, 0.0, math.pi / 2, 0.0, math.pi / 6)


def kdd(phi: float = 0.0, tau: float = 0.0) -> DDSequence:
    """Knill composite pi pulse; with ``tau > 0`` the pulses are separated by delays."""
    if tau < 0:
        raise ValueError("tau must be non-negative")
    events = []
    for k, p in enumerate(KNILL_PHASES):
        events.append(PulseEvent(tau / 2 if k == 0 else tau, phase_axis(p + phi)))
    return DDSequence(tuple(events), 5 * tau, f"kdd{phi:g}")


# --- switching-function moments -----------------------------------------------------

@dataclass(frozen=True)
class FilterSpec:
    pulse_times: tuple[float, ...]

    def __post_init__(self):
        d = tuple(float(x) for x in self.pulse_times)
        if any(not 0.0 < x < 1.0 for x in d):
            raise ValueError("pulse fractions must lie in (0, 1)")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("pulse fractions must be strictly increasing")
        object.__setattr__(self, "pulse_times", d)

    @classmethod
    def from_sequence(cls, seq: DDSequence) -> "FilterSpec":
        """Sign-switch instants of Z noise, as fractions of the sequence length.

        Only in-plane pi pulses flip the sign.  Pulses at the same instant are
        merged by parity, and pulses at either end of the window are dropped.
        """
        tol = TIME_ATOL / max(seq.total_time, TIME_ATOL)
        frac: list[float] = []
        flips: list[int] = []
        for f, e in zip(seq.fractions(), seq.events):
            if abs(e.axis[2]) > 1e-12 or abs(abs(e.angle) - math.pi) > 1e-12:
                continue
            if frac and abs(f - frac[-1]) <= tol:
                flips[-1] += 1
            else:
                frac.append(float(f))
                flips.append(1)
        return cls(tuple(f for f, k in zip(frac, flips) if k % 2 and tol < f < 1 - tol))


def switching_moments(spec: FilterSpec, max_order: int) -> np.ndarray:
    """``c_m = sum_k (-1)^k (d_{k+1}^m - d_k^m)`` for ``m = 1..max_order``, ``d_0 = 0``, ``d_{n+1} = 1``.

    ``c_m / m`` is the m-th time moment of the +-1 toggling function on [0, 1].
    """
    d = np.concatenate([[0.0], spec.pulse_times, [1.0]])
    signs = (-1.0) ** np.arange(len(d) - 1)
    return np.array([np.sum(signs * (d[1:] ** m - d[:-1] ** m)) for m in range(1, max_order + 1)])


def filter_order(spec, max_order: int | None = None) -> int:
    """Number of leading switching-function moments that vanish (``|c_m| <= 1e-10``)."""
    if isinstance(spec, DDSequence):
        spec = FilterSpec.from_sequence(spec)
    if max_order is None:
        max_order = 2 * len(spec.pulse_times) + 4
    c = switching_moments(spec, max_order)
    nonzero = np.nonzero(np.abs(c) > MOMENT_ATOL)[0]
    return int(nonzero[0]) if len(nonzero) else max_order


def sequence_propagator(seq: DDSequence, H=None) -> np.ndarray:
    """Single-qubit propagator of ``seq`` with a static Hamiltonian ``H`` between pulses."""
    U = np.eye(2, dtype=complex)
    delays = seq.delays()
    for d, ev in zip(delays, seq.events):
        if H is not None and d > 0:
            U = propagator(H, d) @ U
        U = ev.unitary @ U
    if H is not None and delays[-1] > 0:
        U = propagator(H, delays[-1]) @ U
    return U


def equals_up_to_phase(U: np.ndarray, V: np.ndarray, atol: float = 1e-10) -> bool:
    overlap = np.trace(V.conj().T @ U)
    if abs(overlap) < 1e-15:
        return False
    phase = overlap / abs(overlap)
    return bool(np.max(np.abs(U - phase * V)) <= atol)


# --- benchmark ----------------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkTable:
    names: tuple[str, ...]
    t: np.ndarray
    W: np.ndarray  # (sequences, durations)
    stderr: np.ndarray
    noise: NoiseModel
    n_traj: int

    def curve(self, name: str) -> np.ndarray:
        return self.W[self.names.index(name)]

    def rows(self):
        for i, name in enumerate(self.names):
            for k, t in enumerate(self.t):
                yield name, t, self.W[i, k], self.stderr[i, k]

    def to_csv(self, path) -> None:
        meta = dict(self.noise.describe(), n_traj=self.n_traj, time_unit="s")
        write_csv(path, ["sequence", "t", "W", "stderr"], self.rows(), meta=meta)


def benchmark(seqs, noise: NoiseModel, durations, n_traj: int = 400) -> BenchmarkTable:
    """Coherence of each sequence stretched to every duration.

    Every sequence sees the same noise realisations at a given duration, so
    differences between curves are not diluted by sampling noise.
    """
    seqs = list(seqs)
    if not seqs:
        raise ValueError("benchmark needs at least one sequence")
    durations = np.asarray(durations, dtype=float)
    names = tuple(s.name or f"seq{i}" for i, s in enumerate(seqs))
    if len(set(names)) != len(names):
        raise ValueError(f"sequence names must be unique: {names}")
    W = np.empty((len(seqs), len(durations)))
    err = np.empty_like(W)
    for i, s in enumerate(seqs):
        curve = dephasing_trajectories(s, noise, n_traj, durations)
        W[i], err[i] = curve.W, curve.stderr
    return BenchmarkTable(names, durations, W, err, noise, n_traj)


SEQUENCE_BUILDERS = {
    "free": lambda n, T: free(T),
    "cpmg": cpmg,
    "udd": udd,
    "xy4": lambda n, T: xy4(T),
    "cdd": lambda n, T: cdd(n, T / 4**n),
    "qdd": qdd,
    "cudd": cudd,
}


def build_sequence(name: str, n: int, total_time: float) -> DDSequence:
    """Generator lookup by family name; ``n`` is the order, level or pulse count."""
    try:
        return SEQUENCE_BUILDERS[name](n, total_time)
    except KeyError:
        raise ValueError(f"unknown sequence family {name!r}") from None

