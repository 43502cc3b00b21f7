"""Instantaneous-pulse sequence container shared by the decoupling and noise code."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import pauli

AXES = {
    "X": (1.0, 0.0, 0.0),
    "Y": (0.0, 1.0, 0.0),
    "Z": (0.0, 0.0, 1.0),
}

TIME_ATOL = 1e-12


def rotation(axis, angle: float) -> np.ndarray:
    """SU(2) rotation ``exp(-i angle/2 n.sigma)``."""
    n = np.asarray(AXES[axis] if isinstance(axis, str) else axis, dtype=float)
    gen = n[0] * pauli("X") + n[1] * pauli("Y") + n[2] * pauli("Z")
    return math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * gen


def phase_axis(phase: float) -> tuple[float, float, float]:
    return (math.cos(phase), math.sin(phase), 0.0)


@dataclass(frozen=True)
class PulseEvent:
    delay_before: float
    axis: tuple[float, float, float]
    angle: float = math.pi

    def __post_init__(self):
        if self.delay_before < 0:
            raise ValueError(f"negative delay {self.delay_before}")
        axis = np.asarray(AXES.get(self.axis, self.axis) if isinstance(self.axis, str) else self.axis,
                          dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-12:
            raise ValueError(f"pulse axis must be a unit 3-vector, got {self.axis}")
        object.__setattr__(self, "axis", tuple(float(a) for a in axis))

    @property
    def unitary(self) -> np.ndarray:
        return rotation(self.axis, self.angle)


@dataclass(frozen=True)
class DDSequence:
    """Ordered instantaneous pulses; whatever time remains after the last pulse is free evolution."""

    events: tuple[PulseEvent, ...]
    total_time: float
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.total_time < 0:
            raise ValueError("total_time must be non-negative")
        if sum(e.delay_before for e in self.events) > self.total_time + TIME_ATOL:
            raise ValueError("pulse delays exceed total_time")

    @classmethod
    def from_times(cls, times, axes, total_time: float, angles=None, name: str = "") -> "DDSequence":
        """Build from absolute pulse times in ``[0, total_time]``."""
        times = list(times)
        if isinstance(axes, str) or (len(axes) == 3 and all(isinstance(a, (int, float)) for a in axes)):
            axes = [axes] * len(times)
        angles = [math.pi] * len(times) if angles is None else list(angles)
        if any(b < a - TIME_ATOL for a, b in zip(times, times[1:])):
            raise ValueError("pulse times must be non-decreasing")
        events, prev = [], 0.0
        for t, ax, ang in zip(times, axes, angles):
            events.append(PulseEvent(max(t - prev, 0.0), ax, ang))
            prev = max(t, prev)
        return cls(tuple(events), total_time, name)

    @property
    def pulse_count(self) -> int:
        return len(self.events)

    @property
    def tail(self) -> float:
        return max(self.total_time - sum(e.delay_before for e in self.events), 0.0)

    def pulse_times(self) -> np.ndarray:
        return np.cumsum([e.delay_before for e in self.events])

    def fractions(self) -> np.ndarray:
        return self.pulse_times() / self.total_time

    def delays(self) -> list[float]:
        """All free-evolution periods, including the trailing one."""
        return [e.delay_before for e in self.events] + [self.tail]

    @property
    def n_intervals(self) -> int:
        """Number of free-evolution periods of nonzero length."""
        return sum(1 for d in self.delays() if d > TIME_ATOL * max(1.0, self.total_time))

    def scaled(self, total_time: float) -> "DDSequence":
        """Same relative timing stretched to ``total_time``."""
        if self.total_time == 0:
            raise ValueError("cannot rescale a zero-length sequence")
        f = total_time / self.total_time
        events = tuple(PulseEvent(e.delay_before * f, e.axis, e.angle) for e in self.events)
        return DDSequence(events, total_time, self.name)

    def with_flip_error(self, eps: float) -> "DDSequence":
        events = tuple(PulseEvent(e.delay_before, e.axis, e.angle * (1 + eps)) for e in self.events)
        return DDSequence(events, self.total_time, self.name)

    def pulse_product(self) -> np.ndarray:
        """Product of the pulse rotations alone (free evolution ignored)."""
        U = np.eye(2, dtype=complex)
        for e in self.events:
            U = e.unitary @ U
        return U

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "units": {"time": "s", "angle": "rad"},
            "total_time_s": self.total_time,
            "events": [
                {"delay_before_s": e.delay_before, "axis": list(e.axis), "angle_rad": e.angle}
                for e in self.events
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DDSequence":
        events = tuple(
            PulseEvent(ev["delay_before_s"], tuple(ev["axis"]), ev["angle_rad"]) for ev in data["events"]
        )
        return cls(events, data["total_time_s"], data.get("name", ""))
