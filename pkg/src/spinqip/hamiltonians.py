"""Spin Hamiltonian builders and the bundled malonic-acid system.

Spin operators are bare Pauli matrices throughout (no factor 1/2), coupling
constants enter in Hz at the API surface and leave as rad/s inside operators.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import constants

from .core import (
    Coupling,
    Spin,
    SpinSystem,
    check_spin_count,
    embed,
    pauli,
    spin_vector,
)

TWO_PI = 2.0 * math.pi

GAMMA_1H = 2.6752218744e8
GAMMA_13C = 6.728284e7
GAMMA_E = -1.76085963023e11

WEAK_COUPLING_RATIO = 10.0


@dataclass(frozen=True)
class DipolarGeometry:
    r_jk: float
    e_jk: tuple[float, float, float]

    def __post_init__(self):
        if not self.r_jk > 0:
            raise ValueError(f"internuclear distance must be positive, got {self.r_jk}")
        e = np.asarray(self.e_jk, dtype=float)
        if e.shape != (3,) or abs(np.linalg.norm(e) - 1.0) > 1e-12:
            raise ValueError("e_jk must be a unit 3-vector")
        object.__setattr__(self, "e_jk", tuple(float(x) for x in e))

    @classmethod
    def from_angles(cls, r_jk: float, theta: float, phi: float = 0.0) -> "DipolarGeometry":
        e = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
        norm = math.sqrt(sum(x * x for x in e))
        return cls(r_jk, tuple(x / norm for x in e))

    @property
    def Theta_jk(self) -> float:
        """Angle between the internuclear vector and the field (z) axis."""
        return math.acos(max(-1.0, min(1.0, self.e_jk[2])))


@dataclass(frozen=True)
class HyperfineParams:
    """Hyperfine tensor (rad/s) plus the secular scalars seen by the nucleus.

    ``A_zz`` is the zz element and ``B_perp = sqrt(A_zx^2 + A_zy^2)``, with the first
    index on the electron and the second on the nucleus.
    """

    A_tensor: np.ndarray | None = None
    A_zz: float | None = None
    B_perp: float | None = None

    def __post_init__(self):
        A = self.A_tensor
        if A is not None:
            A = np.array(A, dtype=float)
            if A.shape != (3, 3):
                raise ValueError("A_tensor must be 3x3")
            A.setflags(write=False)
            object.__setattr__(self, "A_tensor", A)
            a_zz = float(A[2, 2])
            b = float(math.hypot(A[2, 0], A[2, 1]))
            if self.A_zz is None:
                object.__setattr__(self, "A_zz", a_zz)
            elif abs(self.A_zz - a_zz) > 1e-9 * max(1.0, abs(a_zz)):
                raise ValueError("A_zz inconsistent with A_tensor")
            if self.B_perp is None:
                object.__setattr__(self, "B_perp", b)
            elif abs(self.B_perp - b) > 1e-9 * max(1.0, b):
                raise ValueError("B_perp inconsistent with A_tensor")
        if self.A_zz is None or self.B_perp is None:
            raise ValueError("need A_tensor or both A_zz and B_perp")
        if self.B_perp < 0:
            raise ValueError("B_perp must be non-negative")

    @classmethod
    def from_tensor(cls, A) -> "HyperfineParams":
        return cls(A_tensor=np.asarray(A, dtype=float))


def _check_pair(i: int, j: int, n: int) -> None:
    check_spin_count(n)
    if i == j:
        raise ValueError(f"sites must differ, got {i} and {j}")
    for k in (i, j):
        if not 0 <= k < n:
            raise IndexError(f"site {k} out of range for {n} spins")


def bilinear(tensor, i: int, j: int, n: int) -> np.ndarray:
    """``sum_ab tensor[a, b] sigma_a^(i) sigma_b^(j)``."""
    tensor = np.asarray(tensor)
    si, sj = spin_vector(i, n), spin_vector(j, n)
    out = np.zeros((2**n, 2**n), dtype=complex)
    for a in range(3):
        for b in range(3):
            if tensor[a, b] != 0:
                out += tensor[a, b] * (si[a] @ sj[b])
    return out


def zeeman(gamma: float, B0: float, delta: float) -> np.ndarray:
    """Single-spin ``(gamma*B0 + delta)/2 * Z`` in rad/s."""
    return 0.5 * (gamma * B0 + delta) * pauli("Z")


def j_coupling(i: int, j: int, J, form: str = "weak-zz", n: int = 2,
               shift_difference_hz: float | None = None) -> np.ndarray:
    """J coupling between spins ``i`` and ``j`` with ``J`` in Hz.

    ``form="full-heisenberg"`` gives ``2*pi * sigma_i . J . sigma_j`` (scalar J means
    the isotropic tensor), ``form="weak-zz"`` gives ``2*pi*J Z_i Z_j``.  If the
    chemical-shift difference is supplied and is not much larger than J, the
    weak-coupling form triggers a warning.
    """
    _check_pair(i, j, n)
    if form == "weak-zz":
        if np.ndim(J) != 0:
            raise ValueError("weak-zz form takes a scalar J")
        if shift_difference_hz is not None and abs(shift_difference_hz) < WEAK_COUPLING_RATIO * abs(J):
            warnings.warn(
                f"weak-coupling reduction questionable: |shift difference| "
                f"{abs(shift_difference_hz):g} Hz is not >> J = {J:g} Hz",
                stacklevel=2,
            )
        return TWO_PI * J * (embed(pauli("Z"), i, n) @ embed(pauli("Z"), j, n))
    if form == "full-heisenberg":
        tensor = J * np.eye(3) if np.ndim(J) == 0 else np.asarray(J, dtype=float)
        if tensor.shape != (3, 3):
            raise ValueError("J tensor must be 3x3")
        return TWO_PI * bilinear(tensor, i, j, n)
    raise ValueError(f"unknown J-coupling form {form!r}")


def dipolar_coefficient(gamma_i: float, gamma_j: float, r: float) -> float:
    """``(mu0/4pi) hbar gamma_i gamma_j / r^3`` in rad/s."""
    return constants.mu_0 / (4 * math.pi) * constants.hbar * gamma_i * gamma_j / r**3


def dipolar_tensor(e) -> np.ndarray:
    e = np.asarray(e, dtype=float)
    return 3.0 * np.outer(e, e) - np.eye(3)


def dipolar(i: int, j: int, gammas, geom: DipolarGeometry, n: int) -> np.ndarray:
    """Direct dipolar coupling ``-d (3 (s_i.e)(s_j.e) - s_i.s_j)`` between two spins."""
    _check_pair(i, j, n)
    gamma_i, gamma_j = gammas
    d = dipolar_coefficient(gamma_i, gamma_j, geom.r_jk)
    return -d * bilinear(dipolar_tensor(geom.e_jk), i, j, n)


def hyperfine(params: HyperfineParams, electron_site: int, nuclear_site: int, n: int) -> np.ndarray:
    """``sigma_E . A . sigma_N`` for the stored hyperfine tensor."""
    _check_pair(electron_site, nuclear_site, n)
    if params.A_tensor is None:
        # secular frame: A_zz on zz, B_perp on zx
        A = np.zeros((3, 3))
        A[2, 2] = params.A_zz
        A[2, 0] = params.B_perp
    else:
        A = params.A_tensor
    return bilinear(A, electron_site, nuclear_site, n)


def effective_field(B0: float, params: HyperfineParams, gamma_N: float, electron_up: bool) -> np.ndarray:
    """Field (tesla) felt by the nucleus for a given electron orientation.

    ``(B0 +- A/2gamma_N) z +- (B/2gamma_N) x`` with ``+`` for an electron parallel
    to the external field.
    """
    if gamma_N == 0:
        raise ValueError("nuclear gyromagnetic ratio must be nonzero")
    s = 1.0 if electron_up else -1.0
    return np.array([
        s * params.B_perp / (2 * gamma_N),
        0.0,
        B0 + s * params.A_zz / (2 * gamma_N),
    ])


def system_hamiltonian(system: SpinSystem, frame_offsets: dict[int, float] | None = None) -> np.ndarray:
    """Rotating-frame internal Hamiltonian of a :class:`SpinSystem`, in rad/s.

    Each spin contributes ``pi * offset_hz * Z`` (the frame sits at the reference
    frequency, so the bare Larmor term drops).  ``frame_offsets`` maps a spin index
    to an extra frame shift in rad/s that is subtracted from its offset.
    """
    n = system.n
    frame_offsets = frame_offsets or {}
    H = np.zeros((2**n, 2**n), dtype=complex)
    for k, spin in enumerate(system.spins):
        delta = TWO_PI * spin.offset_hz - frame_offsets.get(k, 0.0)
        if delta:
            H += embed(zeeman(0.0, 0.0, delta), k, n)
    for c in system.couplings:
        p = c.parameters
        if c.kind == "J":
            H += j_coupling(c.i, c.j, p["J_hz"], p.get("form", "weak-zz"), n)
        elif c.kind == "dipolar":
            geom = DipolarGeometry(p["r_m"], tuple(p["e"]))
            gammas = (system.spins[c.i].gyromagnetic_ratio, system.spins[c.j].gyromagnetic_ratio)
            H += dipolar(c.i, c.j, gammas, geom, n)
        elif c.kind == "hyperfine":
            H += hyperfine(HyperfineParams.from_tensor(p["A_rad_s"]), c.i, c.j, n)
    return H


# --- JSON schema for spin systems -------------------------------------------------

SPIN_SYSTEM_UNITS = {
    "gyromagnetic_ratio": "rad/s/T",
    "offset": "Hz",
    "J": "Hz",
    "distance": "m",
    "hyperfine": "rad/s",
}


def spin_system_to_dict(system: SpinSystem, extra: dict | None = None) -> dict:
    out = {
        "units": dict(SPIN_SYSTEM_UNITS),
        "spins": [
            {"label": s.label, "gyromagnetic_ratio": s.gyromagnetic_ratio, "offset_hz": s.offset_hz}
            for s in system.spins
        ],
        "couplings": [
            {"i": c.i, "j": c.j, "kind": c.kind, "parameters": _jsonable(c.parameters)}
            for c in system.couplings
        ],
    }
    if extra:
        out.update(extra)
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def spin_system_from_dict(data: dict) -> SpinSystem:
    from .schemas import SpinSystemFile

    model = SpinSystemFile.model_validate(data)
    if model.units != SPIN_SYSTEM_UNITS:
        raise ValueError(f"unsupported units block {model.units}; expected {SPIN_SYSTEM_UNITS}")
    spins = tuple(Spin(s.label, s.gyromagnetic_ratio, s.offset_hz) for s in model.spins)
    couplings = tuple(Coupling(c.i, c.j, c.kind, dict(c.parameters)) for c in model.couplings)
    return SpinSystem(spins, couplings)


def load_spin_system(path) -> SpinSystem:
    return spin_system_from_dict(json.loads(Path(path).read_text()))


def dump_spin_system(system: SpinSystem, path) -> None:
    Path(path).write_text(json.dumps(spin_system_to_dict(system), indent=2) + "\n")


def _data_file(name: str) -> dict:
    return json.loads(resources.files("spinqip").joinpath("data").joinpath(name).read_text())


@dataclass(frozen=True)
class MalonicAcid:
    system: SpinSystem
    hamiltonian: np.ndarray
    T2_star_s: tuple[float, ...]
    T1_s: tuple[float, ...]


def malonic_acid_fixture() -> MalonicAcid:
    """Three 13C spins of malonic acid with weak-coupling ZZ interactions."""
    data = _data_file("malonic_acid.json")
    system = spin_system_from_dict(data)
    return MalonicAcid(
        system=system,
        hamiltonian=system_hamiltonian(system),
        T2_star_s=tuple(data["relaxation"]["T2_star_s"]),
        T1_s=tuple(data["relaxation"]["T1_s"]),
    )


def radical_1e2n_example() -> SpinSystem:
    return spin_system_from_dict(_data_file("radical_1e2n_example.json"))
