"""Dense spin-register linear algebra: Pauli operators, states, propagators and metrics.

Conventions
-----------
Hamiltonians are in angular frequency (rad/s) with hbar = 1, so a propagator is
``exp(-1j * H * t)`` with ``t`` in seconds.  Qubit 0 is the leftmost tensor factor,
and ``|0>`` is the +1 eigenstate of Z.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy import constants

MAX_SPINS = 12

HERMITIAN_RTOL = 1e-12
STATE_ATOL = 1e-12
PSD_ATOL = -1e-10

_PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DimensionCapError(ValueError):
    """Raised when a register would exceed the dense-matrix spin cap."""


def check_spin_count(n: int) -> None:
    if n < 1:
        raise ValueError(f"spin count must be >= 1, got {n}")
    if n > MAX_SPINS:
        raise DimensionCapError(
            f"dimension cap exceeded: {n} spins > {MAX_SPINS} (dense 2^n matrices only)"
        )


def pauli(axis: str) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` in {"I", "X", "Y", "Z"}."""
    try:
        return _PAULI[axis.upper()].copy()
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def embed(op: np.ndarray, site: int, n: int) -> np.ndarray:
    """Place a single-spin operator on ``site`` of an ``n``-spin register."""
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"embed expects a 2x2 operator, got shape {op.shape}")
    check_spin_count(n)
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} spins")
    left = np.eye(2**site, dtype=complex)
    right = np.eye(2 ** (n - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def pauli_string(ops: dict[int, str], n: int) -> np.ndarray:
    """Tensor product with Pauli ``ops[site]`` on the given sites, identity elsewhere."""
    check_spin_count(n)
    out = np.ones((1, 1), dtype=complex)
    for site in range(n):
        out = np.kron(out, _PAULI[ops.get(site, "I")])
    return out


def spin_vector(site: int, n: int) -> list[np.ndarray]:
    """[X_site, Y_site, Z_site] embedded in ``n`` spins."""
    return [embed(_PAULI[a], site, n) for a in "XYZ"]


def hermiticity_error(H: np.ndarray) -> float:
    """Relative Frobenius distance of ``H`` from its Hermitian conjugate."""
    norm = np.linalg.norm(H)
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(H - H.conj().T) / norm)


def is_hermitian(H: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    H = np.asarray(H)
    return H.ndim == 2 and H.shape[0] == H.shape[1] and hermiticity_error(H) <= rtol


def is_unitary(U: np.ndarray, atol_per_dim: float = 1e-10) -> bool:
    U = np.asarray(U)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        return False
    d = U.shape[0]
    return bool(np.linalg.norm(U.conj().T @ U - np.eye(d)) <= atol_per_dim * d)


def _require_hermitian(H: np.ndarray, what: str = "Hamiltonian") -> np.ndarray:
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {H.shape}")
    err = hermiticity_error(H)
    if err > HERMITIAN_RTOL:
        raise ValueError(f"{what} is not Hermitian (relative error {err:.3e})")
    return H


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` through the Hermitian eigendecomposition of ``H``."""
    H = _require_hermitian(H)
    # symmetrise away round-off so eigh sees an exactly Hermitian matrix
    evals, evecs = np.linalg.eigh(0.5 * (H + H.conj().T))
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def gate_fidelity(U: np.ndarray, V: np.ndarray) -> float:
    """Phase-insensitive overlap ``|Tr(U^dag V)|^2 / d^2``."""
    U = np.asarray(U)
    V = np.asarray(V)
    if U.shape != V.shape or U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"dimension mismatch: {U.shape} vs {V.shape}")
    d = U.shape[0]
    return float(abs(np.trace(U.conj().T @ V)) ** 2 / d**2)


@dataclass(frozen=True)
class QuantumState:
    """A pure state vector or a density matrix.

    ``pseudopure_alpha`` is set for states built by :func:`pseudopure` and records
    the weight of the pure component.
    """

    kind: Literal["pure-vector", "density-matrix"]
    data: np.ndarray = field(repr=False)
    pseudopure_alpha: Optional[float] = None

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        if self.kind == "pure-vector":
            if data.ndim != 1:
                raise ValueError("pure-vector data must be 1-D")
            norm = np.linalg.norm(data)
            if abs(norm - 1.0) > STATE_ATOL:
                raise ValueError(f"state vector norm {norm!r} is not 1")
        elif self.kind == "density-matrix":
            if data.ndim != 2 or data.shape[0] != data.shape[1]:
                raise ValueError("density matrix must be square")
            if np.linalg.norm(data - data.conj().T) > STATE_ATOL * max(1.0, np.linalg.norm(data)):
                raise ValueError("density matrix is not Hermitian")
            tr = np.trace(data).real
            if abs(tr - 1.0) > STATE_ATOL:
                raise ValueError(f"density matrix trace {tr!r} is not 1")
            if np.linalg.eigvalsh(data).min() < PSD_ATOL:
                raise ValueError("density matrix is not positive semidefinite")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        if self.pseudopure_alpha is not None and not 0.0 <= self.pseudopure_alpha <= 1.0:
            raise ValueError("pseudopure_alpha must lie in [0, 1]")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def pure(cls, vec) -> "QuantumState":
        return cls("pure-vector", np.asarray(vec, dtype=complex))

    @classmethod
    def density(cls, rho, pseudopure_alpha: Optional[float] = None) -> "QuantumState":
        return cls("density-matrix", np.asarray(rho, dtype=complex), pseudopure_alpha)

    @classmethod
    def basis(cls, bits: str) -> "QuantumState":
        """Computational basis state from a bit string, e.g. ``"010"``."""
        vec = np.zeros(2 ** len(bits), dtype=complex)
        vec[int(bits, 2)] = 1.0
        return cls.pure(vec)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def is_pure_vector(self) -> bool:
        return self.kind == "pure-vector"

    def density_matrix(self) -> np.ndarray:
        if self.is_pure_vector:
            return np.outer(self.data, self.data.conj())
        return np.array(self.data)

    def to_density(self) -> "QuantumState":
        if not self.is_pure_vector:
            return self
        return QuantumState.density(self.density_matrix(), self.pseudopure_alpha)


def pseudopure(n: int, alpha: float) -> QuantumState:
    """``(1 - alpha)/2^n * I + alpha * |0...0><0...0|``."""
    check_spin_count(n)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    d = 2**n
    rho = (1.0 - alpha) / d * np.eye(d, dtype=complex)
    rho[0, 0] += alpha
    return QuantumState.density(rho, pseudopure_alpha=alpha)


def thermal_bias(gamma: float, B0: float, T: float) -> float:
    """Ground-state bias ``tanh(hbar * gamma * B0 / (k_B * T))``.

    ``gamma`` in rad s^-1 T^-1, ``B0`` in tesla, ``T`` in kelvin.  The argument
    carries no factor 1/2; see the README for the convention note.
    """
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    return float(np.tanh(constants.hbar * gamma * B0 / (constants.k * T)))


def _check_density(rho: QuantumState) -> np.ndarray:
    if not isinstance(rho, QuantumState):
        rho = QuantumState.density(rho)
    if rho.is_pure_vector:
        raise ValueError("expected a density matrix")
    return np.asarray(rho.data)


def von_neumann_entropy(rho: QuantumState) -> float:
    """``-Tr(rho ln rho)`` in nats, with ``0 ln 0 = 0``."""
    data = _check_density(rho)
    p = np.clip(np.linalg.eigvalsh(data), 0.0, None)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def expectation(obs: np.ndarray, state: QuantumState) -> float:
    """Real expectation value of a Hermitian observable."""
    obs = _require_hermitian(obs, "observable")
    if obs.shape[0] != state.dim:
        raise ValueError(f"dimension mismatch: observable {obs.shape[0]} vs state {state.dim}")
    if state.is_pure_vector:
        val = np.vdot(state.data, obs @ state.data)
    else:
        val = np.trace(state.data @ obs)
    scale = max(1.0, float(np.linalg.norm(obs, 2)))
    if abs(val.imag) > 1e-10 * scale:
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


@dataclass(frozen=True)
class Spin:
    label: str
    gyromagnetic_ratio: float  # rad s^-1 T^-1
    offset_hz: float = 0.0


@dataclass(frozen=True)
class Coupling:
    """Pairwise interaction record.

    ``parameters`` by kind:

    * ``J``: ``{"J_hz": float | 3x3, "form": "weak-zz" | "full-heisenberg"}``
    * ``dipolar``: ``{"r_m": float, "e": [ex, ey, ez]}``
    * ``hyperfine``: ``{"A_rad_s": 3x3}`` with ``i`` the electron, ``j`` the nucleus
    """

    i: int
    j: int
    kind: Literal["J", "dipolar", "hyperfine"]
    parameters: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SpinSystem:
    spins: tuple[Spin, ...]
    couplings: tuple[Coupling, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "spins", tuple(self.spins))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        check_spin_count(len(self.spins))
        labels = [s.label for s in self.spins]
        if len(set(labels)) != len(labels):
            raise ValueError(f"spin labels must be unique: {labels}")
        seen = set()
        for c in self.couplings:
            if c.kind not in ("J", "dipolar", "hyperfine"):
                raise ValueError(f"unknown coupling kind {c.kind!r}")
            if c.i == c.j:
                raise ValueError(f"coupling indices must differ, got ({c.i}, {c.j})")
            for k in (c.i, c.j):
                if not 0 <= k < len(self.spins):
                    raise IndexError(f"coupling index {k} out of range")
            key = (c.kind, min(c.i, c.j), max(c.i, c.j))
            if c.kind == "J" and key in seen:
                raise ValueError(f"duplicate J coupling between {c.i} and {c.j}")
            seen.add(key)

    @property
    def n(self) -> int:
        return len(self.spins)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.spins]

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def subsystem(self, labels) -> "SpinSystem":
        """Keep only the named spins and the couplings among them."""
        keep = [self.index(lab) for lab in labels]
        remap = {old: new for new, old in enumerate(keep)}
        couplings = [
            Coupling(remap[c.i], remap[c.j], c.kind, dict(c.parameters))
            for c in self.couplings
            if c.i in remap and c.j in remap
        ]
        return SpinSystem(tuple(self.spins[k] for k in keep), tuple(couplings))
