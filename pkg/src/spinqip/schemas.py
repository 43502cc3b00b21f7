"""Pydantic models for every JSON file the package reads."""
from __future__ import annotations

from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .core import MAX_SPINS


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# --- spin systems -----------------------------------------------------------------

class SpinEntry(_Strict):
    label: str
    gyromagnetic_ratio: float
    offset_hz: float = 0.0


class CouplingEntry(_Strict):
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    kind: Literal["J", "dipolar", "hyperfine"]
    parameters: dict

    @model_validator(mode="after")
    def _check_parameters(self):
        need = {"J": {"J_hz"}, "dipolar": {"r_m", "e"}, "hyperfine": {"A_rad_s"}}[self.kind]
        missing = need - set(self.parameters)
        if missing:
            raise ValueError(f"{self.kind} coupling missing parameters {sorted(missing)}")
        return self


class SpinSystemFile(BaseModel):
    # extra top-level keys (name, relaxation, note) are allowed in fixture files
    model_config = ConfigDict(extra="allow")

    units: dict[str, str]
    spins: list[SpinEntry] = Field(min_length=1)
    couplings: list[CouplingEntry] = []

    @field_validator("spins")
    @classmethod
    def _cap(cls, v):
        if len(v) > MAX_SPINS:
            raise ValueError(f"dimension cap exceeded: {len(v)} spins > {MAX_SPINS}")
        return v


# --- run configuration --------------------------------------------------------------

class GrapeParams(_Strict):
    task: Literal["x90", "cz-malonic"] = "x90"
    n_steps: Optional[int] = Field(None, ge=1, description="default 50 (x90) or 60 (cz-malonic)")
    duration_s: Optional[float] = Field(None, gt=0, description="default 0.5 ms (x90) or 1/(2J) (cz-malonic)")
    omega_max_hz: Optional[float] = Field(None, gt=0, description="amplitude bound in Hz; default 5 kHz / 10 kHz")
    max_iters: int = Field(500, ge=0)
    epsilon: Optional[float] = Field(None, gt=0)
    threshold: float = Field(1e-12, ge=0)
    power_penalty: float = Field(0.0, ge=0)
    n_starts: int = Field(1, ge=1)
    rf_scales: list[float] = Field(default_factory=lambda: [1.0], min_length=1)


SequenceName = Literal["free", "cpmg", "udd", "xy4", "cdd", "qdd", "cudd"]


class DDBenchParams(_Strict):
    sequences: list[SequenceName] = Field(default_factory=lambda: ["free", "cpmg", "udd"], min_length=1)
    order: int = Field(6, ge=1, description="pulse count (cpmg), order (udd, qdd) or level (cdd, cudd)")
    noise_kind: Literal["ornstein-uhlenbeck", "hard-cutoff"] = "ornstein-uhlenbeck"
    sigma_hz: float = Field(2.0, ge=0, description="rms frequency shift in Hz")
    tau_c_s: float = Field(100.0, gt=0)
    durations_s: list[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75, 1.0], min_length=1)
    n_traj: int = Field(400, ge=1)
    grid_steps: int = Field(256, ge=1)
    n_modes: int = Field(64, ge=1)

    @field_validator("sequences")
    @classmethod
    def _unique(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("sequence names must be unique")
        return v

    @field_validator("durations_s")
    @classmethod
    def _positive(cls, v):
        if any(not t > 0 for t in v):
            raise ValueError("durations must be positive")
        return v


class IsingScanParams(_Strict):
    J: float = Field(1.0, gt=0)
    h_min: float = -4.0
    h_max: float = 4.0
    n_h: int = Field(81, ge=1)
    T_min: float = Field(0.05, gt=0)
    T_max: float = Field(2.0, gt=0)
    n_T: int = Field(40, ge=1)

    @model_validator(mode="after")
    def _ranges(self):
        if self.h_max < self.h_min or self.T_max < self.T_min:
            raise ValueError("grid maxima must not be below minima")
        return self


class FanoParams(_Strict):
    eps_k: float = Field(2.0, description="conduction-mode energy, rad/s")
    eps: float = Field(1.0, description="impurity energy, rad/s")
    V: float = Field(0.5, description="hybridisation, rad/s")
    t_max: float = Field(100.0, gt=0)
    n_samples: int = Field(512, ge=4)
    n_g_points: int = Field(50, ge=1)


class BurgersParams(_Strict):
    n_nodes: int = Field(16, ge=4)
    u0: float = Field(0.2, gt=0)
    cot_theta: float = Field(0.8, gt=0)
    steps: Optional[int] = Field(None, ge=0, description="default: last step before the shock time")
    readout_noise: float = Field(0.0, ge=0)


class ParticleParams(_Strict):
    m: int = Field(8, ge=1, description="qubits per degree of freedom")
    n_dof: int = Field(1, ge=1, le=2)
    x_min: float = -10.0
    x_max: float = 10.0
    dt: float = Field(1e-3, gt=0)
    steps: int = Field(6283, ge=1)
    mass: float = Field(1.0, gt=0)
    omega: float = Field(1.0, gt=0)
    coupling: float = Field(0.0, description="x1 x2 coupling strength (two degrees of freedom)")
    x0: float = 1.0
    record_every: int = Field(100, ge=1)

    @model_validator(mode="after")
    def _window(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        return self


class AdiabaticParams(_Strict):
    n_qubits: int = Field(3, ge=1)
    taus: list[float] = Field(default_factory=lambda: [0.5, 2.0, 8.0, 32.0], min_length=1)
    n_steps: int = Field(400, ge=1)

    @field_validator("taus")
    @classmethod
    def _nonneg(cls, v):
        if any(t < 0 for t in v):
            raise ValueError("taus must be non-negative")
        return v


PARAMETER_MODELS: dict[str, type[BaseModel]] = {
    "grape": GrapeParams,
    "dd-bench": DDBenchParams,
    "sim-ising": IsingScanParams,
    "sim-fano": FanoParams,
    "sim-burgers": BurgersParams,
    "sim-particle": ParticleParams,
    "adiabatic": AdiabaticParams,
}

ExperimentName = Literal["grape", "dd-bench", "sim-ising", "sim-fano", "sim-burgers",
                         "sim-particle", "adiabatic"]


class RunConfig(_Strict):
    experiment: ExperimentName
    parameters: dict = Field(default_factory=dict)
    seed: int = Field(0, ge=0)
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def _check_parameters(self):
        PARAMETER_MODELS[self.experiment].model_validate(self.parameters)
        return self

    def typed_parameters(self):
        return PARAMETER_MODELS[self.experiment].model_validate(self.parameters)


def physics_diagnostics(cfg: RunConfig) -> list[str]:
    """Sanity checks beyond the schema; an empty list means the config is runnable."""
    p = cfg.typed_parameters()
    out = []
    if isinstance(p, AdiabaticParams) and p.n_qubits > MAX_SPINS:
        out.append(f"parameters.n_qubits: dimension cap exceeded ({p.n_qubits} > {MAX_SPINS} spins)")
    if isinstance(p, ParticleParams) and p.m * p.n_dof > 2 * MAX_SPINS:
        out.append(f"parameters.m: dimension cap exceeded ({p.m * p.n_dof} grid qubits)")
    if isinstance(p, BurgersParams):
        rho_span = p.u0 / p.cot_theta
        if rho_span >= 1.0:
            out.append("parameters.u0: u0 / cot_theta must stay below 1 to keep occupancies in [0, 1]")
    if isinstance(p, FanoParams):
        nyquist = 3.141592653589793 * p.n_samples / p.t_max
        if max(abs(p.eps_k), abs(p.eps)) + abs(p.V) >= nyquist:
            out.append("parameters.n_samples: sampling too coarse, spectrum peaks would alias")
    return out
