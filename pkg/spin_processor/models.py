"""Validated parameter, configuration and report models."""

import math
from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import Config
from .spin_rep import HamiltonianParams, SpinSize

__all__ = [
    "HamiltonianParams",
    "IntegratorScheme",
    "IntegratorConfig",
    "ExperimentConfig",
    "SpinReport",
    "ComparisonReport",
]


class IntegratorScheme(str, Enum):
    RK4 = "rk4"
    MIDPOINT = "midpoint"


class IntegratorConfig(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    step: float = Field(default=Config.DEFAULT_STEP, gt=0)
    scheme: IntegratorScheme = IntegratorScheme.RK4
    # allowed |H(t) - H(0)| per unit time
    energy_tolerance: float = Field(default=Config.ENERGY_TOL, gt=0)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    j_list: List[SpinSize] = Field(min_length=1)
    params: HamiltonianParams = HamiltonianParams()
    t_final: float = Field(default=10.0, gt=0)
    n_samples: int = Field(default=1001, ge=2)
    theta: Optional[float] = None
    phi: Optional[float] = None
    q0: Optional[float] = None
    p0: Optional[float] = None
    integrator: IntegratorConfig = IntegratorConfig()
    output_dir: Path = Config.DEFAULT_OUTPUT_DIR
    emit_svg: bool = False
    seed: Optional[int] = None
    # short-time window for exact-vs-reduced deviations
    window: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_initial_condition(self) -> "ExperimentConfig":
        spherical = (self.theta, self.phi)
        canonical = (self.q0, self.p0)
        if any(v is not None for v in spherical) and any(v is not None for v in canonical):
            raise ValueError("Give either theta/phi or q0/p0 as the initial condition, not both")
        if any(v is not None for v in spherical) and None in spherical:
            raise ValueError("theta and phi must be given together")
        if any(v is not None for v in canonical) and None in canonical:
            raise ValueError("q0 and p0 must be given together")
        if self.theta is not None and not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        return self

    def sorted_spins(self) -> List[SpinSize]:
        return sorted(set(self.j_list), key=lambda s: s.two_j)


class SpinReport(BaseModel):
    """Diagnostics of a single spin size"""

    j: float
    two_j: int
    max_abs_deviation: float = Field(ge=0)
    quantum_deviation: Optional[float] = Field(default=None, ge=0)
    constraint_drift: Optional[float] = Field(default=None, ge=0)
    max_dispersion_ratio: Optional[float] = Field(default=None, ge=0)
    energy_drift_reduced: float = Field(default=0.0, ge=0)
    energy_drift_classical: float = Field(default=0.0, ge=0)


class ComparisonReport(BaseModel):
    experiment: str
    params: HamiltonianParams
    t_final: float
    spins: List[SpinReport]

    def deviations(self) -> List[float]:
        return [entry.max_abs_deviation for entry in self.spins]
