"""Fixed-step integration and the Trajectory container shared by all engines."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .exceptions import EnergyDriftError, NumericalFailure
from .models import IntegratorConfig, IntegratorScheme
from .spin_rep import ComplexArray, RealArray, SpinOperators, SpinSize

logger = logging.getLogger(__name__)

VectorField = Callable[[RealArray], RealArray]
StepCheck = Callable[[float, RealArray], None]


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled evolution with per-sample observables.

    Phase-space flows fill ``q``/``p``; quantum engines fill ``states`` and
    ``phi_constraint``.
    """

    label: str
    times: RealArray
    jx: RealArray
    jy: RealArray
    jz: RealArray
    energy: RealArray
    q: Optional[RealArray] = None
    p: Optional[RealArray] = None
    states: Optional[ComplexArray] = None
    phi_constraint: Optional[RealArray] = None

    def __post_init__(self) -> None:
        n = self.times.shape[0]
        for name in ("jx", "jy", "jz", "energy", "q", "p", "states", "phi_constraint"):
            array = getattr(self, name)
            if array is None:
                continue
            if array.shape[0] != n:
                raise ValueError(f"Trajectory field {name} has {array.shape[0]} samples, expected {n}")
            array.setflags(write=False)
        self.times.setflags(write=False)

    def __len__(self) -> int:
        return int(self.times.shape[0])

    @property
    def energy_drift(self) -> float:
        return float(np.max(np.abs(self.energy - self.energy[0])))


def rk4_step(f: VectorField, y: RealArray, h: float) -> RealArray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def implicit_midpoint_step(
    f: VectorField, y: RealArray, h: float, tol: float = 1e-14, max_iter: int = 100
) -> RealArray:
    """y1 = y + h f((y + y1)/2), solved by fixed-point iteration"""
    y_next = y + h * f(y)
    for _ in range(max_iter):
        candidate = y + h * f(0.5 * (y + y_next))
        change = float(np.max(np.abs(candidate - y_next)))
        y_next = candidate
        if change <= tol * max(1.0, float(np.max(np.abs(y)))):
            return y_next
    raise NumericalFailure(
        f"Implicit midpoint iteration did not converge in {max_iter} iterations (step {h})"
    )


def sample_times(t_final: float, n_samples: int) -> RealArray:
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    return np.linspace(0.0, t_final, n_samples)


def integrate_fixed_step(
    f: VectorField,
    y0: RealArray,
    t_final: float,
    n_samples: int,
    config: IntegratorConfig,
    step_check: Optional[StepCheck] = None,
) -> Tuple[RealArray, RealArray]:
    """Integrate y' = f(y) and return the samples at n_samples uniform times.

    Each sample interval is split into equal sub-steps no longer than config.step.

    Returns:
        times of shape (n_samples,) and states of shape (n_samples, len(y0)).
    """
    times = sample_times(t_final, n_samples)
    interval = t_final / (n_samples - 1)
    substeps = max(1, math.ceil(interval / config.step - 1e-9))
    h = interval / substeps
    if not math.isclose(h, config.step, rel_tol=1e-9):
        logger.debug(f"Step adjusted from {config.step} to {h} ({substeps} per sample)")

    stepper = rk4_step if config.scheme is IntegratorScheme.RK4 else implicit_midpoint_step

    samples = np.empty((n_samples, y0.shape[0]), dtype=float)
    y = np.array(y0, dtype=float)
    samples[0] = y
    for i in range(1, n_samples):
        for k in range(substeps):
            y = stepper(f, y, h)
            if step_check is not None:
                step_check(times[i - 1] + (k + 1) * h, y)
        samples[i] = y

    return times, samples


def check_energy_drift(
    trajectory: Trajectory, config: IntegratorConfig, t_final: float, spin: SpinSize
) -> None:
    """Raise EnergyDriftError when |H(t) - H(0)|/J^2 exceeds energy_tolerance * max(t_final, 1).

    Energies are compared on the J^2-normalized scale H/J^2.
    """
    allowed = config.energy_tolerance * max(t_final, 1.0)
    drift = trajectory.energy_drift / (spin.j * spin.j)
    if drift > allowed:
        raise EnergyDriftError(
            f"{trajectory.label}: normalized energy drift {drift:.3e} exceeds {allowed:.3e} "
            f"(step {config.step}, scheme {config.scheme.value}); reduce the step"
        )
    logger.debug(f"{trajectory.label}: energy drift {drift:.3e} (allowed {allowed:.3e})")


def sample_state_observables(
    ops: SpinOperators, states: ComplexArray, h_matrix: ComplexArray
) -> Tuple[RealArray, RealArray, RealArray, RealArray, RealArray]:
    """<Jx>, <Jy>, <Jz>, <H> and Phi for each row of ``states``"""
    means = []
    fluctuation = np.zeros(states.shape[0])
    for component in ops.components:
        image = states @ component.T
        mean = np.einsum("ij,ij->i", states.conj(), image).real
        second = np.einsum("ij,ij->i", image.conj(), image).real
        fluctuation += np.maximum(second - mean * mean, 0.0)
        means.append(mean)
    energy = np.einsum("ij,ij->i", states.conj(), states @ h_matrix.T).real
    phi = np.maximum(fluctuation - ops.spin.j, 0.0)
    return means[0], means[1], means[2], energy, phi
