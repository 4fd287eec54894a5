import logging
import math

import numpy as np

from .base_engine import EvolutionEngine
from .coherent import PhasePoint, canonical_spin_vector
from .dynamics import FlowKind, flow_rhs, spin_flow_rhs, spin_hamiltonian
from .exceptions import OffDiskExcursionError
from .integrators import Trajectory, check_energy_drift, integrate_fixed_step
from .models import IntegratorConfig
from .spin_rep import HamiltonianParams, RealArray, SpinSize

logger = logging.getLogger(__name__)

# relative change of |S| allowed per unit time
RADIUS_TOL = 1e-6


def integrate_flow(
    which: FlowKind,
    q0: float,
    p0: float,
    params: HamiltonianParams,
    j: SpinSize,
    config: IntegratorConfig,
    t_final: float,
    n_samples: int,
) -> Trajectory:
    """Integrate the reduced or classical flow and sample it on the canonical disk.

    The flow is integrated as dS/dt = grad H x S for the mean spin S, which is
    regular at the north pole, and every sample is mapped back to (q, p). The pole
    itself lands on the rim q^2 + p^2 = 4J with p = 0. A step that moves S off the
    sphere |S| = J is reported, never clamped.

    Raises:
        OffDiskError: if (q0, p0) is not strictly inside the disk.
        OffDiskExcursionError: if the integration leaves the sphere.
        EnergyDriftError: if the energy drifts beyond the configured tolerance.
    """
    which = FlowKind(which)
    # validates the initial point
    flow_rhs(which, q0, p0, params, j)
    s0 = np.array(canonical_spin_vector(q0, p0, j))
    allowed = RADIUS_TOL * max(t_final, 1.0)

    def vector_field(s: RealArray) -> RealArray:
        return spin_flow_rhs(which, s, params, j)

    def step_check(t: float, s: RealArray) -> None:
        radius = float(np.linalg.norm(s))
        if not math.isfinite(radius) or abs(radius / j.j - 1.0) > allowed:
            raise OffDiskExcursionError(
                f"{which.value} flow left the disk at t={t:.6g}: |S| = {radius}, J = {j.j}"
            )

    times, samples = integrate_fixed_step(vector_field, s0, t_final, n_samples, config, step_check)

    spins = j.j * samples / np.linalg.norm(samples, axis=1)[:, None]
    cos_theta = np.clip(spins[:, 2] / j.j, -1.0, 1.0)
    radius = np.sqrt(2.0 * j.j * (1.0 + cos_theta))
    azimuth = np.arctan2(spins[:, 1], spins[:, 0])

    trajectory = Trajectory(
        label=which.value,
        times=times,
        jx=spins[:, 0],
        jy=spins[:, 1],
        jz=spins[:, 2],
        energy=spin_hamiltonian(which, spins, params, j),
        q=radius * np.cos(azimuth),
        p=-radius * np.sin(azimuth),
    )
    check_energy_drift(trajectory, config, t_final, j)
    logger.debug(f"{which.value} flow J={j}: {n_samples} samples up to t={t_final}")
    return trajectory


class PhaseFlowEngine(EvolutionEngine):
    """Reduced (constrained coherent-state) or classical flow on the sphere"""

    def __init__(
        self,
        params: HamiltonianParams,
        spin: SpinSize,
        config: IntegratorConfig,
        which: FlowKind = FlowKind.REDUCED,
    ) -> None:
        super().__init__(params, spin)
        self.config = config
        self.which = FlowKind(which)
        self.name = self.which.value

    def evolve(self, initial: PhasePoint, t_final: float, n_samples: int) -> Trajectory:
        q0, p0 = initial.canonical(self.spin)
        return self.evolve_canonical(q0, p0, t_final, n_samples)

    def evolve_canonical(self, q0: float, p0: float, t_final: float, n_samples: int) -> Trajectory:
        return integrate_flow(
            self.which, q0, p0, self.params, self.spin, self.config, t_final, n_samples
        )
