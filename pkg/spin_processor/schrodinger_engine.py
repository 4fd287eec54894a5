import logging
from typing import Optional

import numpy as np

from .base_engine import EvolutionEngine
from .coherent import PhasePoint, coherent_state_at
from .config import Config
from .exceptions import NonHermitianError
from .integrators import (
    Trajectory,
    check_energy_drift,
    integrate_fixed_step,
    sample_state_observables,
)
from .models import IntegratorConfig
from .spin_rep import (
    ComplexArray,
    HamiltonianParams,
    RealArray,
    SpinOperators,
    SpinSize,
    StateVector,
    build_hamiltonian,
    check_normalized,
    hermiticity_residual,
    spin_operators,
    to_real_coords,
)

logger = logging.getLogger(__name__)

SQRT2 = np.sqrt(2.0)


def schrodinger_real_flow(
    h_matrix: ComplexArray,
    psi0: StateVector,
    config: IntegratorConfig,
    t_final: float,
    ops: SpinOperators,
    n_samples: Optional[int] = None,
) -> Trajectory:
    """Hamilton's equations dx/dt = dH/dy, dy/dt = -dH/dx for H(x, y) = <psi|H|psi>.

    Args:
        n_samples: Defaults to one sample per integrator step.

    Raises:
        EnergyDriftError: when <H> drifts beyond the configured tolerance.
    """
    residual = hermiticity_residual(h_matrix)
    if residual > Config.HERMITIAN_TOL:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (residual {residual:.3e})")
    check_normalized(psi0)
    if n_samples is None:
        n_samples = max(2, int(round(t_final / config.step)) + 1)

    n = psi0.shape[0]

    def vector_field(v: RealArray) -> RealArray:
        image = h_matrix @ ((v[:n] + 1j * v[n:]) / SQRT2)
        # gradient of <H> is sqrt(2) (Re, Im) of H psi
        return np.concatenate([SQRT2 * image.imag, -SQRT2 * image.real])

    times, samples = integrate_fixed_step(
        vector_field, to_real_coords(psi0), t_final, n_samples, config
    )
    states = (samples[:, :n] + 1j * samples[:, n:]) / SQRT2

    jx, jy, jz, energy, phi = sample_state_observables(ops, states, h_matrix)
    trajectory = Trajectory(
        label="schrodinger",
        times=times,
        jx=jx,
        jy=jy,
        jz=jz,
        energy=energy,
        states=states,
        phi_constraint=phi,
    )
    check_energy_drift(trajectory, config, t_final, ops.spin)
    return trajectory


class SchrodingerFlowEngine(EvolutionEngine):
    name = "schrodinger"

    def __init__(
        self, params: HamiltonianParams, spin: SpinSize, config: IntegratorConfig
    ) -> None:
        super().__init__(params, spin)
        self.config = config

    def evolve(self, initial: PhasePoint, t_final: float, n_samples: int) -> Trajectory:
        ops = spin_operators(self.spin)
        h_matrix = build_hamiltonian(self.params, ops)
        psi0 = coherent_state_at(initial, self.spin)
        return schrodinger_real_flow(h_matrix, psi0, self.config, t_final, ops, n_samples)
