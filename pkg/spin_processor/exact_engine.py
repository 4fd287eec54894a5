import logging
from typing import Optional

import numpy as np
import scipy.linalg

from .base_engine import EvolutionEngine
from .coherent import PhasePoint, coherent_state_at
from .config import Config
from .exceptions import (
    DimensionMismatchError,
    EigendecompositionError,
    NonHermitianError,
    NumericalFailure,
)
from .integrators import Trajectory, sample_state_observables, sample_times
from .spin_rep import (
    ComplexArray,
    SpinOperators,
    StateVector,
    build_hamiltonian,
    check_normalized,
    hermiticity_residual,
    spin_operators,
)

logger = logging.getLogger(__name__)

UNITARITY_TOL = 1e-10


def exact_propagate(
    h_matrix: ComplexArray,
    psi0: StateVector,
    t_final: float,
    n_samples: int,
    ops: SpinOperators,
    hermitian_tol: Optional[float] = None,
) -> Trajectory:
    """psi(t) = exp(-iHt) psi0 through the spectral decomposition of H.

    Records <J>, <H> and the constraint value Phi at every sample.
    """
    hermitian_tol = Config.HERMITIAN_TOL if hermitian_tol is None else hermitian_tol
    if h_matrix.shape != (ops.spin.dim, ops.spin.dim) or psi0.shape != (ops.spin.dim,):
        raise DimensionMismatchError(
            f"Shapes {h_matrix.shape} and {psi0.shape} do not match J={ops.spin} (dim {ops.spin.dim})"
        )
    residual = hermiticity_residual(h_matrix)
    if residual > hermitian_tol:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (residual {residual:.3e})")
    check_normalized(psi0)
    times = sample_times(t_final, n_samples)

    try:
        energies, vectors = scipy.linalg.eigh(h_matrix)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise EigendecompositionError(f"Eigendecomposition of H failed: {e}") from e
    logger.debug(f"Spectral propagator for dim {ops.spin.dim}, {n_samples} samples")

    coefficients = vectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(times, energies))
    states = (phases * coefficients) @ vectors.T
    states[0] = psi0

    norm_error = float(np.max(np.abs(np.linalg.norm(states, axis=1) - 1.0)))
    if norm_error > UNITARITY_TOL:
        raise NumericalFailure(f"Spectral propagation lost unitarity: norm error {norm_error:.3e}")

    jx, jy, jz, energy, phi = sample_state_observables(ops, states, h_matrix)
    return Trajectory(
        label="exact",
        times=times,
        jx=jx,
        jy=jy,
        jz=jz,
        energy=energy,
        states=states,
        phi_constraint=phi,
    )


class ExactEngine(EvolutionEngine):
    name = "exact"

    def evolve(self, initial: PhasePoint, t_final: float, n_samples: int) -> Trajectory:
        ops = spin_operators(self.spin)
        h_matrix = build_hamiltonian(self.params, ops)
        psi0 = coherent_state_at(initial, self.spin)
        return exact_propagate(h_matrix, psi0, t_final, n_samples, ops)
