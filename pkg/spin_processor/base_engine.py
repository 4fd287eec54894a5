from abc import ABC, abstractmethod

from .coherent import PhasePoint
from .integrators import Trajectory
from .spin_rep import HamiltonianParams, SpinSize


class EvolutionEngine(ABC):
    """Evolves the coherent state at a phase point under H = eps Jz - lambda Jx + mu Jz^2"""

    name: str = "engine"

    def __init__(self, params: HamiltonianParams, spin: SpinSize) -> None:
        self.params = params
        self.spin = spin

    @abstractmethod
    def evolve(self, initial: PhasePoint, t_final: float, n_samples: int) -> Trajectory:
        """Evolve from the coherent state at ``initial``

        Args:
            initial (PhasePoint): Initial point of the sphere
            t_final (float): Final time
            n_samples (int): Number of uniform samples, endpoints included

        Returns:
            Trajectory: Sampled observables
        """
        raise NotImplementedError
