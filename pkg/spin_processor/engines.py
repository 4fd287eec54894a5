# Import all evolution engines
from .base_engine import EvolutionEngine
from .exact_engine import ExactEngine
from .schrodinger_engine import SchrodingerFlowEngine
from .phase_flow_engine import PhaseFlowEngine

# Export all engines
__all__ = [
    'EvolutionEngine',
    'ExactEngine',
    'SchrodingerFlowEngine',
    'PhaseFlowEngine',
]
