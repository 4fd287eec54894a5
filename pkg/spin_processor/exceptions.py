"""Exceptions raised by the spin processor."""


class SpinProcessorError(Exception):
    """Base class for all errors raised by this package"""


class InvalidStateError(SpinProcessorError, ValueError):
    """An operator or state vector violates a precondition"""


class DimensionMismatchError(InvalidStateError):
    pass


class NonHermitianError(InvalidStateError):
    pass


class NormalizationError(InvalidStateError):
    pass


class PoleError(SpinProcessorError, ValueError):
    """A chart was evaluated at its pole"""


class OffDiskError(SpinProcessorError, ValueError):
    """A canonical point (q, p) lies outside the disk q^2 + p^2 <= 4J, or too close to its rim"""


class UndefinedRepresentativeError(SpinProcessorError, ValueError):
    """The state has <J> = 0, so its equivalence class has no coherent representative"""


class NumericalFailure(SpinProcessorError, RuntimeError):
    """An integration or decomposition did not meet its accuracy contract"""


class EnergyDriftError(NumericalFailure):
    pass


class OffDiskExcursionError(NumericalFailure):
    pass


class EigendecompositionError(NumericalFailure):
    pass


class ExperimentConfigError(SpinProcessorError, ValueError):
    pass


class OutputError(SpinProcessorError, OSError):
    pass
