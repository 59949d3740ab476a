"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its allowed range."""


class InvalidInputError(ValueError):
    """An input array violates a structural precondition (shape, symmetry, finiteness)."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its iteration budget."""


class OutsideSupportError(ValueError):
    """Requested point lies outside the spectral support."""


class SingularityError(ValueError):
    """Evaluation too close to a pole of a closed-form expression."""


class StepSizeError(RuntimeError):
    """Finite-difference step failed its convergence ratio test."""


class InsufficientDataError(ValueError):
    """Not enough accumulated samples/batches to form the requested statistic."""


class UnsupportedOrderError(ValueError):
    """Correlation order outside the implemented range."""


class ConfigError(ValueError):
    """Run configuration is inconsistent or incomplete."""


class SnapshotError(ValueError):
    """Accumulator snapshot is malformed or incompatible."""
