"""Exception types shared across the package."""


class NonDivisibleGeometry(ValueError):
    """Object dimensions are not an exact multiple of the detector bin factor."""


class DimensionMismatch(ValueError):
    """Operands have incompatible shapes for the requested operation."""


class InsufficientSamples(ValueError):
    """Too few samples to form the requested statistic."""


class NonConvergence(RuntimeError):
    """Iterative solver exhausted its budget before reaching tolerance."""


class InfeasibleProblem(RuntimeError):
    """A quantity is undefined because one of its terms is infinite."""


class BisectionFailure(RuntimeError):
    """Root bracketing failed; a monotonicity assumption does not hold."""


class ConfigError(ValueError):
    """Experiment configuration file is malformed or inconsistent."""
