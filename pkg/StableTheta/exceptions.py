"""
StableTheta Error Types
All errors raised by the library derive from StableThetaError
"""

from typing import Optional


class StableThetaError(Exception):
    """Base class for StableTheta errors"""


class ConfigurationError(StableThetaError):
    """Invalid run configuration or configuration file"""


class DimensionMismatchError(StableThetaError, ValueError):
    """Vector or matrix sizes do not fit together"""


class InvalidFormError(StableThetaError, ValueError):
    """A Gram matrix that cannot be used as a quadratic form"""


class InvalidIndexError(StableThetaError, ValueError):
    """A matrix that is not a valid Fourier index"""


class ConstructionError(StableThetaError):
    """A built-in lattice failed its construction-time verification"""


class CoherenceError(StableThetaError):
    """Expansions that are not linked by the Siegel operator"""


class CacheFormatError(StableThetaError):
    """A cache file with an unknown header, bad ordering or bad checksum"""


class BudgetExceededError(StableThetaError):
    """The enumeration node budget ran out"""

    def __init__(self, nodes_used: int, limit: int, message: Optional[str] = None):
        self.nodes_used = nodes_used
        self.limit = limit
        super().__init__(message or f"node budget exhausted: {nodes_used} nodes used, limit {limit}")


class SingularActionError(StableThetaError):
    """CZ+D is singular or too badly conditioned to invert"""

    def __init__(self, condition_number: float, limit: float):
        self.condition_number = condition_number
        self.limit = limit
        super().__init__(f"CZ+D is ill-conditioned: cond = {condition_number:.3e} exceeds {limit:.1e}")


class ConvergenceError(StableThetaError):
    """A limit schedule whose successive differences do not decrease"""
