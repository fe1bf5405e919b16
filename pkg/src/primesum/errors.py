"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class OutOfRangeError(IndexError):
    """An index is not covered by the prime store."""


class MemoryBudgetError(MemoryError):
    """The requested prime count exceeds the configured memory budget."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature hit its depth cap before meeting the tolerance."""


class CacheFormatError(ValueError):
    """A prime cache file is malformed or fails its checksum."""


class NoThresholdError(ValueError):
    """No index in the scanned range satisfies the inequality."""


class DegenerateResidualWarning(UserWarning):
    """A residual was exactly zero and had to be left out of a log fit."""
