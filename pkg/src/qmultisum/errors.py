"""Exception hierarchy shared by all modules."""


class QSummationError(Exception):
    """Base class for every error raised by this package."""


class BackendMismatchError(QSummationError, TypeError):
    """Exact and float scalars were combined in one expression."""


class PoleError(QSummationError, ZeroDivisionError):
    """A denominator factor vanished (exact) or fell below the pole floor (float)."""


class NoConvergenceError(QSummationError):
    """A truncated product/series did not settle within the configured term cap."""


class RangeError(QSummationError, IndexError):
    """A table-backed sequence was evaluated outside its declared index window."""


class InfiniteDomainError(QSummationError):
    """Direct iteration was requested for an infinite summation domain."""


class ConstraintViolatedError(QSummationError):
    """A validity constraint of an identity (convergence, schema bound) fails."""


class SamplingExhaustedError(QSummationError):
    """Rejection sampling hit the attempt cap without an admissible assignment."""


class SchemaError(QSummationError):
    """A parameter assignment or series spec does not match the expected shape."""
