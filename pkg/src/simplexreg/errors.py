"""Exception types raised across the package.

All validation failures derive from ValueError so callers that do not care
about the fine-grained kind can catch the usual builtin.  Runtime failures
(non-convergence, degenerate kernel weights, tuning with no feasible cell)
derive from RuntimeError.
"""


class SimplexRegError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SimplexRegError, ValueError):
    """Malformed input: wrong shape, non-finite values, bad parameter."""


class DegenerateInputError(ValidationError):
    """Input that is structurally valid but carries no information
    (all-zero vector, empty matrix, all-zero weight vector)."""


class ZeroNotAllowedError(ValidationError):
    """A zero component reached an operation that requires strictly
    positive parts (log-ratio transforms, non-positive power exponents)."""


class OutOfRangeError(ValidationError):
    """A value escaped the mathematical domain of an inverse map,
    e.g. a negative pre-image component in the inverse power transform."""


class ConvergenceError(SimplexRegError, RuntimeError):
    """Iterative fit exhausted its iteration budget.

    Attributes
    ----------
    model : object or None
        Last iterate, exposed for diagnostics.
    """

    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model


class DegenerateWeightsError(SimplexRegError, RuntimeError):
    """Every kernel weight underflowed to zero for some query point.

    Attributes
    ----------
    query_index : int or None
        Row index of the first offending query.
    """

    def __init__(self, message, query_index=None):
        super().__init__(message)
        self.query_index = query_index


class TuningError(SimplexRegError, RuntimeError):
    """Cross-validated tuning finished without a single feasible cell."""
