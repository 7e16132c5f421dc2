"""Exception types shared across the package.

The CLI maps each class to a distinct exit code, so callers can tell a bad
input apart from a numerical failure or a marginal sitting on the boundary.
"""


class EntromaxError(Exception):
    """Base class for all package errors."""


class ValidationError(EntromaxError, ValueError):
    """Malformed or out-of-domain input."""


class NumericInstabilityError(EntromaxError, ArithmeticError):
    """A high-precision computation failed to stabilise.

    Attributes
    ----------
    estimates : tuple
        The last estimates produced before giving up (may be empty).
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class InteriorityError(EntromaxError, ValueError):
    """The requested marginal is not in the interior of the convex hull."""
