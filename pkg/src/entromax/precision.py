"""Arbitrary-precision scalars and the adaptive precision loop.

``BigReal`` is an alias for :class:`mpmath.mpf`.  Every mpf carries its own
exact binary mantissa, so values computed under one working precision can be
passed around freely; the working precision only matters while arithmetic is
being done, inside :func:`mpmath.mp.workprec`.
"""
import mpmath
from mpmath import mp

from .errors import NumericInstabilityError, ValidationError

BigReal = mpmath.mpf

DEFAULT_PREC = 256
MIN_PREC = 64
MAX_ESCALATIONS = 4


def check_prec(prec):
    prec = int(prec)
    if prec < MIN_PREC:
        raise ValidationError(f"precision must be at least {MIN_PREC} bits, got {prec}")
    return prec


def _max_diff(a, b):
    with mp.workprec(64):
        return max(abs(x - y) for x, y in zip(a, b))


def escalate(compute, prec, max_escalations=MAX_ESCALATIONS, what="value"):
    """Run ``compute(p)`` at doubling precisions until two runs agree.

    ``compute`` returns an mpf or a tuple of mpf.  It is evaluated at ``prec``
    and ``2*prec``; the later estimate is accepted once every component agrees
    with the earlier one to ``2**(-prec/2)``.  Otherwise the precision keeps
    doubling, ``max_escalations`` times at most.

    A :class:`NumericInstabilityError` raised by ``compute`` at some precision
    counts as a failed attempt, not a final answer.
    """
    prec = check_prec(prec)
    tol = mpmath.ldexp(mpmath.mpf(1), -(prec // 2))
    previous = None
    history = []
    p = prec
    for _ in range(max_escalations + 1):
        try:
            current = compute(p)
        except NumericInstabilityError as exc:
            history.extend(exc.estimates)
            previous = None
            p *= 2
            continue
        history.append(current)
        if previous is not None:
            a = previous if isinstance(previous, tuple) else (previous,)
            b = current if isinstance(current, tuple) else (current,)
            if _max_diff(a, b) <= tol:
                return current
        previous = current
        p *= 2
    raise NumericInstabilityError(
        f"{what} did not stabilise after {max_escalations} precision escalations "
        f"(started at {prec} bits)",
        estimates=history[-2:],
    )


def decimal_digits(prec):
    """Decimal digits needed to round-trip a ``prec``-bit binary mantissa."""
    return int(prec * 0.30102999566398120) + 2


def to_decimal(x, prec=DEFAULT_PREC):
    """Serialise an mpf as a decimal string that parses back to the same value."""
    with mp.workprec(prec):
        # round to the declared precision so the string round-trips there
        x = +x if isinstance(x, mpmath.mpf) else mpmath.mpf(x)
    return mpmath.libmp.to_str(x._mpf_, decimal_digits(prec))


def from_decimal(text, prec=DEFAULT_PREC):
    with mp.workprec(prec):
        return +mpmath.mpf(text)
