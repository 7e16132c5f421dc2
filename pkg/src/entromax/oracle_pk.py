"""Exact integration oracle on rank-k projections via the HCIZ formula.

For ``Y = diag(y)`` with distinct values ``lam_1 > ... > lam_K`` of
multiplicities ``m_i``::

    E_k(Y) = log C(n, k) + log det M^(k)(-y) - sum_{i<j} m_i m_j log(lam_i - lam_j)

    C(n, k) = prod_{p<n} p! / (prod_{p<n-k} p! * prod_{p<k} p!)

Columns of ``M^(k)`` are scaled derivatives ``(1/j!) d^j/dt^j`` of
``(1, t, ..., t^(n-k-1), e^t, t e^t, ..., t^(k-1) e^t)``; the bottom ``k``
entries are ``e^t q_{i,j}(t)``.
"""
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial

import mpmath
from mpmath import mp

from . import _confluent
from .errors import ValidationError
from .matrixcore import DEFAULT_CLUSTER_TOL, Spectrum, cluster_spectrum
from .precision import DEFAULT_PREC, escalate


@dataclass(frozen=True)
class QPolynomial:
    """Exact coefficients of ``q_{i,j}(t) = e^{-t} (d/dt)^j / j! (t^i e^t)``.

    ``coeffs[d]`` is the rational coefficient of ``t**d``.
    """

    i: int
    j: int
    coeffs: tuple

    @classmethod
    def build(cls, i, j):
        if i < 0 or j < 0:
            raise ValidationError("q_{i,j} needs i, j >= 0")
        coeffs = [Fraction(0)] * (i + 1)
        for l in range(min(i, j) + 1):
            coeffs[i - l] += Fraction(comb(i, l), factorial(j - l))
        return cls(i, j, tuple(coeffs))

    @property
    def degree(self):
        return max((d for d, c in enumerate(self.coeffs) if c), default=0)

    def __call__(self, t):
        acc = mpmath.mpf(0)
        for c in reversed(self.coeffs):
            acc = acc * t + mpmath.mpf(c.numerator) / c.denominator
        return acc


def q_eval(i, j, t):
    """Value of ``q_{i,j}`` at ``t`` (at the current working precision)."""
    return QPolynomial.build(i, j)(mpmath.mpf(t))


def _column(t, j, n, k):
    top = [_confluent.binom_power(t, r, j) for r in range(n - k)]
    et = mpmath.exp(t)
    return top + [et * q_eval(i, j, t) for i in range(k)]


def build_eval_matrix_k(values, mult, k):
    """``M^(k)`` with blocks in the given order.

    ``values``/``mult`` describe the column values and their multiplicities;
    a :class:`Spectrum` may be passed as ``values`` with ``mult=None``.
    """
    if isinstance(values, Spectrum):
        values, mult = values.distinct, values.mult
    values = [mpmath.mpf(v) for v in values]
    n = sum(mult)
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    cols = []
    for t, m in zip(values, mult):
        for j in range(m):
            cols.append(_column(t, j, n, k))
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def build_grad_matrix_k(values, mult, k, p):
    """``M^(k)_p``: last column of block ``p`` replaced by its ``j = m_p`` pattern."""
    if isinstance(values, Spectrum):
        values, mult = values.distinct, values.mult
    M = build_eval_matrix_k(values, mult, k)
    n = sum(mult)
    col = _confluent.block_offsets(mult)[p] + mult[p] - 1
    new = _column(mpmath.mpf(values[p]), mult[p], n, k)
    for r in range(n):
        M[r][col] = new[r]
    return M


def log_hciz_constant(n, k):
    return (_confluent.log_superfactorial(n - 1)
            - _confluent.log_superfactorial(n - k - 1)
            - _confluent.log_superfactorial(k - 1))


def _as_spectrum(s, tol=DEFAULT_CLUSTER_TOL):
    return s if isinstance(s, Spectrum) else cluster_spectrum(s, tol)


def _check_k(s, k):
    if not 1 <= int(k) <= s.n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={s.n}")
    return int(k)


def _compute(s, k, p, want_grad):
    with mp.workprec(p):
        n = s.n
        if len(s) == 1:
            c = s.distinct[0]
            return -c * k, (mpmath.mpf(-k) / n,)
        return _confluent.log_integral_and_ratios(
            s,
            lambda vals, mult: build_eval_matrix_k(vals, mult, k),
            lambda t, j: _column(t, j, n, k),
            log_hciz_constant(n, k),
            want_grad,
        )


def eval_Ek(s, k, prec=DEFAULT_PREC):
    """``E_k(Y) = log int exp(-<Y, X>) dmu_k(X)`` for ``Y = diag(y)``.

    ``s`` is a :class:`Spectrum` or a real vector (clustered with the
    default tolerance).  Returns an mpf accurate to about ``2**(-prec/2)``.
    """
    s = _as_spectrum(s)
    k = _check_k(s, k)
    return escalate(lambda p: _compute(s, k, p, False)[0], prec, what="E_k")


def grad_Ek(s, k, prec=DEFAULT_PREC):
    """Gradient of ``E_k`` at ``diag(y)``, one mpf per distinct value.

    Use :meth:`Spectrum.expand` for the per-coordinate vector; its entries
    sum to ``-k``.
    """
    s = _as_spectrum(s)
    k = _check_k(s, k)
    return escalate(lambda p: _compute(s, k, p, True)[1], prec, what="grad E_k")


def eval_and_grad_Ek(s, k, prec=DEFAULT_PREC):
    """Value and per-cluster gradient from one factorisation per precision."""
    s = _as_spectrum(s)
    k = _check_k(s, k)

    def both(p):
        value, grad = _compute(s, k, p, True)
        return (value,) + tuple(grad)

    out = escalate(both, prec, what="E_k and gradient")
    return out[0], out[1:]
