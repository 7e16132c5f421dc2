"""Exact integration oracle on rank-one projections.

``E_1(Y) = log (n-1)! + log det M(-y) - sum_{i<j} m_i m_j log(lam_i - lam_j)``

where ``M(y, gamma)`` stacks, for each distinct value ``lam`` with
multiplicity ``m``, the columns ``j = 0..m-1`` whose first ``n-1`` rows are
``binom(r, j) lam^(r-j)`` and whose last row is ``gamma^j e^(gamma lam) / j!``.
``M(y) = M(y, 1)``.  The same matrix with ``gamma = t`` gives the integral
of ``exp(<y, x>)`` over the simplex of size ``t``, which the sampler uses.
"""
from math import factorial

import mpmath
from mpmath import mp

from . import _confluent
from .mplinalg import det
from .matrixcore import DEFAULT_CLUSTER_TOL, Spectrum, cluster_spectrum
from .precision import DEFAULT_PREC, escalate


def _column(lam, j, n, gamma):
    top = [_confluent.binom_power(lam, r, j) for r in range(n - 1)]
    return top + [gamma ** j * mpmath.exp(gamma * lam) / factorial(j)]


def build_eval_matrix(s, gamma=1, mult=None):
    """``M(y, gamma)`` as a list of mpf rows, blocks in the order given.

    ``s`` is a :class:`Spectrum` or a sequence of distinct values (then pass
    ``mult``).  Evaluated at the current working precision.
    """
    if isinstance(s, Spectrum):
        values, mult = s.distinct, s.mult
    else:
        values = s
        mult = [1] * len(values) if mult is None else mult
    values = [mpmath.mpf(v) for v in values]
    gamma = mpmath.mpf(gamma)
    n = sum(mult)
    cols = [_column(lam, j, n, gamma) for lam, m in zip(values, mult) for j in range(m)]
    return [[cols[c][r] for c in range(n)] for r in range(n)]


def build_grad_matrix(s, p, mult=None):
    """``M_p(y)``: the last column of block ``p`` moved to derivative index ``m_p``."""
    if isinstance(s, Spectrum):
        values, mult = s.distinct, s.mult
    else:
        values = s
        mult = [1] * len(values) if mult is None else mult
    M = build_eval_matrix(values, 1, mult)
    n = sum(mult)
    col = _confluent.block_offsets(mult)[p] + mult[p] - 1
    new = _column(mpmath.mpf(values[p]), mult[p], n, mpmath.mpf(1))
    for r in range(n):
        M[r][col] = new[r]
    return M


def _as_spectrum(s):
    return s if isinstance(s, Spectrum) else cluster_spectrum(s, DEFAULT_CLUSTER_TOL)


def _compute(s, p, want_grad):
    with mp.workprec(p):
        n = s.n
        if len(s) == 1:
            return -s.distinct[0], (mpmath.mpf(-1) / n,)
        return _confluent.log_integral_and_ratios(
            s,
            lambda vals, mult: build_eval_matrix(vals, 1, mult),
            lambda lam, j: _column(lam, j, n, mpmath.mpf(1)),
            mpmath.log(factorial(n - 1)),
            want_grad,
        )


def eval_E1(s, prec=DEFAULT_PREC):
    """``E_1(diag(y))`` as an mpf, accurate to about ``2**(-prec/2)``."""
    s = _as_spectrum(s)
    return escalate(lambda p: _compute(s, p, False)[0], prec, what="E_1")


def grad_E1(s, prec=DEFAULT_PREC):
    """Per-cluster gradient of ``E_1``; expanded entries sum to ``-1``."""
    s = _as_spectrum(s)
    return escalate(lambda p: _compute(s, p, True)[1], prec, what="grad E_1")


def simplex_integral(s, size=1, prec=DEFAULT_PREC):
    """``int exp(<y, x>)`` over ``{x >= 0, sum x = size}`` (iterated Lebesgue form).

    Equals ``det M(y, size) / prod_{i<j} (lam_j - lam_i)^(m_i m_j)`` with
    values in ascending order; order does not matter since both sides pick up
    the same sign.
    """
    s = _as_spectrum(s)

    def compute(p):
        with mp.workprec(p):
            n = s.n
            if len(s) == 1:
                t = mpmath.mpf(size)
                return t ** (n - 1) / factorial(n - 1) * mpmath.exp(t * s.distinct[0])
            asc = list(reversed(s.distinct))
            mult = list(reversed(s.mult))
            num = det(build_eval_matrix(asc, size, mult))
            den = mpmath.mpf(1)
            for i in range(len(asc)):
                for j in range(i + 1, len(asc)):
                    den *= (asc[j] - asc[i]) ** (mult[i] * mult[j])
            return num / den

    return escalate(compute, prec, what="simplex integral")

