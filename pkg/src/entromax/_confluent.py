"""Shared machinery for the confluent-Vandermonde integration oracles.

Both the rank-one and the rank-k oracles evaluate

    log C + log det M(-y) - sum_{i<j} m_i m_j log(lam_i - lam_j)

and a gradient built from determinant ratios ``det M_p / det M``.  The matrix
builders differ; the bookkeeping (column order, positivity check, LU reuse
for the ratios) lives here.
"""
from math import comb, factorial

import mpmath
from mpmath import mp

from . import mplinalg
from .errors import NumericInstabilityError


def binom_power(lam, r, j):
    """``binom(r, j) * lam**(r - j)``, zero when ``j > r``."""
    if j > r:
        return mpmath.mpf(0)
    return comb(r, j) * lam ** (r - j)


def log_pair_product(spec):
    """``sum_{i<j} m_i m_j log(lam_i - lam_j)`` for a descending spectrum."""
    d, m = spec.distinct, spec.mult
    total = mpmath.mpf(0)
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            total += m[i] * m[j] * mpmath.log(d[i] - d[j])
    return total


def log_superfactorial(n):
    """``log prod_{p=1}^{n} p!`` (zero for ``n <= 1``)."""
    total = mpmath.mpf(0)
    for p in range(2, n + 1):
        total += mpmath.log(factorial(p))
    return total


def block_offsets(mult):
    offsets, pos = [], 0
    for m in mult:
        offsets.append(pos)
        pos += m
    return offsets


def log_integral_and_ratios(spec, build, build_column, log_const, want_grad):
    """Evaluate ``log C + log det M(-y) - log V`` and optionally the gradient.

    ``build(values, mult)`` returns the evaluation matrix for column values
    ``values`` (already negated); ``build_column(value, j)`` returns the
    column pattern with derivative index ``j`` for one block.  Runs at the
    current ``mp.prec``.
    """
    w = [-lam for lam in spec.distinct]
    M = build(w, spec.mult)
    LU, perm, sign = mplinalg.lu_factor(M)
    det = mplinalg.det_from_lu(LU, sign)
    if not det > 0:
        raise NumericInstabilityError(
            f"confluent determinant has non-positive value {mpmath.nstr(det, 8)} "
            f"at {mp.prec} bits",
            estimates=(det,),
        )
    value = log_const + mpmath.log(det) - log_pair_product(spec)
    if not want_grad:
        return value, None
    offsets = block_offsets(spec.mult)
    grad = []
    d, m = spec.distinct, spec.mult
    for p in range(len(d)):
        col = offsets[p] + m[p] - 1
        x = mplinalg.lu_solve(LU, perm, build_column(w[p], m[p]))
        ratio = x[col]
        g = -ratio
        for i in range(len(d)):
            if i != p:
                g -= m[i] / (d[p] - d[i])
        grad.append(g)
    return value, tuple(grad)
