"""Small dense linear algebra over mpmath reals.

Matrices are lists of lists of mpf.  All routines work at whatever
``mp.prec`` is active when they are called.
"""
import mpmath
from mpmath import mp


def lu_factor(M):
    """Gaussian elimination with partial pivoting.

    Returns ``(LU, perm, sign)`` where ``LU`` packs the unit-lower and upper
    factors, ``perm[i]`` is the original row now in position ``i``, and
    ``sign`` is the permutation parity.  A zero pivot leaves the factor
    singular; callers see it as a zero determinant.
    """
    n = len(M)
    LU = [list(row) for row in M]
    perm = list(range(n))
    sign = 1
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(LU[r][c]))
        if p != c:
            LU[c], LU[p] = LU[p], LU[c]
            perm[c], perm[p] = perm[p], perm[c]
            sign = -sign
        pivot = LU[c][c]
        if not pivot:
            continue
        row_c = LU[c]
        for r in range(c + 1, n):
            row_r = LU[r]
            f = row_r[c] / pivot
            if not f:
                continue
            row_r[c] = f
            for j in range(c + 1, n):
                row_r[j] -= f * row_c[j]
    return LU, perm, sign


def det_from_lu(LU, sign):
    d = mpmath.mpf(sign)
    for i in range(len(LU)):
        d *= LU[i][i]
    return d


def det(M):
    LU, _, sign = lu_factor(M)
    return det_from_lu(LU, sign)


def slogdet(M):
    """Sign and natural log of ``|det M|`` (``(0, -inf)`` when singular)."""
    LU, _, sign = lu_factor(M)
    logabs = mpmath.mpf(0)
    for i in range(len(LU)):
        u = LU[i][i]
        if not u:
            return 0, mpmath.ninf
        if u < 0:
            sign = -sign
        logabs += mpmath.log(abs(u))
    return sign, logabs


def lu_solve(LU, perm, b):
    n = len(LU)
    x = [b[perm[i]] for i in range(n)]
    for i in range(n):
        row = LU[i]
        s = x[i]
        for j in range(i):
            s -= row[j] * x[j]
        x[i] = s
    for i in reversed(range(n)):
        row = LU[i]
        s = x[i]
        for j in range(i + 1, n):
            s -= row[j] * x[j]
        x[i] = s / row[i]
    return x


def to_mp_matrix(M):
    """Convert to an :class:`mpmath.matrix` (handy for inspection and tests)."""
    return mp.matrix(M)
