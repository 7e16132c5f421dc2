"""Pure-Python implementations of the hot kernels.

These mirror ``_kernels.pyx`` line for line and are used when the compiled
extension is not available.  See :mod:`entromax.kernels`.
"""
from math import exp, expm1, fabs, log1p

import numpy as np

OK = 0
ILL_CONDITIONED = 1
NOT_CONVERGED = 2

_MAX_ITER = 200


def _cdf_terms(wi, s, beta, lo_t, hi_t, mu, jdeg, coef, eq, fact, shift):
    """Return (F(beta), sum of |parts|) for one coordinate."""
    total = 0.0
    absum = 0.0
    for t in range(lo_t, hi_t):
        j = jdeg[t]
        m = mu[t]
        scale = coef[t] * exp(s * m - shift)
        if eq[t]:
            if beta >= s:
                part = s ** (j + 1)
            else:
                part = -(s ** (j + 1)) * expm1((j + 1) * log1p(-beta / s))
            part /= fact[j + 1]
            total += scale * part
            absum += fabs(scale * part)
            continue
        d = wi - m
        inner = 0.0
        inner_abs = 0.0
        for q in range(j + 1):
            if q == 0:
                pq = expm1(d * beta)
            elif beta >= s:
                pq = -(s ** q)
            else:
                pq = (s ** q) * expm1(q * log1p(-beta / s) + d * beta)
            term = pq / (fact[q] * d ** (j - q + 1))
            inner += term
            inner_abs += fabs(term)
        total += scale * inner
        absum += fabs(scale) * inner_abs
    return total, absum


def _density(wi, s, beta, lo_t, hi_t, mu, jdeg, coef, fact, shift):
    total = 0.0
    r = s - beta
    for t in range(lo_t, hi_t):
        j = jdeg[t]
        total += coef[t] * (r ** j) * exp(wi * beta + mu[t] * r - shift) / fact[j]
    return total


def invert_simplex_cdf(w, start, mu, jdeg, coef, eq, U, cond_max):
    """Sample simplex points by sequential conditional-CDF inversion.

    Parameters
    ----------
    w : (n,) float
        Exponent vector; the target density is ``exp(<w, v>)`` on the simplex.
    start : (n,) int
        Term ranges: coordinate ``i`` uses terms ``start[i]:start[i+1]``.
    mu, jdeg, coef, eq : (T,) arrays
        Exponential-polynomial expansion of the suffix integral
        ``sum coef * t^jdeg / jdeg! * exp(mu t)``; ``eq`` marks terms whose
        ``mu`` coincides with ``w[i]``.
    U : (N, n-1) float
        Uniform variates, one per sampled coordinate.
    cond_max : float
        Samples whose cancellation ratio exceeds this are flagged.

    Returns
    -------
    V : (N, n) float
    status : (N,) int8
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    N = U.shape[0]
    V = np.zeros((N, n))
    status = np.zeros(N, dtype=np.int8)
    fact = [1.0]
    for i in range(1, n + 2):
        fact.append(fact[-1] * i)
    mu = mu.tolist()
    jdeg = jdeg.tolist()
    coef = coef.tolist()
    eq = eq.tolist()
    start = start.tolist()
    for a in range(N):
        s = 1.0
        flag = OK
        for i in range(n - 1):
            wi = w[i]
            lo_t, hi_t = start[i], start[i + 1]
            mmax = wi
            for t in range(lo_t, hi_t):
                if mu[t] > mmax:
                    mmax = mu[t]
            shift = s * mmax
            if s <= 0.0:
                V[a, i] = 0.0
                continue
            Fs, Fs_abs = _cdf_terms(wi, s, s, lo_t, hi_t, mu, jdeg, coef, eq, fact, shift)
            if not Fs > 0 or Fs_abs > cond_max * Fs:
                flag = ILL_CONDITIONED
                break
            target = U[a, i] * Fs
            lo, hi = 0.0, s
            beta = U[a, i] * s
            converged = False
            for _ in range(_MAX_ITER):
                F, F_abs = _cdf_terms(wi, s, beta, lo_t, hi_t, mu, jdeg, coef, eq, fact, shift)
                g = F - target
                if g > 0:
                    hi = beta
                else:
                    lo = beta
                fp = _density(wi, s, beta, lo_t, hi_t, mu, jdeg, coef, fact, shift)
                if fp > 0:
                    nxt = beta - g / fp
                    if not (lo < nxt < hi):
                        nxt = 0.5 * (lo + hi)
                else:
                    nxt = 0.5 * (lo + hi)
                if fabs(nxt - beta) <= 4e-16 * s or hi - lo <= 4e-16 * s:
                    beta = nxt
                    converged = True
                    break
                beta = nxt
            if not converged:
                flag = NOT_CONVERGED
                break
            F, F_abs = _cdf_terms(wi, s, beta, lo_t, hi_t, mu, jdeg, coef, eq, fact, shift)
            if F_abs > cond_max * Fs:
                flag = ILL_CONDITIONED
                break
            V[a, i] = beta
            s -= beta
            if s < 0.0:
                s = 0.0
        if flag == OK:
            V[a, n - 1] = s
        status[a] = flag
    return V, status


def mgs_orthonormalize(G):
    """Modified Gram-Schmidt with one re-orthogonalisation pass, in place.

    ``G`` has shape ``(N, n, k)``; columns of each ``G[a]`` are
    orthonormalised.  Returns an int8 status array, 1 where a column had
    (numerically) zero norm.
    """
    N, n, k = G.shape
    status = np.zeros(N, dtype=np.int8)
    for c in range(k):
        col = G[:, :, c]
        for _ in range(2):
            for p in range(c):
                q = G[:, :, p]
                proj = np.einsum("ai,ai->a", q.conj(), col)
                col -= proj[:, None] * q
        norm = np.sqrt(np.einsum("ai,ai->a", col.real, col.real)
                       + np.einsum("ai,ai->a", col.imag, col.imag))
        bad = norm < 1e-300
        status[bad] = 1
        norm[bad] = 1.0
        col /= norm[:, None]
    return status
