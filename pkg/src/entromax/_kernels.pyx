# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; semantics identical to ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, fabs, log1p, sqrt, pow

cnp.import_array()

cdef enum:
    MAX_ITER = 200
    MAX_FACT = 171

OK = 0
ILL_CONDITIONED = 1
NOT_CONVERGED = 2


cdef inline void _cdf_terms(double wi, double s, double beta, Py_ssize_t lo_t,
                            Py_ssize_t hi_t, const double[:] mu, const long[:] jdeg,
                            const double[:] coef, const unsigned char[:] eq,
                            const double* fact, double shift,
                            double* total_out, double* abs_out) nogil:
    cdef double total = 0.0, absum = 0.0, scale, part, d, inner, inner_abs, pq, term
    cdef Py_ssize_t t
    cdef long j, q
    for t in range(lo_t, hi_t):
        j = jdeg[t]
        scale = coef[t] * exp(s * mu[t] - shift)
        if eq[t]:
            if beta >= s:
                part = pow(s, j + 1)
            else:
                part = -pow(s, j + 1) * expm1((j + 1) * log1p(-beta / s))
            part /= fact[j + 1]
            total += scale * part
            absum += fabs(scale * part)
            continue
        d = wi - mu[t]
        inner = 0.0
        inner_abs = 0.0
        for q in range(j + 1):
            if q == 0:
                pq = expm1(d * beta)
            elif beta >= s:
                pq = -pow(s, q)
            else:
                pq = pow(s, q) * expm1(q * log1p(-beta / s) + d * beta)
            term = pq / (fact[q] * pow(d, j - q + 1))
            inner += term
            inner_abs += fabs(term)
        total += scale * inner
        absum += fabs(scale) * inner_abs
    total_out[0] = total
    abs_out[0] = absum


cdef inline double _density(double wi, double s, double beta, Py_ssize_t lo_t,
                            Py_ssize_t hi_t, const double[:] mu, const long[:] jdeg,
                            const double[:] coef, const double* fact, double shift) nogil:
    cdef double total = 0.0, r = s - beta
    cdef Py_ssize_t t
    for t in range(lo_t, hi_t):
        total += coef[t] * pow(r, jdeg[t]) * exp(wi * beta + mu[t] * r - shift) / fact[jdeg[t]]
    return total


def invert_simplex_cdf(w, start, mu, jdeg, coef, eq, U, double cond_max):
    """Compiled version of :func:`entromax._kernels_py.invert_simplex_cdf`."""
    cdef const double[:] w_v = np.ascontiguousarray(w, dtype=np.float64)
    cdef const long[:] start_v = np.ascontiguousarray(start, dtype=np.int_)
    cdef const double[:] mu_v = np.ascontiguousarray(mu, dtype=np.float64)
    cdef const long[:] jdeg_v = np.ascontiguousarray(jdeg, dtype=np.int_)
    cdef const double[:] coef_v = np.ascontiguousarray(coef, dtype=np.float64)
    cdef const unsigned char[:] eq_v = np.ascontiguousarray(eq, dtype=np.uint8)
    cdef const double[:, :] U_v = np.ascontiguousarray(U, dtype=np.float64)
    cdef Py_ssize_t n = w_v.shape[0], N = U_v.shape[0]
    if n + 1 > MAX_FACT:
        raise ValueError("dimension too large for the compiled kernel")
    V = np.zeros((N, n))
    status = np.zeros(N, dtype=np.int8)
    cdef double[:, :] V_v = V
    cdef signed char[:] st_v = status
    cdef double fact[MAX_FACT + 1]
    cdef Py_ssize_t a, i, t, it, lo_t, hi_t
    cdef double s, wi, mmax, shift, Fs, Fs_abs, F, F_abs, target, lo, hi, beta, g, fp, nxt
    cdef int flag, converged
    fact[0] = 1.0
    for i in range(1, n + 2):
        fact[i] = fact[i - 1] * i
    with nogil:
        for a in range(N):
            s = 1.0
            flag = 0
            for i in range(n - 1):
                wi = w_v[i]
                lo_t = start_v[i]
                hi_t = start_v[i + 1]
                mmax = wi
                for t in range(lo_t, hi_t):
                    if mu_v[t] > mmax:
                        mmax = mu_v[t]
                shift = s * mmax
                if s <= 0.0:
                    V_v[a, i] = 0.0
                    continue
                _cdf_terms(wi, s, s, lo_t, hi_t, mu_v, jdeg_v, coef_v, eq_v, fact, shift,
                           &Fs, &Fs_abs)
                if not Fs > 0 or Fs_abs > cond_max * Fs:
                    flag = 1
                    break
                target = U_v[a, i] * Fs
                lo = 0.0
                hi = s
                beta = U_v[a, i] * s
                converged = 0
                for it in range(MAX_ITER):
                    _cdf_terms(wi, s, beta, lo_t, hi_t, mu_v, jdeg_v, coef_v, eq_v, fact,
                               shift, &F, &F_abs)
                    g = F - target
                    if g > 0:
                        hi = beta
                    else:
                        lo = beta
                    fp = _density(wi, s, beta, lo_t, hi_t, mu_v, jdeg_v, coef_v, fact, shift)
                    if fp > 0:
                        nxt = beta - g / fp
                        if not (lo < nxt < hi):
                            nxt = 0.5 * (lo + hi)
                    else:
                        nxt = 0.5 * (lo + hi)
                    if fabs(nxt - beta) <= 4e-16 * s or hi - lo <= 4e-16 * s:
                        beta = nxt
                        converged = 1
                        break
                    beta = nxt
                if not converged:
                    flag = 2
                    break
                _cdf_terms(wi, s, beta, lo_t, hi_t, mu_v, jdeg_v, coef_v, eq_v, fact, shift,
                           &F, &F_abs)
                if F_abs > cond_max * Fs:
                    flag = 1
                    break
                V_v[a, i] = beta
                s -= beta
                if s < 0.0:
                    s = 0.0
            if flag == 0:
                V_v[a, n - 1] = s
            st_v[a] = flag
    return V, status


def mgs_orthonormalize(double complex[:, :, :] G):
    """Compiled version of :func:`entromax._kernels_py.mgs_orthonormalize`."""
    cdef Py_ssize_t N = G.shape[0], n = G.shape[1], k = G.shape[2]
    status = np.zeros(N, dtype=np.int8)
    cdef signed char[:] st_v = status
    cdef Py_ssize_t a, c, p, i, rep
    cdef double complex proj
    cdef double norm
    with nogil:
        for a in range(N):
            for c in range(k):
                for rep in range(2):
                    for p in range(c):
                        proj = 0
                        for i in range(n):
                            proj = proj + G[a, i, p].conjugate() * G[a, i, c]
                        for i in range(n):
                            G[a, i, c] = G[a, i, c] - proj * G[a, i, p]
                norm = 0.0
                for i in range(n):
                    norm += G[a, i, c].real * G[a, i, c].real + G[a, i, c].imag * G[a, i, c].imag
                norm = sqrt(norm)
                if norm < 1e-300:
                    st_v[a] = 1
                    norm = 1.0
                for i in range(n):
                    G[a, i, c] = G[a, i, c] / norm
    return status
