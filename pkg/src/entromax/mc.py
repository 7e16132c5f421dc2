"""Monte-Carlo reference for the uniform measure on rank-k projections.

A uniformly random rank-k projection is ``Q Q^*`` where the columns of
``Q`` are obtained by orthonormalising ``k`` independent standard complex
Gaussian vectors.  The estimators below average ``exp(-<Y, X>)`` and
``X exp(-<Y, X>)`` over such draws; they are the ground truth the exact
oracles are checked against.
"""
from dataclasses import dataclass
import math

import mpmath
import numpy as np

from . import kernels
from .errors import ValidationError
from .matrixcore import HermitianMatrix
from .rng import as_streams

CHUNK = 50_000
# Above this sup-norm, weights are rescaled by a known factor and the
# estimate is returned as an mpf.
LOG_SHIFT_THRESHOLD = 30.0


@dataclass(frozen=True)
class MCEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n_samples: int

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValidationError("an estimate needs at least two samples")

    def log(self):
        """``(log mean, delta-method standard error of the log)``."""
        return mpmath.log(self.mean), self.stderr / self.mean


def _check_nk(n, k):
    n, k = int(n), int(k)
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    return n, k


def _frames(n, k, size, gen):
    """``size`` orthonormal ``n x k`` frames, redrawing degenerate ones."""
    shape = (size, n, k)
    G = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    status = kernels.mgs_orthonormalize(G)
    bad = np.flatnonzero(status)
    while bad.size:
        shape = (bad.size, n, k)
        H = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
        st = kernels.mgs_orthonormalize(H)
        G[bad] = H
        bad = bad[st != 0]
    return G


def sample_uniform_pk_many(n, k, size, rng):
    """``size`` draws from the uniform measure on rank-``k`` projections, ``(size, n, n)``."""
    n, k = _check_nk(n, k)
    gen = as_streams(rng).stream("uniform_pk", n, k)
    Q = _frames(n, k, int(size), gen)
    return Q @ Q.conj().transpose(0, 2, 1)


def sample_uniform_pk(n, k, rng):
    """One uniform rank-``k`` projection as a :class:`HermitianMatrix`."""
    X = sample_uniform_pk_many(n, k, 1, rng)[0]
    return HermitianMatrix(0.5 * (X + X.conj().T))


def _diag_y(Y):
    Y = np.asarray(Y)
    if Y.ndim == 2:
        if np.any(Y - np.diag(np.diag(Y))):
            raise ValidationError("Monte-Carlo estimators take a diagonal Y")
        Y = np.diag(Y)
    if np.iscomplexobj(Y):
        if np.any(Y.imag):
            raise ValidationError("Y must be real")
        Y = Y.real
    y = np.asarray(Y, dtype=float)
    if y.ndim != 1 or not np.all(np.isfinite(y)):
        raise ValidationError("Y must be a finite real vector or diagonal matrix")
    return y


def _log_shift(y, k):
    """Upper bound on ``-<y, diag X>``; used to keep weights at most 1."""
    if np.max(np.abs(y)) <= LOG_SHIFT_THRESHOLD:
        return 0.0
    return -float(np.sum(np.sort(y)[:k]))


def _chunks(N):
    done = 0
    while done < N:
        size = min(CHUNK, N - done)
        yield size
        done += size


def _merge(stats, size, mean, m2):
    """Chan et al. pairwise update of (count, mean, M2)."""
    n0, mean0, m20 = stats
    if n0 == 0:
        return size, mean, m2
    n = n0 + size
    delta = mean - mean0
    return n, mean0 + delta * size / n, m20 + m2 + delta * delta * n0 * size / n


def _rounding_floor(y):
    """Relative error of one weight ``exp(-<y, d>)`` from double rounding.

    The exponent is a length-``n`` dot product of unit-scale diagonals with
    ``y``, so its absolute error is about ``n eps (1 + ||y||_1)``; ``exp``
    turns that into the same relative error, which averaging does not remove.
    """
    return (y.size + 2) * np.finfo(float).eps * (1 + float(np.sum(np.abs(y))))


def _weights(Q, y, shift):
    d = np.einsum("aik,aik->ai", Q.real, Q.real) + np.einsum("aik,aik->ai", Q.imag, Q.imag)
    return np.exp(-(d @ y) - shift), d


def mc_estimate_Ek(Y, k, N, rng):
    """Monte-Carlo estimate of ``int exp(-<Y, X>) dmu_k``.

    Returns an :class:`MCEstimate`; when ``max|y| > 30`` its fields are mpf
    so that the rescaled weights can be scaled back without overflow.  The
    standard error combines the sampling error with a floor for the
    double-precision rounding of the weights, which dominates only when the
    integrand is (nearly) constant, e.g. ``k = n``.
    """
    y = _diag_y(Y)
    n, k = _check_nk(y.size, k)
    N = int(N)
    if N < 2:
        raise ValidationError("need at least two samples")
    gen = as_streams(rng).stream("uniform_pk", n, k)
    shift = _log_shift(y, k)
    stats = (0, 0.0, 0.0)
    for size in _chunks(N):
        w, _ = _weights(_frames(n, k, size, gen), y, shift)
        mean = math.fsum(w) / size
        stats = _merge(stats, size, mean, math.fsum((w - mean) ** 2))
    count, mean, m2 = stats
    stderr = math.hypot(math.sqrt(m2 / (count - 1) / count), _rounding_floor(y) * mean)
    if shift:
        scale = mpmath.exp(shift)
        return MCEstimate(scale * mean, scale * stderr, count)
    return MCEstimate(mean, stderr, count)


def mc_marginal(Y, k, N, rng, return_stderr=False):
    """Self-normalised importance estimate of the marginal of ``exp(-<Y, X>) dmu_k``.

    Returns a :class:`HermitianMatrix`; with ``return_stderr`` also the
    delta-method standard errors of its diagonal.
    """
    y = _diag_y(Y)
    n, k = _check_nk(y.size, k)
    N = int(N)
    if N < 2:
        raise ValidationError("need at least two samples")
    gen = as_streams(rng).stream("uniform_pk", n, k)
    shift = _log_shift(y, k)
    wsum = []
    acc = []
    diag_w = []
    all_w = []
    for size in _chunks(N):
        Q = _frames(n, k, size, gen)
        w, d = _weights(Q, y, shift)
        X = np.einsum("a,aik,ajk->ij", w, Q, Q.conj())
        acc.append(X)
        wsum.append(math.fsum(w))
        if return_stderr:
            all_w.append(w)
            diag_w.append(d)
    total = math.fsum(wsum)
    if not total > 0:
        raise ValidationError("all importance weights underflowed")
    M = sum(acc) / total
    M = 0.5 * (M + M.conj().T)
    # trace is k per sample; remove accumulated rounding
    M *= k / np.trace(M).real
    H = HermitianMatrix(M)
    if not return_stderr:
        return H
    w = np.concatenate(all_w)
    d = np.concatenate(diag_w)
    est = np.real(np.diag(M))
    resid = w[:, None] * (d - est[None, :])
    stderr = np.hypot(np.sqrt(np.sum(resid ** 2, axis=0)) / total,
                      _rounding_floor(y) * np.abs(est))
    return H, stderr
