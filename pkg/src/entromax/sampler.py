"""Exact sampling from ``exp(-<Y, X>)`` on rank-one projections.

The diagonal of a uniformly random rank-one projection is uniform on the
probability simplex and its phases are independent and uniform on the
circle.  Tilting by ``exp(-<y, v>)`` only touches the simplex part, so a
sample is drawn in two stages:

1. ``v`` on the simplex, one coordinate at a time, by inverting the
   conditional CDF of each coordinate given the earlier ones;
2. phases ``z_j = exp(2 pi i u_j)``, and ``X = (z sqrt(v)) (z sqrt(v))^*``.

The conditional CDF of coordinate ``i`` needs the integral of
``exp(<w, x>)`` (``w = -y``) over the simplex of the remaining coordinates,
as a function of its size ``t``.  That integral is a finite sum
``sum_{l,j} a_{l,j} t^j exp(mu_l t) / j!``; the coefficients are the
cofactors along the single ``t``-dependent row of ``M(w', t)`` divided by the
confluent Vandermonde factor.  They do not depend on the earlier
coordinates, so they are computed once per ``y``.
"""
from dataclasses import dataclass
import json
import math
from math import factorial

import mpmath
from mpmath import mp
import numpy as np

from . import kernels
from .errors import NumericInstabilityError, ValidationError
from .matrixcore import (DEFAULT_CLUSTER_TOL, HermitianMatrix, as_hermitian,
                         cluster_labels, diagonal_frame)
from .mplinalg import det_from_lu, lu_factor, lu_solve
from .oracle_p1 import build_eval_matrix
from .precision import DEFAULT_PREC, check_prec, escalate
from .rng import as_streams

# Samples whose double-precision CDF loses more than ~6 digits to
# cancellation are redone in multiprecision.
COND_MAX = 1e6


@dataclass(frozen=True, eq=False)
class SimplexPoint:
    """A point of the probability simplex.

    On the double-precision path the coordinates sum to one up to rounding
    (a few ulps); the multiprecision fallback is rounded to double on output.
    """

    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("simplex point must be a non-empty vector")
        if np.any(v < 0) or abs(math.fsum(v) - 1) > 8 * v.size * np.finfo(float).eps:
            raise ValidationError("not a point of the probability simplex")
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.v.size


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Unit-modulus complex phases."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if np.any(np.abs(np.abs(z) - 1) > 1e-12):
            raise ValidationError("phases must have unit modulus")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_uniform(cls, u):
        return cls(np.exp(2j * np.pi * np.asarray(u, dtype=float)))


def _vandermonde(asc, mult):
    den = mpmath.mpf(1)
    for a in range(len(asc)):
        for b in range(a + 1, len(asc)):
            den *= (asc[b] - asc[a]) ** (mult[a] * mult[b])
    return den


def suffix_coefficients(values, mult, prec=DEFAULT_PREC):
    """Coefficients of ``t -> int_{size-t simplex} exp(<w, x>)``.

    ``values`` are the distinct entries of ``w`` in ascending order.  Returns
    a tuple ``a`` indexed like the columns of ``M(w, t)``: block ``l``,
    derivative ``j``, so that the integral is
    ``sum a[l, j] t^j exp(values[l] t) / j!``.
    """
    values = list(values)
    mult = list(mult)
    n = sum(mult)
    if n == 1:
        return (mpmath.mpf(1),)

    def compute(p):
        with mp.workprec(p):
            vals = [mpmath.mpf(v) for v in values]
            M = build_eval_matrix(vals, 1, mult)
            LU, perm, sign = lu_factor(M)
            d = det_from_lu(LU, sign)
            if not d:
                raise NumericInstabilityError("singular suffix matrix")
            e_last = [mpmath.mpf(0)] * (n - 1) + [mpmath.mpf(1)]
            z = lu_solve(LU, perm, e_last)
            scale = d / _vandermonde(vals, mult)
            return tuple(scale * zi for zi in z)

    return escalate(compute, prec, what="suffix coefficients")


class SimplexDensity:
    """The density ``exp(-<y, v>)`` on the simplex, ready for sampling.

    Parameters
    ----------
    y : array_like
        Real weights, length ``n``.
    prec : int
        Precision in bits of the coefficient tables and of the fallback
        inversion.
    tol : float
        Relative cluster tolerance; coordinates within it are treated as
        equal (this selects the coincident-value branch of the CDF).
    """

    def __init__(self, y, prec=DEFAULT_PREC, tol=DEFAULT_CLUSTER_TOL):
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise ValidationError("y must be a non-empty vector")
        if not np.all(np.isfinite(y)):
            raise ValidationError("y must be finite")
        self.prec = check_prec(prec)
        self.n = n = y.size
        spec, labels = cluster_labels(-y, tol)
        self.labels = labels
        self._values = spec.distinct
        self.w = [spec.distinct[lab] for lab in labels]
        # Terms of coordinate i: (label, j, coef) for the suffix i+1..n-1.
        self.terms = []
        for i in range(n - 1):
            suffix = labels[i + 1:]
            present = sorted(set(suffix.tolist()), reverse=True)   # ascending values
            mult = [int(np.sum(suffix == lab)) for lab in present]
            asc = [spec.distinct[lab] for lab in present]
            coef = suffix_coefficients(asc, mult, self.prec)
            rows = []
            c = 0
            for lab, m in zip(present, mult):
                for j in range(m):
                    rows.append((lab, j, coef[c]))
                    c += 1
            self.terms.append(rows)
        self._pack()

    def _pack(self):
        start = [0]
        mu, jdeg, coef, eq = [], [], [], []
        for i, rows in enumerate(self.terms):
            for lab, j, a in rows:
                mu.append(float(self.w_of_label(lab)))
                jdeg.append(j)
                coef.append(float(a))
                eq.append(lab == self.labels[i])
            start.append(len(mu))
        while len(start) < self.n + 1:
            start.append(len(mu))
        self._start = np.asarray(start, dtype=np.int_)
        self._mu = np.asarray(mu, dtype=float)
        self._jdeg = np.asarray(jdeg, dtype=np.int_)
        self._coef = np.asarray(coef, dtype=float)
        self._eq = np.asarray(eq, dtype=np.uint8)
        self._wf = np.asarray([float(x) for x in self.w])

    def w_of_label(self, lab):
        return self._values[lab]

    # -- multiprecision CDF -------------------------------------------------

    def _local(self, i, s, beta):
        """``(int_0^beta exp(w_i x) I_{i+1}(s - x) dx, sum of |parts|)`` in mp."""
        wi = self.w[i]
        total = mpmath.mpf(0)
        absum = mpmath.mpf(0)
        r = s - beta
        for lab, j, a in self.terms[i]:
            m = self.w_of_label(lab)
            scale = a * mpmath.exp(s * m)
            if lab == self.labels[i]:
                part = scale * (s ** (j + 1) - r ** (j + 1)) / factorial(j + 1)
                total += part
                absum += abs(part)
                continue
            d = wi - m
            edb = mpmath.exp(d * beta)
            for q in range(j + 1):
                part = scale * (r ** q * edb - s ** q) / (factorial(q) * d ** (j - q + 1))
                total += part
                absum += abs(part)
        return total, absum

    def _local_density(self, i, s, beta):
        wi = self.w[i]
        r = s - beta
        total = mpmath.mpf(0)
        for lab, j, a in self.terms[i]:
            m = self.w_of_label(lab)
            total += a * r ** j * mpmath.exp(wi * beta + m * r) / factorial(j)
        return total

    def conditional_cdf(self, prefix, index, beta):
        """Unnormalised CDF of coordinate ``index`` given the earlier ones.

        Includes the ``(n-1)!`` normalisation of the simplex measure and the
        factor ``exp(-<y_prefix, prefix>)``, so that at ``beta = 1 - sum(prefix)``
        it is the joint density of the prefix.
        """
        prefix = [mpmath.mpf(float(a)) for a in prefix]
        index = int(index)
        if index != len(prefix):
            raise ValidationError("prefix must fix exactly the coordinates before index")
        if not 0 <= index < self.n:
            raise ValidationError(f"index {index} out of range for n={self.n}")
        with mp.workprec(self.prec):
            alpha = mpmath.fsum(prefix)
            if any(a < 0 for a in prefix) or alpha > 1:
                raise ValidationError("prefix is not feasible")
            s = 1 - alpha
            beta = mpmath.mpf(float(beta)) if not isinstance(beta, mpmath.mpf) else +beta
            if beta < 0 or beta > s:
                raise ValidationError(f"beta must lie in [0, {mpmath.nstr(s, 17)}]")
            pre = mpmath.exp(mpmath.fsum(w * a for w, a in zip(self.w, prefix)))
            const = factorial(self.n - 1) * pre
            if index == self.n - 1:
                # last coordinate is determined; its CDF is a unit step at s
                return const * (1 if beta >= s else 0)
            return const * self._local(index, s, beta)[0]

    # -- sampling -----------------------------------------------------------

    def _invert_mp(self, u):
        """Sequential inversion in multiprecision for one sample."""
        n = self.n
        v = []
        with mp.workprec(self.prec):
            tol_bits = self.prec // 2
            s = mpmath.mpf(1)
            for i in range(n - 1):
                if s <= 0:
                    v.append(mpmath.mpf(0))
                    continue
                ui = mpmath.mpf(float(u[i]))
                Fs, absum = self._local(i, s, s)
                if not Fs > 0 or absum > Fs * mpmath.ldexp(1, self.prec // 2):
                    raise NumericInstabilityError(
                        f"conditional CDF of coordinate {i} lost too many bits to "
                        f"cancellation at {self.prec} bits",
                        estimates=(Fs, absum),
                    )
                target = ui * Fs
                lo, hi = mpmath.mpf(0), s
                beta = ui * s
                width = s * mpmath.ldexp(1, -tol_bits)
                for _ in range(4 * self.prec):
                    g = self._local(i, s, beta)[0] - target
                    if g > 0:
                        hi = beta
                    else:
                        lo = beta
                    fp = self._local_density(i, s, beta)
                    nxt = beta - g / fp if fp > 0 else (lo + hi) / 2
                    if not lo < nxt < hi:
                        nxt = (lo + hi) / 2
                    done = abs(nxt - beta) <= width or hi - lo <= width
                    beta = nxt
                    if done:
                        break
                else:
                    raise NumericInstabilityError(
                        f"CDF inversion for coordinate {i} did not converge; "
                        f"bracket [{mpmath.nstr(lo, 20)}, {mpmath.nstr(hi, 20)}]",
                        estimates=(lo, hi),
                    )
                v.append(beta)
                s = max(s - beta, mpmath.mpf(0))
            v.append(s)
        return np.array([float(x) for x in v])

    def invert(self, U):
        """Map uniforms ``U`` of shape ``(N, n-1)`` to simplex points ``(N, n)``.

        The compiled (or pure-Python) double-precision kernel handles the
        bulk; samples it flags as ill-conditioned are recomputed in
        multiprecision from the same uniforms.
        """
        U = np.ascontiguousarray(U, dtype=float)
        N = U.shape[0]
        if self.n == 1:
            return np.ones((N, 1))
        V, status = kernels.invert_simplex_cdf(
            self._wf, self._start, self._mu, self._jdeg, self._coef, self._eq, U, COND_MAX
        )
        for a in np.flatnonzero(status != kernels.OK):
            V[a] = self._invert_mp(U[a])
        return V

    def fallback_fraction(self, U):
        """Fraction of the given uniforms that the fast kernel would reject."""
        if self.n == 1:
            return 0.0
        _, status = kernels.invert_simplex_cdf(
            self._wf, self._start, self._mu, self._jdeg, self._coef, self._eq,
            np.ascontiguousarray(U, dtype=float), COND_MAX,
        )
        return float(np.mean(status != kernels.OK))


def conditional_cdf(y, prefix, index, beta, prec=DEFAULT_PREC):
    """Unnormalised conditional CDF of coordinate ``index`` (0-based).

    The target density on the simplex is ``exp(-<y, v>)``; ``prefix`` fixes
    ``v_0..v_{index-1}`` and ``beta`` ranges over ``[0, 1 - sum(prefix)]``.
    """
    return SimplexDensity(y, prec).conditional_cdf(prefix, index, beta)


def _simplex_uniforms(streams, n, size):
    return np.stack([streams.stream("simplex", i).random(size) for i in range(n - 1)],
                    axis=1) if n > 1 else np.zeros((size, 0))


def _phase_uniforms(streams, n, size):
    return np.stack([streams.stream("phase", i).random(size) for i in range(n)], axis=1)


def sample_simplex_many(y, size, rng, prec=DEFAULT_PREC, density=None):
    """``size`` simplex points with density ``exp(-<y, v>)``, shape ``(size, n)``.

    ``rng`` is a :class:`~entromax.rng.RandomStreams` or an integer seed.
    Coordinate ``i`` consumes the stream ``("simplex", i)``, so the result
    does not depend on how a run is split into batches.
    """
    streams = as_streams(rng)
    dens = density if density is not None else SimplexDensity(y, prec)
    return dens.invert(_simplex_uniforms(streams, dens.n, int(size)))


def sample_simplex(y, rng, prec=DEFAULT_PREC):
    """One :class:`SimplexPoint` with density ``exp(-<y, v>)``."""
    return SimplexPoint(sample_simplex_many(y, 1, rng, prec)[0])


def _projections(V, Z):
    x = Z * np.sqrt(V)
    X = x[:, :, None] * x[:, None, :].conj()
    # |z_i|^2 v_i is v_i up to rounding; keep the diagonal exact
    idx = np.arange(V.shape[1])
    X[:, idx, idx] = V
    return X


def sample_p1_many(Y, size, rng, prec=DEFAULT_PREC):
    """``size`` rank-one projections from ``exp(-<Y, X>) dmu_1``, shape ``(size, n, n)``.

    ``Y`` is reduced to its eigenframe; the diagonal sample is rotated back.
    """
    Y = as_hermitian(Y)
    streams = as_streams(rng)
    frame = diagonal_frame(Y)
    n = Y.n
    V = sample_simplex_many(frame.a, size, streams, prec)
    Z = np.exp(2j * np.pi * _phase_uniforms(streams, n, int(size)))
    X = _projections(V, Z)
    U = frame.U
    if not np.array_equal(U, np.eye(n)):
        X = U[None] @ X @ U.conj().T[None]
    return X


def sample_p1(Y, rng, prec=DEFAULT_PREC):
    """One rank-one projection as a :class:`HermitianMatrix`."""
    X = sample_p1_many(Y, 1, rng, prec)[0]
    return HermitianMatrix(0.5 * (X + X.conj().T))


def write_samples_jsonl(path, X, seed):
    """Write projections to ``path``, one JSON object per line, in index order."""
    with open(path, "w") as fh:
        for idx, Xi in enumerate(X):
            obj = HermitianMatrix(0.5 * (Xi + Xi.conj().T)).to_json_obj()
            obj["seed"] = int(seed)
            obj["index"] = idx
            fh.write(json.dumps(obj) + "\n")
