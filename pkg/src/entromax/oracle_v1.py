"""Closed-form oracle on real rank-one outer products ``v v^T``.

With the base measure taken as the pushforward of Lebesgue measure on R^n,
the exponential integral is Gaussian::

    E(Y) = (n/2) log(pi) - (1/2) log det(Y)      (Y positive definite)

and diverges otherwise.  The max-entropy distribution with marginal ``A`` is
therefore ``exp(-<A^{-1}/2, X>)``, i.e. the Goemans-Williamson rounding
measure ``v = V g`` with ``V V^T = A``.
"""
from dataclasses import dataclass

import mpmath
from mpmath import mp
import numpy as np
from scipy import linalg

from .errors import ValidationError
from .precision import DEFAULT_PREC

INFINITE = mpmath.inf
_SYM_RTOL = 1e-12


def _symmetric(Y, name="Y"):
    Y = np.asarray(Y)
    if np.iscomplexobj(Y):
        if np.any(Y.imag):
            raise ValidationError(f"{name} must be real")
        Y = Y.real
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {Y.shape}")
    scale = np.max(np.abs(Y)) if Y.size else 0.0
    if np.max(np.abs(Y - Y.T), initial=0.0) > _SYM_RTOL * max(scale, 1e-300):
        raise ValidationError(f"{name} is not symmetric")
    return Y


@dataclass(frozen=True, eq=False)
class SymmetricPD:
    """Real symmetric positive definite matrix with its Cholesky factor."""

    matrix: np.ndarray
    chol: np.ndarray

    @classmethod
    def from_array(cls, A):
        A = _symmetric(A, "A")
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("A is not positive definite") from exc
        return cls(A, L)

    @property
    def n(self):
        return self.matrix.shape[0]


def _as_spd(A):
    return A if isinstance(A, SymmetricPD) else SymmetricPD.from_array(A)


def eval_Ev1(Y, prec=DEFAULT_PREC):
    """Exponential integral on ``V_1``; :data:`INFINITE` unless ``Y`` is PD."""
    Y = _symmetric(Y)
    n = Y.shape[0]
    with mp.workprec(prec):
        try:
            L = mp.cholesky(mp.matrix(Y.tolist()))
        except ValueError:
            return INFINITE
        logdet = 2 * mpmath.fsum(mpmath.log(L[i, i]) for i in range(n))
        if not mpmath.isfinite(logdet):
            return INFINITE
        return mpmath.mpf(n) / 2 * mpmath.log(mpmath.pi) - logdet / 2


def grad_Ev1(Y):
    """``-Y^{-1}/2`` for positive definite ``Y``."""
    spd = _as_spd(Y)
    return -0.5 * linalg.cho_solve((spd.chol, True), np.eye(spd.n))


def gw_optimum(A):
    """Dual optimum ``Y* = A^{-1}/2`` for a positive definite marginal ``A``.

    A singular or indefinite ``A`` has no finite optimiser and raises
    :class:`ValidationError`.
    """
    spd = _as_spd(A)
    Y = 0.5 * linalg.cho_solve((spd.chol, True), np.eye(spd.n))
    return 0.5 * (Y + Y.T)


def stationarity_residual(A, Y):
    """Frobenius norm of ``A - Y^{-1}/2``, the dual gradient at ``Y``."""
    A = _symmetric(A, "A")
    return float(np.linalg.norm(A + grad_Ev1(Y)))


def gw_sample(A, rng, size=None):
    """Draw ``v = V g`` with ``V`` the Cholesky factor of ``A``.

    Returns shape ``(n,)`` when ``size`` is None, else ``(size, n)``.
    """
    spd = _as_spd(A)
    g = rng.standard_normal(spd.n if size is None else (size, spd.n))
    return g @ spd.chol.T


def gw_log_density(A, v):
    """Unnormalised log density ``-<A^{-1}/2, v v^T>`` of the GW measure."""
    Y = gw_optimum(A)
    v = np.atleast_2d(v)
    out = -np.einsum("ni,ij,nj->n", v, Y, v)
    return out if out.size > 1 else float(out[0])


def projected_density_ratio(A, v1, v2, prec=DEFAULT_PREC):
    """``<A, v1 v1*>^{-n} / <A, v2 v2*>^{-n}`` for unit vectors ``v1, v2``.

    This is the density ratio of the Gaussian measure radially projected to
    the unit sphere.
    """
    A = np.asarray(A)
    n = A.shape[0]
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    for v in (v1, v2):
        if abs(np.linalg.norm(v) - 1) > 1e-12:
            raise ValidationError("projected_density_ratio needs unit vectors")
    q1 = float(np.real(np.vdot(v1, A @ v1)))
    q2 = float(np.real(np.vdot(v2, A @ v2)))
    if q1 <= 0 or q2 <= 0:
        raise ValidationError("<A, v v*> must be positive (A positive definite)")
    with mp.workprec(prec):
        return (mpmath.mpf(q2) / mpmath.mpf(q1)) ** n


def circle_grid(points=16):
    """Real unit vectors at angles ``pi j / points`` (``v v^T`` covers RP^1 once)."""
    th = np.pi * np.arange(points) / points
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def exp_family_fit_residual(A, grid=None):
    """Best least-squares fit of the projected log-density by ``c - <B, v v^T>``.

    Returns the minimal residual sum of squares over constants ``c`` and
    symmetric ``B``.  A strictly positive value means the projected density
    is not of exponential-family form on the grid.
    """
    A = _symmetric(A, "A")
    n = A.shape[0]
    V = circle_grid() if grid is None else np.asarray(grid, dtype=float)
    logg = -n * np.log(np.einsum("gi,ij,gj->g", V, A, V))
    iu = np.triu_indices(n)
    feats = [np.ones(len(V))]
    for i, j in zip(*iu):
        feats.append(-(1 if i == j else 2) * V[:, i] * V[:, j])
    X = np.stack(feats, axis=1)
    coef, *_ = np.linalg.lstsq(X, logg, rcond=None)
    r = logg - X @ coef
    return float(r @ r)
