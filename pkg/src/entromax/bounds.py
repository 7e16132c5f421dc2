"""Bounding-box radii for the dual optimum.

If every half-space through the marginal carries at least ``delta`` of the
base measure after moving the marginal by up to ``eta``, the dual optimum
satisfies ``||Y*|| <= log(1/delta) / eta``.  The manifold-specific bounds
below plug a covering argument into that inequality.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import InteriorityError, ValidationError


@dataclass(frozen=True)
class InteriorEstimate:
    """Frobenius radius ``eta`` of a ball around the marginal inside the hull."""

    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ValidationError("eta must be positive")


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"{name} must be a positive finite number, got {value}")


def two_param_bound(eta, delta):
    """``log(1/delta) / eta``."""
    _positive("eta", eta)
    if not 0 < delta <= 1:
        raise ValidationError(f"delta must lie in (0, 1], got {delta}")
    return -math.log(delta) / eta


def balance_bound_pk(inv_delta, n, k):
    """Balance exponent ``f(1/delta, n) = n^2 log(4 n sqrt(k) / delta)`` for ``mu_k``."""
    return n * n * math.log(4 * n * math.sqrt(k) * inv_delta)


def bound_pk(n, k, eta):
    """``(2 n^2 / eta) log(8 n sqrt(k) / eta)`` for the traceless optimum on ``P_k``."""
    n, k = int(n), int(k)
    if not 1 <= k <= n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={n}")
    _positive("eta", eta)
    return 2 * n * n / eta * math.log(8 * n * math.sqrt(k) / eta)


def bound_convex(d, R_ball, eta):
    """``(2 d / eta) log(4 R / eta)`` for a convex body inside a ball of radius ``R``."""
    d = int(d)
    if d < 1:
        raise ValidationError("dimension must be at least 1")
    _positive("eta", eta)
    _positive("R_ball", R_ball)
    if R_ball < eta:
        raise ValidationError("need R_ball >= eta")
    return 2 * d / eta * math.log(4 * R_ball / eta)


def eta_estimate_pk(a, k, trace_tol=1e-9):
    """Conservative interiority radius for a marginal with eigenvalues ``a``.

    A Frobenius perturbation of size ``eta`` moves each eigenvalue by at most
    ``eta``, so ``eta = min_i min(a_i, 1 - a_i)`` keeps ``0 <= A + D <= I``.
    """
    a = np.asarray(a, dtype=float)
    if abs(a.sum() - k) > trace_tol:
        raise InteriorityError(
            f"marginal is not in the interior: trace {float(a.sum())!r} differs from k={k}"
        )
    if np.any(a <= 0) or np.any(a >= 1):
        raise InteriorityError(
            "marginal is not in the interior: eigenvalues must lie strictly in (0, 1), "
            f"got min {float(a.min())!r}, max {float(a.max())!r}"
        )
    return InteriorEstimate(float(np.min(np.minimum(a, 1 - a))))
