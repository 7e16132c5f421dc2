"""Certified minimisation of the dual objective by the ellipsoid method.

For a marginal ``A`` with eigenvalues ``a`` (in its eigenframe) the dual is

    F_A(y) = <a, y> + E_k(diag(y)),     y traceless,

a smooth convex function.  A central-cut ellipsoid run confined to the
ball ``||y|| <= R`` (the bounding-box radius) keeps every point that could
still be optimal, which gives a lower bound on the minimum at each step;
the run stops once the best value seen is within ``eps`` of that bound.
"""
from dataclasses import dataclass, field
import json
import logging
import math
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.linalg import null_space

from .bounds import bound_pk, eta_estimate_pk
from .errors import NumericInstabilityError, ValidationError
from .matrixcore import (DEFAULT_CLUSTER_TOL, DiagonalFrame, HermitianMatrix,
                         as_hermitian, cluster_labels, diagonal_frame)
from .oracle_pk import eval_and_grad_Ek
from .precision import DEFAULT_PREC, check_prec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FirstOrderOracle:
    """Value and gradient of ``E`` at a diagonal ``Y``.

    ``evaluate(y)`` returns ``(value, grad)`` with ``value`` an mpf and
    ``grad`` a float array of the same length as ``y``.
    """

    evaluate: Callable
    prec: int = DEFAULT_PREC

    def __call__(self, y):
        return self.evaluate(np.asarray(y, dtype=float))


def pk_oracle(k, prec=DEFAULT_PREC, tol=DEFAULT_CLUSTER_TOL):
    """Exact oracle for the uniform measure on rank-``k`` projections."""
    prec = check_prec(prec)

    def evaluate(y):
        spec, labels = cluster_labels(y, tol)
        value, grad = eval_and_grad_Ek(spec, k, prec)
        g = np.array([float(grad[lab]) for lab in labels])
        return value, g

    return FirstOrderOracle(evaluate, prec)


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Result of :func:`solve_dual`.

    ``Y_diag`` lives in the eigenframe of the marginal (``frame``), aligned
    with ``frame.a``; :attr:`Y` rotates it back.
    """

    Y_diag: np.ndarray
    F_value: mpmath.mpf
    certified_gap: float
    bounding_radius: float
    iterations: int
    marginal_residual: float
    kl_bound: float
    tv_bound: float
    frame: DiagonalFrame
    converged: bool = True
    iteration_budget: int = 0
    lower_bound: float = field(default=float("nan"))

    @property
    def Y(self):
        return self.frame.from_diagonal(self.Y_diag)

    def to_json_obj(self, prec=DEFAULT_PREC):
        from .precision import to_decimal
        return {
            "Y_diag": [float(v) for v in self.Y_diag],
            "Y": self.Y.to_json_obj(),
            "F_value": to_decimal(self.F_value, prec),
            "certified_gap": self.certified_gap,
            "bounding_radius": self.bounding_radius,
            "iterations": self.iterations,
            "iteration_budget": self.iteration_budget,
            "converged": self.converged,
            "marginal_residual": self.marginal_residual,
            "kl_bound": self.kl_bound,
            "tv_bound": self.tv_bound,
        }


def closeness_diagnostics(gap):
    """``(KL bound, TV bound) = (gap, sqrt(2 gap))`` for an additive dual gap."""
    gap = float(gap)
    if not gap >= 0:
        raise ValidationError(f"gap must be non-negative, got {gap}")
    return gap, math.sqrt(2 * gap)


def traceless_basis(n):
    """Orthonormal ``n x (n-1)`` basis of the sum-zero subspace."""
    return null_space(np.ones((1, n)))


def iteration_budget(d, R, eps, k):
    """Hard cap on ellipsoid steps from the volume argument.

    The ellipsoid starts as the ball of radius ``R sqrt(d)`` and each step
    shrinks its volume by at least ``exp(-1/(2(d+1)))``; once it is smaller
    than a ball of radius ``rho = eps / (4 sqrt(k) sqrt(d))`` the best centre
    is ``eps``-optimal.
    """
    rho = eps / (4 * math.sqrt(k) * math.sqrt(d))
    ratio = math.log(R * math.sqrt(d) / rho)
    if d == 1:
        return int(math.ceil(ratio / math.log(2))) + 8
    return int(math.ceil(2 * d * (d + 1) * ratio)) + 2 * (d + 1) ** 2


class _Trace:
    def __init__(self, path):
        self.fh = open(path, "w") if path else None

    def write(self, **rec):
        if self.fh:
            self.fh.write(json.dumps(rec) + "\n")

    def close(self):
        if self.fh:
            self.fh.close()


def _objective(a, y, oracle):
    value, grad = oracle(y)
    F = mpmath.fsum([mpmath.mpf(float(ai)) * mpmath.mpf(float(yi)) for ai, yi in zip(a, y)]) + value
    return F, a + grad


def solve_dual(A, k, eps=1e-6, oracle=None, prec=DEFAULT_PREC, trace_path=None,
               max_iter=None):
    """Minimise ``F_A`` over traceless ``Y`` to certified additive accuracy ``eps``.

    Parameters
    ----------
    A : HermitianMatrix or array_like
        Marginal with trace ``k`` and eigenvalues strictly inside ``(0, 1)``.
    k : int
        Rank of the projections.
    eps : float
        Target gap between the returned value and the minimum.
    oracle : FirstOrderOracle, optional
        Defaults to :func:`pk_oracle`.
    trace_path : str, optional
        If given, one JSON line per iteration is written there.

    Returns
    -------
    DualSolution

    Raises
    ------
    InteriorityError
        If ``A`` is not in the interior of the hull of rank-``k`` projections.
    """
    A = as_hermitian(A)
    k = int(k)
    eps = float(eps)
    if not eps > 0:
        raise ValidationError("eps must be positive")
    prec = check_prec(prec)
    if not 1 <= k <= A.n:
        raise ValidationError(f"need 1 <= k <= n, got k={k}, n={A.n}")
    frame = diagonal_frame(A)
    a = np.asarray(frame.a, dtype=float)
    eta = eta_estimate_pk(a, k).eta
    n = a.size
    d = n - 1
    R = bound_pk(n, k, eta)
    oracle = oracle if oracle is not None else pk_oracle(k, prec)
    B = traceless_basis(n)
    budget = iteration_budget(d, R, eps, k)
    if max_iter is not None:
        budget = min(budget, int(max_iter))

    c = np.zeros(d)
    P = (R * R * d) * np.eye(d)
    best_F = None
    best_z = c.copy()
    best_g = None
    lower = -math.inf
    cuts_F, cuts_g, cuts_c = [], [], []
    trace = _Trace(trace_path)
    it = 0
    gap = math.inf
    try:
        while it < budget:
            it += 1
            norm_c = float(np.linalg.norm(c))
            value = None
            if norm_c > R:
                g = c / norm_c
            else:
                y = B @ c
                y -= y.mean()
                try:
                    F, grad = _objective(a, y, oracle)
                except NumericInstabilityError as exc:
                    raise NumericInstabilityError(
                        f"oracle failed at ellipsoid iteration {it} (||y||={norm_c:.6g}): {exc}",
                        estimates=exc.estimates,
                    ) from exc
                value = F
                g = B.T @ grad
                if best_F is None or F < best_F:
                    best_F, best_z, best_g = F, c.copy(), grad
                cuts_F.append(float(F))
                cuts_g.append(g)
                cuts_c.append(c.copy())
            gPg = float(g @ P @ g)
            if not gPg > 0:
                if value is not None:
                    # zero gradient at an interior centre: exact minimiser
                    lower = max(lower, float(best_F))
                    gap = 0.0
                    trace.write(iter=it, center_norm=norm_c, value=float(value), gap=gap)
                    break
                raise NumericInstabilityError("degenerate ellipsoid")
            # shrink
            if d == 1:
                r = math.sqrt(P[0, 0])
                c = c - math.copysign(r / 2, g[0])
                P = P / 4
            else:
                b = P @ g / math.sqrt(gPg)
                c = c - b / (d + 1)
                P = (d * d / (d * d - 1.0)) * (P - (2.0 / (d + 1)) * np.outer(b, b))
                P = 0.5 * (P + P.T)
            # every cut keeps the minimiser, so it lies in the new ellipsoid too
            if cuts_F:
                G = np.asarray(cuts_g)
                C = np.asarray(cuts_c)
                widths = np.sqrt(np.maximum(np.einsum("si,ij,sj->s", G, P, G), 0.0))
                bounds = np.asarray(cuts_F) + np.einsum("si,si->s", G, c - C) - widths
                lower = max(lower, float(bounds.max()))
            if best_F is not None:
                gap = max(float(best_F) - lower, 0.0)
            trace.write(iter=it, center_norm=norm_c,
                        value=None if value is None else float(value), gap=gap)
            if gap <= eps:
                break
    finally:
        trace.close()

    if best_F is None:
        raise NumericInstabilityError("ellipsoid never visited the feasible ball")
    converged = gap <= eps
    if not converged:
        log.warning("ellipsoid budget of %d iterations exhausted with gap %.3g", budget, gap)
    y = B @ best_z
    y -= y.mean()
    kl, tv = closeness_diagnostics(gap)
    return DualSolution(
        Y_diag=y,
        F_value=best_F,
        certified_gap=gap,
        bounding_radius=R,
        iterations=it,
        marginal_residual=float(np.linalg.norm(best_g)),
        kl_bound=kl,
        tv_bound=tv,
        frame=frame,
        converged=converged,
        iteration_budget=budget,
        lower_bound=lower,
    )


def barycentric_entropy(rho, eps=1e-6, prec=DEFAULT_PREC, trace_path=None):
    """Barycentric entropy ``-min F_rho`` of a density matrix, to within ``eps``.

    This is the smallest relative entropy, with respect to the uniform
    measure on pure states, of a distribution whose mean is ``rho``.
    """
    rho = as_hermitian(rho)
    sol = solve_dual(rho, 1, eps, prec=prec, trace_path=trace_path)
    return -sol.F_value
