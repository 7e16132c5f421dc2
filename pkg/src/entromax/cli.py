"""Command-line interface.

Every subcommand prints one JSON object to standard output.  High-precision
scalars are written as decimal strings with enough digits to round-trip at
the working precision.

Exit codes: 0 success, 1 invalid input, 2 numerical instability,
3 marginal not in the interior.
"""
import argparse
from dataclasses import dataclass
import json
import os
import sys
from typing import Optional

import mpmath
import numpy as np

from .bounds import bound_pk
from .ellipsoid import barycentric_entropy, solve_dual
from .errors import InteriorityError, NumericInstabilityError, ValidationError
from .matrixcore import DEFAULT_CLUSTER_TOL, HermitianMatrix, cluster_labels, eigh
from .oracle_pk import eval_and_grad_Ek
from .oracle_v1 import eval_Ev1, gw_optimum
from .precision import DEFAULT_PREC, check_prec, to_decimal
from .sampler import sample_p1_many, write_samples_jsonl

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_INTERIOR = 3

PRECISION_ENV = "ENTROMAX_PRECISION"


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by all subcommands."""

    precision_bits: int = DEFAULT_PREC
    cluster_tol: float = DEFAULT_CLUSTER_TOL
    epsilon: float = 1e-6
    seed: int = 0
    trace_path: Optional[str] = None

    def __post_init__(self):
        check_prec(self.precision_bits)
        if not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if not self.cluster_tol > 0:
            raise ValidationError("cluster tolerance must be positive")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _default_precision():
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_PREC
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from exc


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def _read_y(path):
    """A real vector, ``{"y": [...]}``, or a matrix in the shared JSON format."""
    obj = _read_json(path)
    if isinstance(obj, dict) and "y" in obj:
        obj = obj["y"]
    if isinstance(obj, list):
        try:
            y = np.asarray(obj, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: expected a list of numbers") from exc
        if y.ndim != 1 or y.size == 0:
            raise ValidationError(f"{path}: expected a non-empty list of numbers")
        return HermitianMatrix.diag(y)
    if isinstance(obj, dict):
        return HermitianMatrix.from_json_obj(obj)
    raise ValidationError(f"{path}: expected a vector or a matrix object")


def _read_matrix(path):
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: expected a matrix object")
    return HermitianMatrix.from_json_obj(obj)


def _dec(x, cfg):
    return to_decimal(x, cfg.precision_bits)


def _matrix_json(M):
    M = np.asarray(M)
    return {"n": M.shape[0], "re": M.real.tolist(), "im": np.imag(M).tolist()}


def cmd_eval(args, cfg):
    Y = _read_y(args.y)
    if args.manifold == "pk":
        if args.k is None:
            raise ValidationError("eval --manifold pk needs --k")
        w, U = eigh(Y)
        spec, labels = cluster_labels(w, cfg.cluster_tol)
        E, grad = eval_and_grad_Ek(spec, args.k, cfg.precision_bits)
        g = [grad[lab] for lab in labels]
        out = {"E": _dec(E, cfg)}
        if Y.is_diagonal():
            # eigh sorted the diagonal; report the gradient in input order
            order = np.argsort(-Y.entries.diagonal().real, kind="stable")
            per = [None] * Y.n
            for pos, idx in enumerate(order):
                per[idx] = g[pos]
            out["grad"] = [_dec(v, cfg) for v in per]
        else:
            G = (U * np.array([float(v) for v in g])) @ U.conj().T
            out["grad"] = _matrix_json(G)
        return out
    # v1: real symmetric Y
    if np.any(Y.entries.imag):
        raise ValidationError("eval --manifold v1 needs a real symmetric Y")
    Yr = Y.entries.real
    E = eval_Ev1(Yr, cfg.precision_bits)
    if mpmath.isinf(E):
        return {"E": "Infinity", "grad": None}
    grad = -0.5 * np.linalg.inv(Yr)
    return {"E": _dec(E, cfg), "grad": _matrix_json(0.5 * (grad + grad.T))}


def cmd_solve(args, cfg):
    A = _read_matrix(args.marginal)
    sol = solve_dual(A, args.k, cfg.epsilon, prec=cfg.precision_bits,
                     trace_path=cfg.trace_path)
    return sol.to_json_obj(cfg.precision_bits)


def cmd_entropy(args, cfg):
    rho = _read_matrix(args.rho)
    H = barycentric_entropy(rho, cfg.epsilon, cfg.precision_bits, cfg.trace_path)
    return {"H_b": _dec(H, cfg), "eps": cfg.epsilon}


def cmd_sample(args, cfg):
    Y = _read_y(args.y)
    if args.n < 1:
        raise ValidationError("--n must be at least 1")
    X = sample_p1_many(Y, args.n, cfg.seed, cfg.precision_bits)
    write_samples_jsonl(args.out, X, cfg.seed)
    return {"written": int(args.n), "out": args.out, "seed": cfg.seed}


def cmd_gw(args, cfg):
    A = _read_matrix(args.a)
    if np.any(A.entries.imag):
        raise ValidationError("gw needs a real symmetric A")
    Ar = A.entries.real
    Ys = gw_optimum(Ar)
    E = eval_Ev1(Ys, cfg.precision_bits)
    with mpmath.workprec(cfg.precision_bits):
        F = mpmath.fsum(mpmath.mpf(float(x)) for x in (Ys * Ar).ravel()) + E
    return {"Y_star": _matrix_json(Ys), "E": _dec(E, cfg), "F": _dec(F, cfg)}


def cmd_bound(args, cfg):
    return {"R": bound_pk(args.n, args.k, args.eta)}


def build_parser():
    p = _Parser(prog="entromax", description="Maximum-entropy distributions on matrix manifolds.")
    p.add_argument("--precision", type=int, default=None,
                   help=f"working precision in bits (default {DEFAULT_PREC}, or ${PRECISION_ENV})")
    p.add_argument("--cluster-tol", type=float, default=DEFAULT_CLUSTER_TOL)
    p.add_argument("--trace", default=None, help="JSONL iteration trace for solve/entropy")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("eval", help="exponential integral and gradient")
    s.add_argument("--manifold", choices=("pk", "v1"), required=True)
    s.add_argument("--k", type=int)
    s.add_argument("--y", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("solve", help="certified dual solve for a marginal")
    s.add_argument("--marginal", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--eps", type=float, default=1e-6)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("entropy", help="barycentric entropy of a density matrix")
    s.add_argument("--rho", required=True)
    s.add_argument("--eps", type=float, default=1e-6)
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("sample", help="rank-one samples from exp(-<Y, X>)")
    s.add_argument("--y", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("gw", help="Goemans-Williamson optimum for a PD marginal")
    s.add_argument("--a", required=True)
    s.set_defaults(func=cmd_gw)

    s = sub.add_parser("bound", help="bounding-box radius for rank-k projections")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--eta", type=float, required=True)
    s.set_defaults(func=cmd_bound)
    return p


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        prec = args.precision if args.precision is not None else _default_precision()
        cfg = RunConfig(
            precision_bits=prec,
            cluster_tol=args.cluster_tol,
            epsilon=getattr(args, "eps", 1e-6),
            seed=getattr(args, "seed", 0),
            trace_path=args.trace,
        )
        out = args.func(args, cfg)
    except InteriorityError as exc:
        print(f"entromax: {exc}", file=stderr)
        return EXIT_INTERIOR
    except NumericInstabilityError as exc:
        print(f"entromax: numerical instability: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (ValidationError, OverflowError) as exc:
        print(f"entromax: {exc}", file=stderr)
        return EXIT_VALIDATION
    stdout.write(json.dumps(out) + "\n")
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
