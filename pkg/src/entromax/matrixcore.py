"""Hermitian matrices, spectra and the diagonal reduction.

Every oracle downstream works with a real diagonal ``Y``: the base measures
are unitarily invariant, so a Hermitian marginal can be rotated into its
eigenbasis, solved there, and rotated back.  This module owns that
reduction, the eigendecomposition it relies on, and the clustering of
nearly-equal eigenvalues into a :class:`Spectrum`.
"""
from dataclasses import dataclass
import json

import mpmath
import numpy as np

from .errors import ValidationError

DEFAULT_CLUSTER_TOL = 1e-9
_HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense complex self-adjoint matrix.

    Construction checks ``H[i, j] == conj(H[j, i])`` to ``1e-12 * max|H|``
    and forces the diagonal to be exactly real.  The stored array is
    read-only.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValidationError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        scale = float(np.max(np.abs(a))) if a.size else 0.0
        diff = np.abs(a - a.conj().T)
        if scale > 0 and diff.max() > _HERMITIAN_RTOL * scale:
            i, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
            raise ValidationError(
                f"matrix is not Hermitian: entries ({i},{j})={a[i, j]} and "
                f"({j},{i})={a[j, i]} are not conjugate"
            )
        idx = np.arange(a.shape[0])
        a[idx, idx] = a[idx, idx].real
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    @classmethod
    def diag(cls, values):
        return cls(np.diag(np.asarray(values, dtype=float)))

    def to_numpy(self):
        return self.entries.copy()

    def is_diagonal(self):
        off = self.entries - np.diag(np.diag(self.entries))
        return not np.any(off)

    def __array__(self, dtype=None, copy=None):
        return self.entries.astype(dtype) if dtype is not None else self.entries.copy()

    def __repr__(self):
        return f"HermitianMatrix(n={self.n})"

    # JSON: {"n": int, "re": [[...]], "im": [[...]]}, "im" optional.
    def to_json_obj(self):
        return {
            "n": self.n,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json_obj(cls, obj):
        try:
            n = int(obj["n"])
            re = np.asarray(obj["re"], dtype=float)
            im = np.asarray(obj.get("im", np.zeros((n, n))), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed matrix JSON: {exc}") from exc
        if re.shape != (n, n) or im.shape != (n, n):
            raise ValidationError(
                f"matrix JSON declares n={n} but has re {re.shape}, im {im.shape}"
            )
        return cls(re + 1j * im)


def load_matrix(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return HermitianMatrix.from_json_obj(obj)


def as_hermitian(H):
    return H if isinstance(H, HermitianMatrix) else HermitianMatrix(H)


def eigh(H):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, U)`` with ``H = U @ diag(w) @ U^*``.  Non-Hermitian input
    raises :class:`ValidationError` naming the worst entry pair.
    """
    H = as_hermitian(H)
    a = H.entries
    if H.is_diagonal():
        d = a.diagonal().real
        order = np.argsort(-d, kind="stable")
        U = np.eye(H.n, dtype=np.complex128)[:, order]
        return d[order].copy(), U
    w, U = np.linalg.eigh(a)
    return w[::-1].copy(), U[:, ::-1].copy()


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalues ``distinct[0] > distinct[1] > ...`` with multiplicities."""

    distinct: tuple
    mult: tuple

    def __post_init__(self):
        distinct = tuple(mpmath.mpf(v) for v in self.distinct)
        mult = tuple(int(m) for m in self.mult)
        if len(distinct) != len(mult) or not distinct:
            raise ValidationError("spectrum needs one multiplicity per distinct value")
        if any(m < 1 for m in mult):
            raise ValidationError("multiplicities must be positive")
        if any(not (a > b) for a, b in zip(distinct, distinct[1:])):
            raise ValidationError("distinct values must be strictly descending")
        object.__setattr__(self, "distinct", distinct)
        object.__setattr__(self, "mult", mult)

    @property
    def n(self):
        return sum(self.mult)

    def __len__(self):
        return len(self.distinct)

    def expanded(self):
        """Per-coordinate values (descending), length ``n``."""
        return [v for v, m in zip(self.distinct, self.mult) for _ in range(m)]

    def expand(self, per_cluster):
        """Repeat one value per cluster into a length-``n`` list."""
        return [g for g, m in zip(per_cluster, self.mult) for _ in range(m)]

    def shifted(self, c, prec=512):
        """Exact-ish shift of every value by ``c`` (computed at ``prec`` bits)."""
        with mpmath.mp.workprec(prec):
            c = mpmath.mpf(c)
            return Spectrum(tuple(v + c for v in self.distinct), self.mult)

    def negated(self):
        return Spectrum(tuple(-v for v in reversed(self.distinct)), tuple(reversed(self.mult)))


def cluster_labels(y, tol=DEFAULT_CLUSTER_TOL):
    """Cluster ``y`` and report which cluster each coordinate fell into.

    Returns ``(spectrum, labels)`` where ``labels[i]`` indexes
    ``spectrum.distinct``.  See :func:`cluster_spectrum` for the rule.
    """
    if tol <= 0:
        raise ValidationError("cluster tolerance must be positive")
    vals = [mpmath.mpf(v) for v in (y.tolist() if isinstance(y, np.ndarray) else y)]
    if not vals:
        raise ValidationError("cannot cluster an empty vector")
    if any(not mpmath.isfinite(v) for v in vals):
        raise ValidationError("spectrum values must be finite")
    order = sorted(range(len(vals)), key=lambda i: vals[i], reverse=True)
    labels = np.empty(len(vals), dtype=int)
    with mpmath.mp.workprec(256):
        radius = tol * (1 + max(abs(v) for v in vals))
        groups = [[vals[order[0]]]]
        labels[order[0]] = 0
        for i in order[1:]:
            if groups[-1][-1] - vals[i] > radius:
                groups.append([])
            groups[-1].append(vals[i])
            labels[i] = len(groups) - 1
        distinct = tuple(mpmath.fsum(g) / len(g) for g in groups)
    return Spectrum(distinct, tuple(len(g) for g in groups)), labels


def cluster_spectrum(y, tol=DEFAULT_CLUSTER_TOL):
    """Group a real vector into a :class:`Spectrum`.

    Values are sorted descending and consecutive values closer than
    ``tol * (1 + max|y|)`` join the same cluster.  Each cluster is represented
    by its arithmetic mean.
    """
    return cluster_labels(y, tol)[0]


@dataclass(frozen=True, eq=False)
class DiagonalFrame:
    """Eigenframe of a marginal: ``A = U diag(a) U^*`` with ``a`` descending."""

    U: np.ndarray
    a: np.ndarray

    def to_frame(self, H):
        """Express ``H`` in this frame, ``U^* H U``."""
        return self.U.conj().T @ np.asarray(H) @ self.U

    def from_diagonal(self, d):
        """Rotate a diagonal back to the original basis, ``U diag(d) U^*``."""
        d = np.asarray(d, dtype=float)
        return HermitianMatrix((self.U * d) @ self.U.conj().T)


def diagonal_frame(A):
    """Eigenframe of a Hermitian marginal (see :class:`DiagonalFrame`)."""
    w, U = eigh(A)
    return DiagonalFrame(U=U, a=w)
