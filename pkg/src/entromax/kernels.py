"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module with identical semantics.  ``ENTROMAX_KERNELS=python`` forces the
fallback.
"""
import os

from . import _kernels_py

if os.environ.get("ENTROMAX_KERNELS", "").lower() == "python":
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

OK = _kernels_py.OK
ILL_CONDITIONED = _kernels_py.ILL_CONDITIONED
NOT_CONVERGED = _kernels_py.NOT_CONVERGED

invert_simplex_cdf = _impl.invert_simplex_cdf
mgs_orthonormalize = _impl.mgs_orthonormalize

__all__ = ["BACKEND", "OK", "ILL_CONDITIONED", "NOT_CONVERGED",
           "invert_simplex_cdf", "mgs_orthonormalize"]
