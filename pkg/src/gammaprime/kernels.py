"""Select the compiled kernels when built, else the numpy fallback.

Set ``GAMMAPRIME_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels
from .exceptions import PosteriorUnderflowError

try:
    if os.environ.get("GAMMAPRIME_PURE_PYTHON"):
        raise ImportError("pure-python kernels requested")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def available_backends():
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def table_stats(n11, n12, n21, n22, limit, impl=None):
    impl = impl or _impl
    return impl.table_stats(_f64(n11), _f64(n12), _f64(n21), _f64(n22), float(limit))


def posterior_weights(log_prior, xi, observed, two_sided, impl=None):
    impl = impl or _impl
    w = impl.posterior_weights(_f64(log_prior), _f64(xi), float(observed), bool(two_sided))
    if np.isnan(w).any():
        raise PosteriorUnderflowError("all posterior terms underflowed; widen the prior")
    return w


def abs_argmax(x, impl=None):
    impl = impl or _impl
    return int(impl.abs_argmax(_f64(x)))
