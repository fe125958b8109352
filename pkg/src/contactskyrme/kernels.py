"""Backend selection for the per-node kernels.

The compiled extension ``_ckernels`` is used when it has been built; otherwise
the numpy versions in ``_kernels_py`` are used.  Setting the environment
variable ``CONTACTSKYRME_PURE_PYTHON=1`` forces the fallback.
"""

import importlib
import os

from . import _kernels_py

_NAMES = ("frame_vectors", "pullback_components", "energy_degree")


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module("contactskyrme._ckernels")
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    out = ["python"]
    try:
        load_backend("cython")
    except ImportError:
        pass
    else:
        out.insert(0, "cython")
    return out


if os.environ.get("CONTACTSKYRME_PURE_PYTHON", "") not in ("", "0"):
    _impl, BACKEND = _kernels_py, "python"
else:
    try:
        _impl, BACKEND = load_backend("cython"), "cython"
    except ImportError:
        _impl, BACKEND = _kernels_py, "python"

frame_vectors = _impl.frame_vectors
pullback_components = _impl.pullback_components
energy_degree = _impl.energy_degree
