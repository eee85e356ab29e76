"""Hot loops of the radial solver: energy, exact gradient, Hessian bands.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy fallback is selected. Set ``ORLICZKIT_PURE_PYTHON=1`` to force the
fallback.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("ORLICZKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback

energy_parts = _impl.energy_parts
gradient = _impl.gradient
hessian_bands = _impl.hessian_bands


def backend_module(name):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
