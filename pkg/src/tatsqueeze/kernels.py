"""Kernel dispatch: the compiled extension when built, else the Python twins.

Set ``TATSQUEEZE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

ENGINE = "python"
if os.environ.get("TATSQUEEZE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    else:
        ENGINE = "compiled"
else:
    _compiled = None

_impl = _compiled if _compiled is not None else _pykernels

run_segments = _impl.run_segments
rk4_lyapunov = _impl.rk4_lyapunov


def get(engine: str = "auto"):
    """Kernel namespace by name: ``auto``, ``compiled`` or ``python``."""
    if engine == "auto":
        return _impl
    if engine == "python":
        return _pykernels
    if engine == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _compiled
    raise ValueError(f"unknown engine {engine!r}")


def compiled_available() -> bool:
    return _compiled is not None
