"""Delivery event-loop kernels: compiled extension with a pure-Python twin.

The compiled module is used when present; set ``D2DRANGE_PURE_PYTHON=1`` to
force the fallback. Both implement the same contract and produce
bit-identical outputs (covered by the equivalence tests).
"""

import os

from . import _pyloop

if os.environ.get("D2DRANGE_PURE_PYTHON"):
    _impl = _pyloop
else:
    try:
        from . import _evloop as _impl
    except ImportError:
        _impl = _pyloop

deliver_events = _impl.deliver_events
BACKEND = _impl.BACKEND


def available_backends():
    """Names of the kernel backends importable in this installation."""
    names = ["python"]
    try:
        from . import _evloop  # noqa: F401

        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_backend(name: str):
    """Fetch a specific kernel implementation ('compiled' or 'python')."""
    if name == "python":
        return _pyloop
    if name == "compiled":
        from . import _evloop

        return _evloop
    raise ValueError(f"unknown kernel backend {name!r}")
