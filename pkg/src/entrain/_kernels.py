"""Kernel backend selection.

Imports the compiled Cython kernels when available, otherwise the numpy
fallback. Set ``ENTRAIN_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("ENTRAIN_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
frame_rms = _impl.frame_rms
nccf_block = _impl.nccf_block


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by backend name."""
    backends: dict[str, object] = {"python": _kernels_py}
    try:
        from . import _kernels_cy
        backends["compiled"] = _kernels_cy
    except ImportError:
        pass
    return backends
