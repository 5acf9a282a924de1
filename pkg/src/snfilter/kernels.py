"""Backend selection for the hot kernels.

The compiled extension is used when importable; set ``SNFILTER_PURE_PYTHON=1``
to force the pure-Python fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from . import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()

if os.environ.get("SNFILTER_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    active: ModuleType = _pykernels
else:
    active = _compiled

BACKEND: str = active.BACKEND


def available() -> dict[str, ModuleType]:
    """All importable backends by name."""
    found = {"python": _pykernels}
    if _compiled is not None:
        found["cython"] = _compiled
    return found


def get(name: str | None = None) -> ModuleType:
    if name is None:
        return active
    try:
        return available()[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available") from None
