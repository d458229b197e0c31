"""Kernel selection.

The compiled core is used when it imports; otherwise the numpy fallback.
Set ``FHP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from fhp import _pykernels

if os.environ.get("FHP_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from fhp import _core as _impl
    except ImportError:
        _impl = _pykernels

IMPLEMENTATION: str = _impl.IMPLEMENTATION
motion_pull = _impl.motion_pull
motion_lanes = _impl.motion_lanes
motion_tiles = _impl.motion_tiles
collide = _impl.collide
collide_tiles = _impl.collide_tiles


def available() -> dict:
    """All importable kernel implementations by name, for differential tests and benchmarks."""
    impls = {"python": _pykernels}
    try:
        from fhp import _core

        impls["cython"] = _core
    except ImportError:
        pass
    return impls
