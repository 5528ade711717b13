"""Kernel backend selection.

The compiled Cython core (sievekit._kernels) is preferred when present;
otherwise the vectorized numpy fallback (sievekit._kernels_py) is used.
Set SIEVEKIT_PURE=1 to force the fallback.  Both backends implement the
same operations in the same IEEE order and produce bit-identical tables.
"""

from __future__ import annotations

import os

from . import _kernels_py as pure

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if os.environ.get("SIEVEKIT_PURE", "").strip() not in ("", "0"):
    _active = pure
else:
    _active = _compiled if _compiled is not None else pure


def available() -> list[str]:
    names = ["pure"]
    if _compiled is not None:
        names.insert(0, "compiled")
    return names


def name() -> str:
    return _active.BACKEND_NAME


def use(which: str) -> None:
    """Select a backend by name ('pure', 'compiled', or 'auto')."""
    global _active
    if which == "pure":
        _active = pure
    elif which == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled backend is not built")
        _active = _compiled
    elif which == "auto":
        _active = _compiled if _compiled is not None else pure
    else:
        raise ValueError(f"unknown backend {which!r}")


def interp_batch(values, nvalid, u_min, h, kind, a, e, uq, kink_stride=0):
    return _active.interp_batch(values, nvalid, u_min, h, kind, a, e, uq,
                                kink_stride)


def advance_self_full(values, n_steps, u_min, h, d_steps, p, cp, kind, a, e):
    return _active.advance_self_full(
        values, n_steps, u_min, h, d_steps, p, cp, kind, a, e
    )
