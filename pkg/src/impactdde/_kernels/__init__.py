"""Stepping-kernel backend selection.

The compiled Cython core is used when available; set ``IMPACTDDE_PURE=1``
to force the pure-Python reference implementation.
"""

import os

if os.environ.get("IMPACTDDE_PURE"):
    from . import _ref as _impl
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _ref as _impl

run_contact = _impl.run_contact
run_prescribed = _impl.run_prescribed
BACKEND = _impl.BACKEND

__all__ = ["run_contact", "run_prescribed", "BACKEND"]
