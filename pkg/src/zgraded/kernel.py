"""Selects the term kernel at import time.

Preference order: compiled extension if built, else the pure-Python
fallback.  Set ZGRADED_KERNEL=py or =c to force one (forcing `c` raises
if the extension was never built).
"""

import os

_choice = os.environ.get("ZGRADED_KERNEL", "auto")

if _choice not in ("auto", "py", "c"):
    raise RuntimeError(f"ZGRADED_KERNEL must be auto|py|c, got {_choice!r}")

_impl = None
if _choice in ("auto", "c"):
    try:
        from . import _kernel_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _choice == "c":
            raise
        _impl = None
if _impl is None:
    from . import _kernel_py as _impl

IMPL = _impl.IMPL
mono_mul = _impl.mono_mul
terms_mul = _impl.terms_mul
terms_add = _impl.terms_add
terms_scale = _impl.terms_scale
