"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise. ``SPECMASK_BACKEND=python`` or ``=compiled`` forces a choice
(the latter raises if the extension is missing).
"""

import os

_requested = os.environ.get("SPECMASK_BACKEND", "").strip().lower()

if _requested not in ("", "python", "compiled"):
    raise ValueError(
        f"SPECMASK_BACKEND={_requested!r} is not a backend name; "
        "use 'python' or 'compiled'"
    )

if _requested == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _kernels_py as kernels  # type: ignore[no-redef]

BACKEND = kernels.BACKEND_NAME
