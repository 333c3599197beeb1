"""Select the discrete-scheme kernel at import time.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``CCP_PURE_PYTHON`` is set to a non-empty value, the
numpy implementation takes over. ``KERNEL`` names the active one.
"""

import os

from ccp import _fallback

if os.environ.get("CCP_PURE_PYTHON"):
    advance = _fallback.advance
    KERNEL = "numpy"
else:
    try:
        from ccp._kernels import advance
        KERNEL = "cython"
    except ImportError:  # extension not built
        advance = _fallback.advance
        KERNEL = "numpy"

__all__ = ["advance", "KERNEL"]
