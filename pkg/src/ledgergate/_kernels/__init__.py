"""Serialization kernel selection.

Prefers the compiled extension, falls back to the pure-Python twin when the
extension was not built. ``LEDGERGATE_PURE_KERNELS=1`` forces the fallback
(used by the kernel benchmark and for debugging).
"""

from __future__ import annotations

import os

from .errors import InvalidCharacterError, NonCanonicalizableError

if os.environ.get("LEDGERGATE_PURE_KERNELS") == "1":
    from ._pure import base58_decode, base58_encode, canonical_json, format_int, format_number

    KERNEL_BACKEND = "pure"
else:
    try:
        from ._speedups import (  # type: ignore[no-redef]
            base58_decode,
            base58_encode,
            canonical_json,
            format_int,
            format_number,
        )

        KERNEL_BACKEND = "compiled"
    except ImportError:
        from ._pure import (  # type: ignore[no-redef]
            base58_decode,
            base58_encode,
            canonical_json,
            format_int,
            format_number,
        )

        KERNEL_BACKEND = "pure"

__all__ = [
    "KERNEL_BACKEND",
    "InvalidCharacterError",
    "NonCanonicalizableError",
    "base58_decode",
    "base58_encode",
    "canonical_json",
    "format_int",
    "format_number",
]
