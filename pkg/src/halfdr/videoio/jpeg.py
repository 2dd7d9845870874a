"""Baseline JFIF encoding for the Motion JPEG output (backed by Pillow)."""

from __future__ import annotations

import io

from PIL import Image

from halfdr.core import Frame

DEFAULT_QUALITY = 85


def encode_jpeg(frame: Frame, quality: int = DEFAULT_QUALITY) -> bytes:
    """Encode one frame as a baseline (non-progressive) JFIF byte string."""
    if not isinstance(quality, int) or not 1 <= quality <= 100:
        raise ValueError(f"JPEG quality must be an integer in [1, 100], got {quality!r}")
    buf = io.BytesIO()
    Image.fromarray(frame.pixels, "RGB").save(
        buf, format="JPEG", quality=quality, optimize=False, progressive=False
    )
    return buf.getvalue()
