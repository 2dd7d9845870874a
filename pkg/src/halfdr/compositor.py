"""Blend the delayed live frame over the background.

``out = floor(alpha * delayed + (1 - alpha) * background + 0.5)`` per channel.
The formula is evaluated once per (delayed, background) value pair into a
65536-entry table, so the per-frame work is a single gather and the result is
bit-identical to evaluating the expression directly in float64.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Optional

import numpy as np

from halfdr.core import Frame, FrameShapeError


def blend_value(delayed: int, background: int, alpha: float) -> int:
    """Scalar reference of the blend, round-half-up."""
    x = alpha * delayed + (1.0 - alpha) * background
    return min(255, max(0, int(np.floor(x + 0.5))))


@lru_cache(maxsize=16)
def blend_table(alpha: float) -> np.ndarray:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    d = np.arange(256, dtype=np.float64)[:, None]
    b = np.arange(256, dtype=np.float64)[None, :]
    x = alpha * d + (1.0 - alpha) * b
    table = np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8).ravel()
    table.flags.writeable = False
    return table


def blend_into(
    out: np.ndarray, delayed: np.ndarray, background: np.ndarray, table: np.ndarray
) -> np.ndarray:
    idx = delayed.astype(np.uint16)
    idx <<= 8
    idx |= background
    np.take(table, idx, out=out)
    return out


def composite(
    delayed: Frame, background: Frame, alpha: float, out: Optional[np.ndarray] = None
) -> Frame:
    """Half-transparent overlay of ``delayed`` onto ``background``.

    The result carries the delayed frame's index.
    """
    if delayed.shape != background.shape:
        raise FrameShapeError(
            f"cannot composite {delayed.width}x{delayed.height} over "
            f"{background.width}x{background.height}"
        )
    if out is None:
        out = np.empty_like(delayed.pixels)
    blend_into(out, delayed.pixels, background.pixels, blend_table(float(alpha)))
    return Frame(out, delayed.index)
