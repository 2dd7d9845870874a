"""Naive reference pipeline.

A literal transcription of the method: a Python loop over blocks with the
counter rule spelled out, a list used as a ring buffer, and the blend formula
evaluated directly.  It shares nothing with the optimised path except the
block geometry and the block difference, and it is meant to stay slow and
obvious.
"""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from halfdr.core import Frame, FrameOrderError, FrameShapeError, PipelineConfig, block_partition
from halfdr.stability import block_diff


def _blend(delayed: np.ndarray, background: np.ndarray, alpha: float) -> np.ndarray:
    x = alpha * delayed.astype(np.float64) + (1.0 - alpha) * background.astype(np.float64)
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def reference_pipeline(
    config: PipelineConfig, frames: Iterable[Frame]
) -> tuple[list[Frame], list[Frame]]:
    """Return the background after every input frame and every output frame."""
    n_stable = config.n_stable
    n_delay = config.n_delay
    backgrounds: list[Frame] = []
    outputs: list[Frame] = []

    rects = None
    background: Optional[np.ndarray] = None
    references: list[np.ndarray] = []
    counters: list[int] = []
    ring: list[Optional[Frame]] = [None] * n_delay

    for t, frame in enumerate(frames):
        if frame.index != t:
            raise FrameOrderError(f"expected frame index {t}, got {frame.index}")
        pixels = frame.pixels
        if t == 0:
            rects = block_partition(frame.width, frame.height, config.block_size)
            background = pixels.copy()
            references = [pixels[r.slices()].copy() for r in rects]
            counters = [0] * len(rects)
        else:
            assert background is not None and rects is not None
            if pixels.shape != background.shape:
                raise FrameShapeError(f"frame {t} has shape {pixels.shape}")
            for i, rect in enumerate(rects):
                block = pixels[rect.slices()]
                if block_diff(block, references[i]) <= config.tau:
                    counters[i] += 1
                else:
                    references[i] = block.copy()
                    counters[i] = 0
                if counters[i] >= n_stable:
                    background[rect.slices()] = block
        backgrounds.append(Frame(background.copy(), t))

        if n_delay == 0:
            delayed: Optional[Frame] = frame
        else:
            slot = t % n_delay
            delayed = ring[slot] if t >= n_delay else None
            ring[slot] = frame
        if delayed is not None:
            outputs.append(Frame(_blend(delayed.pixels, background, config.alpha), delayed.index))

    return backgrounds, outputs
