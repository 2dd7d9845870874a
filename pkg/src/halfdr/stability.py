"""Block-wise temporal stability and the delayed-commit background model.

Each block keeps a reference copy of its content and a counter of
consecutive frames within ``tau`` of that reference.  A block whose content
changes gets a fresh reference and a zeroed counter; once the counter reaches
``n_stable`` the current content is written into the background, and it keeps
being refreshed for as long as the block stays stable.  A hand that keeps
moving therefore never reaches the background, while a piece that was put
down shows up exactly ``n_stable`` frames after it came to rest.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from halfdr.core import (
    BlockRect,
    Frame,
    FrameOrderError,
    FrameShapeError,
    PipelineConfig,
    block_partition,
)


def block_diff(current: np.ndarray, reference: np.ndarray) -> float:
    """Mean absolute difference over every pixel and channel of two blocks."""
    a = np.asarray(current)
    b = np.asarray(reference)
    if a.shape != b.shape:
        raise ValueError(f"block dimensions differ: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty block")
    total = int(np.abs(a.astype(np.int64) - b.astype(np.int64)).sum())
    return total / a.size


@dataclass(frozen=True)
class BlockState:
    reference: np.ndarray
    counter: int


class BackgroundModel:
    """Recovered background plus per-block stability state.

    The model is single-writer: one :meth:`observe` at a time, frames strictly
    in index order.  Internally the work of a frame can be split across block
    rows (see :meth:`observe_rows`), because blocks never read each other.
    """

    def __init__(self, config: PipelineConfig, width: int, height: int):
        self.config = config
        self.width = width
        self.height = height
        bs = config.block_size
        self.rects: list[BlockRect] = block_partition(width, height, bs)
        self.blocks_x = -(-width // bs)
        self.blocks_y = -(-height // bs)
        # Internal rasters are padded up to whole blocks. Padding is zero in
        # both the frame and the reference, so it never adds to a difference,
        # and the per-block divisor counts real samples only.
        self._padded = (self.blocks_y * bs, self.blocks_x * bs)
        row_h = np.minimum(bs, height - np.arange(self.blocks_y) * bs)
        col_w = np.minimum(bs, width - np.arange(self.blocks_x) * bs)
        self._samples = (row_h[:, None] * col_w[None, :] * 3).astype(np.float64)
        self._sum_dtype = np.uint16 if bs <= 257 else np.uint32

        shape = (*self._padded, 3)
        self._background = np.zeros(shape, np.uint8)
        self._reference = np.zeros(shape, np.uint8)
        self._pad_buf: Optional[np.ndarray] = None
        self.counters = np.zeros((self.blocks_y, self.blocks_x), np.int64)
        self.observed = 0

    @classmethod
    def for_frame(cls, config: PipelineConfig, frame: Frame) -> BackgroundModel:
        return cls(config, frame.width, frame.height)

    @property
    def background(self) -> np.ndarray:
        return self._background[: self.height, : self.width]

    @property
    def reference(self) -> np.ndarray:
        return self._reference[: self.height, : self.width]

    @property
    def states(self) -> list[BlockState]:
        """Per-block state in row-major block order (copies)."""
        out = []
        for i, rect in enumerate(self.rects):
            rows, cols = rect.slices()
            by, bx = divmod(i, self.blocks_x)
            out.append(BlockState(self.reference[rows, cols].copy(), int(self.counters[by, bx])))
        return out

    def _check(self, frame: Frame) -> None:
        if frame.width != self.width or frame.height != self.height:
            raise FrameShapeError(
                f"frame {frame.index} is {frame.width}x{frame.height}, "
                f"model expects {self.width}x{self.height}"
            )
        if frame.index != self.observed:
            raise FrameOrderError(
                f"expected frame index {self.observed}, got {frame.index}"
            )

    def row_bands(self, parts: int) -> list[tuple[int, int]]:
        """Split block rows into at most ``parts`` contiguous ranges."""
        parts = max(1, min(parts, self.blocks_y))
        edges = np.linspace(0, self.blocks_y, parts + 1).round().astype(int)
        return [(int(a), int(b)) for a, b in zip(edges, edges[1:]) if b > a]

    def pixel_rows(self, by0: int, by1: int) -> slice:
        bs = self.config.block_size
        return slice(by0 * bs, min(by1 * bs, self.height))

    def prepare(self, frame: Frame) -> np.ndarray:
        """Frame pixels as a contiguous raster of whole blocks."""
        px = frame.pixels
        if px.shape[:2] == self._padded:
            return np.ascontiguousarray(px)
        if self._pad_buf is None:
            self._pad_buf = np.zeros((*self._padded, 3), np.uint8)
        self._pad_buf[: self.height, : self.width] = px
        return self._pad_buf

    def _blocks(self, arr: np.ndarray, by0: int, by1: int) -> np.ndarray:
        bs = self.config.block_size
        return arr[by0 * bs : by1 * bs].reshape(by1 - by0, bs, self.blocks_x, bs * 3)

    def observe_rows(self, padded: np.ndarray, by0: int, by1: int) -> None:
        """Apply the stability rule to block rows ``[by0, by1)`` only.

        ``padded`` comes from :meth:`prepare`.  Does not advance ``observed``;
        :meth:`observe` does that once every band of the frame is done.
        """
        bs = self.config.block_size
        rows = slice(by0 * bs, by1 * bs)
        cur = padded[rows]
        if self.observed == 0:
            self._background[rows] = cur
            self._reference[rows] = cur
            self.counters[by0:by1] = 0
            return

        ref = self._reference[rows]
        diff = np.maximum(cur, ref)
        diff -= np.minimum(cur, ref)
        nb = by1 - by0
        sums = (
            diff.reshape(nb, bs, -1)
            .sum(axis=1, dtype=self._sum_dtype)
            .reshape(nb, self.blocks_x, bs * 3)
            .sum(axis=2, dtype=np.uint64)
        )
        mean = sums / self._samples[by0:by1]

        reset = mean > self.config.tau
        counters = self.counters[by0:by1]
        counters += 1
        counters[reset] = 0
        _copy_blocks(self._reference, padded, reset, by0, bs)
        _copy_blocks(self._background, padded, counters >= self.config.n_stable, by0, bs)

    def observe(
        self,
        frame: Frame,
        executor: Optional[Executor] = None,
        bands: Optional[Sequence[tuple[int, int]]] = None,
    ) -> BackgroundModel:
        """Feed the next frame; returns ``self`` for chaining."""
        self._check(frame)
        if executor is None or bands is None or len(bands) < 2:
            self.observe_rows(self.prepare(frame), 0, self.blocks_y)
        else:
            padded = self.prepare(frame)
            futures = [executor.submit(self.observe_rows, padded, a, b) for a, b in bands]
            for fut in futures:
                fut.result()
        self.observed += 1
        return self

    def snapshot_background(self) -> Frame:
        """Copy of the current background, tagged with the last observed index."""
        if self.observed == 0:
            raise RuntimeError("no frame observed yet")
        return Frame(self.background.copy(), self.observed - 1)

    def copy(self) -> BackgroundModel:
        twin = BackgroundModel(self.config, self.width, self.height)
        twin._background[...] = self._background
        twin._reference[...] = self._reference
        twin.counters[...] = self.counters
        twin.observed = self.observed
        return twin


def _copy_blocks(dst: np.ndarray, src: np.ndarray, mask: np.ndarray, by0: int, bs: int) -> None:
    """Copy the blocks selected by ``mask`` (block rows offset by ``by0``),
    one slice per horizontal run of selected blocks."""
    if not mask.any():
        return
    if mask.all():
        rows = slice(by0 * bs, (by0 + mask.shape[0]) * bs)
        dst[rows] = src[rows]
        return
    edges = np.diff(mask.astype(np.int8), axis=1, prepend=0, append=0)
    for r in np.flatnonzero(mask.any(axis=1)):
        row_edges = edges[r]
        starts = np.flatnonzero(row_edges == 1)
        stops = np.flatnonzero(row_edges == -1)
        y = (by0 + r) * bs
        for x0, x1 in zip(starts, stops):
            dst[y : y + bs, x0 * bs : x1 * bs] = src[y : y + bs, x0 * bs : x1 * bs]


def observe(model: BackgroundModel, frame: Frame) -> BackgroundModel:
    return model.observe(frame)


def snapshot_background(model: BackgroundModel) -> Frame:
    return model.snapshot_background()
