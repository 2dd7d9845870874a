"""Shared domain types: frames, block geometry and pipeline configuration."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

import numpy as np

Rate = Union[int, float, Fraction]


class FrameOrderError(ValueError):
    """A frame arrived out of sequence (indices must run 0, 1, 2, ...)."""


class FrameShapeError(ValueError):
    """A frame's dimensions do not match the stream it belongs to."""


@dataclass(frozen=True)
class Frame:
    """One RGB 8-bit raster with its 0-based sequence number.

    ``pixels`` is a ``(height, width, 3)`` uint8 array.  The stored array is a
    read-only view, so a Frame can be shared between threads freely; callers
    that keep the original buffer must not write to it afterwards.
    """

    pixels: np.ndarray
    index: int = 0

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"frame pixels must have shape (H, W, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("frame dimensions must be positive")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("channel values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        if self.index < 0:
            raise ValueError(f"frame index must be non-negative, got {self.index}")
        view = arr.view()
        view.flags.writeable = False
        object.__setattr__(self, "pixels", view)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        """(width, height)"""
        return self.width, self.height

    def with_index(self, index: int) -> Frame:
        return Frame(self.pixels, index)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return self.index == other.index and np.array_equal(self.pixels, other.pixels)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Frame(index={self.index}, {self.width}x{self.height})"


@dataclass(frozen=True)
class BlockRect:
    x: int
    y: int
    w: int
    h: int

    def slices(self) -> tuple[slice, slice]:
        """Row and column slices selecting this block from an (H, W, ...) array."""
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)

    def contains(self, px: int, py: int) -> bool:
        return self.x <= px < self.x + self.w and self.y <= py < self.y + self.h


def _edges(extent: int, block_size: int) -> list[int]:
    return list(range(0, extent, block_size)) + [extent]


def block_partition(width: int, height: int, block_size: int) -> list[BlockRect]:
    """Tile a width x height frame into row-major blocks.

    Interior blocks are ``block_size`` square; the right column and bottom row
    keep whatever remainder is left (no padding).
    """
    if width < 1 or height < 1 or block_size < 1:
        raise ValueError("width, height and block_size must all be >= 1")
    xs = _edges(width, block_size)
    ys = _edges(height, block_size)
    return [
        BlockRect(x0, y0, x1 - x0, y1 - y0)
        for y0, y1 in zip(ys, ys[1:])
        for x0, x1 in zip(xs, xs[1:])
    ]


def _exact(value: Rate) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        # decimal semantics: 0.1 s at 30 fps is 3 frames, not 4
        return Fraction(repr(value))
    return Fraction(value)


def derive_counts(fps: Rate, d_seconds: Rate) -> tuple[int, int]:
    """Convert the background estimation time into (n_stable, n_delay) frames."""
    fps_q = _exact(fps)
    d_q = _exact(d_seconds)
    if fps_q <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    if d_q < 0:
        raise ValueError(f"d_seconds must be non-negative, got {d_seconds}")
    n = math.ceil(fps_q * d_q)
    return n, n


@dataclass(frozen=True)
class PipelineConfig:
    """All engine tunables.

    ``n_stable`` and ``n_delay`` are derived and always equal: the delay line
    holds exactly as many frames as a block needs to be declared stable, which
    is what keeps the delayed hand and the committed background in step.
    """

    fps: Rate = 10
    d_seconds: Rate = 3.0
    block_size: int = 16
    tau: float = 8.0
    alpha: float = 0.5
    threads: int = 1
    n_stable: int = field(init=False)
    n_delay: int = field(init=False)

    def __post_init__(self) -> None:
        if not isinstance(self.block_size, (int, np.integer)) or self.block_size < 1:
            raise ValueError(f"block_size must be a positive integer, got {self.block_size}")
        if not 0.0 <= self.tau <= 255.0:
            raise ValueError(f"tau must lie in [0, 255], got {self.tau}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not isinstance(self.threads, (int, np.integer)) or self.threads < 1:
            raise ValueError(f"threads must be a positive integer, got {self.threads}")
        n_stable, n_delay = derive_counts(self.fps, self.d_seconds)
        object.__setattr__(self, "n_stable", n_stable)
        object.__setattr__(self, "n_delay", n_delay)

    def replace(self, **changes) -> PipelineConfig:
        fields = dict(
            fps=self.fps,
            d_seconds=self.d_seconds,
            block_size=self.block_size,
            tau=self.tau,
            alpha=self.alpha,
            threads=self.threads,
        )
        fields.update(changes)
        return PipelineConfig(**fields)


def default_threads() -> int:
    return max(1, os.cpu_count() or 1)
