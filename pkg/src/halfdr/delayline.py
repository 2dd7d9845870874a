"""Ring frame buffer that shifts the live stream by ``n_delay`` frames."""

from __future__ import annotations

from typing import Optional

from halfdr.core import Frame, FrameOrderError


class DelayLine:
    """Fixed-capacity ring buffer.

    ``push(f_t)`` returns ``f_{t - capacity}``, or ``None`` during the first
    ``capacity`` pushes.  Capacity 0 passes frames straight through.  Frames are
    stored by reference; they are immutable so nothing is copied.
    """

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError(f"capacity must be non-negative, got {capacity}")
        self.capacity = capacity
        self._slots: list[Optional[Frame]] = [None] * capacity
        self.count = 0

    def push(self, frame: Frame) -> Optional[Frame]:
        if frame.index != self.count:
            raise FrameOrderError(f"expected frame index {self.count}, got {frame.index}")
        self.count += 1
        if self.capacity == 0:
            return frame
        slot = frame.index % self.capacity
        out = self._slots[slot]
        self._slots[slot] = frame
        return out

    def __len__(self) -> int:
        """Number of frames currently held."""
        return min(self.count, self.capacity)

    @property
    def warming_up(self) -> bool:
        return self.count < self.capacity
