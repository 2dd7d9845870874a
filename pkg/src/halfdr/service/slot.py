"""Latest-frame-wins slot shared by one publisher and many stream readers."""

from __future__ import annotations

import asyncio
import threading
import time
from dataclasses import dataclass
from typing import Optional

from halfdr.core import Frame
from halfdr.videoio.jpeg import DEFAULT_QUALITY, encode_jpeg


@dataclass(frozen=True)
class EncodedFrame:
    jpeg: bytes
    index: int
    timestamp: float
    generation: int


class FrameSlot:
    """Holds only the newest encoded frame.

    The publisher never waits on readers: a slow reader simply skips the
    generations it was too slow for.  Entries are replaced as one immutable
    object, so a reader can never see bytes and index from different frames.
    """

    stage = "encode"

    def __init__(self, quality: int = DEFAULT_QUALITY):
        self.quality = quality
        self._lock = threading.Condition()
        self._latest: Optional[EncodedFrame] = None
        self._closed = False
        self._waiters: set[tuple[asyncio.AbstractEventLoop, asyncio.Event]] = set()

    @property
    def generation(self) -> int:
        latest = self._latest
        return 0 if latest is None else latest.generation

    @property
    def closed(self) -> bool:
        return self._closed

    def latest(self) -> Optional[EncodedFrame]:
        return self._latest

    def publish(self, frame: Frame) -> EncodedFrame:
        data = encode_jpeg(frame, self.quality)
        return self.publish_encoded(data, frame.index)

    __call__ = publish

    def publish_encoded(self, jpeg: bytes, index: int) -> EncodedFrame:
        with self._lock:
            prev = self._latest
            if prev is not None and index <= prev.index:
                raise ValueError(f"frame {index} published after frame {prev.index}")
            entry = EncodedFrame(jpeg, index, time.time(), self.generation + 1)
            self._latest = entry
            self._lock.notify_all()
            waiters = list(self._waiters)
        self._wake(waiters)
        return entry

    def close(self) -> None:
        """End of stream: readers drain and stop."""
        with self._lock:
            self._closed = True
            self._lock.notify_all()
            waiters = list(self._waiters)
        self._wake(waiters)

    @staticmethod
    def _wake(waiters) -> None:
        for loop, event in waiters:
            try:
                loop.call_soon_threadsafe(event.set)
            except RuntimeError:
                pass  # loop already closed

    def wait_newer(self, after: int, timeout: Optional[float] = None) -> Optional[EncodedFrame]:
        """Block until a frame newer than generation ``after`` exists."""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._lock:
            while True:
                latest = self._latest
                if latest is not None and latest.generation > after:
                    return latest
                if self._closed:
                    return None
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    return None
                self._lock.wait(remaining)

    async def next_after(self, after: int, timeout: Optional[float] = None) -> Optional[EncodedFrame]:
        """Async flavour of :meth:`wait_newer` that does not tie up a thread."""
        loop = asyncio.get_running_loop()
        event = asyncio.Event()
        key = (loop, event)
        deadline = None if timeout is None else loop.time() + timeout
        with self._lock:
            self._waiters.add(key)
        try:
            while True:
                latest = self._latest
                if latest is not None and latest.generation > after:
                    return latest
                if self._closed:
                    return None
                event.clear()
                remaining = None if deadline is None else deadline - loop.time()
                if remaining is not None and remaining <= 0:
                    return None
                # re-check after clearing: a publish may have landed in between
                latest = self._latest
                if (latest is not None and latest.generation > after) or self._closed:
                    continue
                try:
                    await asyncio.wait_for(event.wait(), remaining)
                except asyncio.TimeoutError:
                    return None
        finally:
            with self._lock:
                self._waiters.discard(key)
