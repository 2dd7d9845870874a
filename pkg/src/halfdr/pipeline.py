"""Per-frame orchestration: observe, delay, composite, fan out to sinks."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from halfdr.compositor import blend_into, blend_table
from halfdr.core import Frame, FrameShapeError, PipelineConfig
from halfdr.delayline import DelayLine
from halfdr.stability import BackgroundModel

Sink = Callable[[Frame], object]

STAGES = ("observe", "delay", "composite", "encode")


class PipelineError(RuntimeError):
    """A stage failed; the pipeline is stopped and will not accept more frames."""

    def __init__(self, stage: str, index: Optional[int], cause: BaseException):
        where = f"frame {index}" if index is not None else "startup"
        super().__init__(f"{stage} failed at {where}: {cause}")
        self.stage = stage
        self.index = index
        self.__cause__ = cause


@dataclass
class PipelineStats:
    """Running counters; ``per_stage_ms`` holds mean milliseconds per call."""

    frames_in: int = 0
    frames_out: int = 0
    wall_fps: float = 0.0
    threads_used: int = 1
    warmup_frames: int = 0
    per_stage_ms: dict[str, float] = field(default_factory=lambda: {s: 0.0 for s in STAGES})
    _totals: dict[str, float] = field(default_factory=dict, repr=False)
    _calls: dict[str, int] = field(default_factory=dict, repr=False)

    def record(self, stage: str, seconds: float) -> None:
        self._totals[stage] = self._totals.get(stage, 0.0) + seconds
        self._calls[stage] = self._calls.get(stage, 0) + 1
        self.per_stage_ms[stage] = 1000.0 * self._totals[stage] / self._calls[stage]

    def as_dict(self) -> dict:
        return {
            "frames_in": self.frames_in,
            "frames_out": self.frames_out,
            "wall_fps": self.wall_fps,
            "threads_used": self.threads_used,
            "warmup_frames": self.warmup_frames,
            "per_stage_ms": dict(self.per_stage_ms),
        }


class Pipeline:
    """Holds the background model, the delay line and the worker pool.

    Work inside a frame is split across ``config.threads`` workers by block
    rows; frames themselves are processed strictly one at a time so the
    output does not depend on the thread count.
    """

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.model: Optional[BackgroundModel] = None
        self.line = DelayLine(config.n_delay)
        self.stats = PipelineStats(threads_used=config.threads, warmup_frames=config.n_delay)
        self._table = blend_table(float(config.alpha))
        self._pool: Optional[ThreadPoolExecutor] = None
        self._bands: list[tuple[int, int]] = []
        self._pixel_bands: list[slice] = []
        self._failed: Optional[PipelineError] = None
        self._t0: Optional[float] = None

    def _setup(self, frame: Frame) -> None:
        self.model = BackgroundModel.for_frame(self.config, frame)
        self._bands = self.model.row_bands(self.config.threads)
        self._pixel_bands = [self.model.pixel_rows(a, b) for a, b in self._bands]
        if len(self._bands) > 1:
            self._pool = ThreadPoolExecutor(self.config.threads, thread_name_prefix="halfdr")
        self.stats.threads_used = len(self._bands)

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self) -> Pipeline:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    @property
    def background(self) -> Optional[np.ndarray]:
        """Live background raster (read it only between frames)."""
        return None if self.model is None else self.model.background

    def _composite(self, delayed: Frame) -> Frame:
        assert self.model is not None
        out = np.empty_like(delayed.pixels)
        bg = self.model.background
        if self._pool is None:
            blend_into(out, delayed.pixels, bg, self._table)
        else:
            futures = [
                self._pool.submit(blend_into, out[rows], delayed.pixels[rows], bg[rows], self._table)
                for rows in self._pixel_bands
            ]
            for fut in futures:
                fut.result()
        return Frame(out, delayed.index)

    def process_frame(self, frame: Frame) -> Optional[Frame]:
        """Observe the undelayed frame, push it through the delay line and, once
        warm, blend the frame that falls out over the post-observe background."""
        if self._failed is not None:
            raise PipelineError("pipeline", frame.index, self._failed)
        if self._t0 is None:
            self._t0 = time.perf_counter()
        stage = "observe"
        try:
            t = time.perf_counter()
            if self.model is None:
                self._setup(frame)
            assert self.model is not None
            self.model.observe(frame, self._pool, self._bands)
            t1 = time.perf_counter()
            self.stats.record("observe", t1 - t)

            stage = "delay"
            delayed = self.line.push(frame)
            t2 = time.perf_counter()
            self.stats.record("delay", t2 - t1)

            out = None
            if delayed is not None:
                stage = "composite"
                out = self._composite(delayed)
                self.stats.record("composite", time.perf_counter() - t2)
        except Exception as exc:
            self._failed = PipelineError(stage, frame.index, exc)
            raise self._failed from exc

        self.stats.frames_in += 1
        if out is not None:
            self.stats.frames_out += 1
        elapsed = time.perf_counter() - self._t0
        if elapsed > 0:
            self.stats.wall_fps = self.stats.frames_in / elapsed
        return out

    def run(self, source: Iterable[Frame], sinks: Sequence[Sink] = ()) -> PipelineStats:
        """Drive the whole source through the pipeline, fanning outputs to sinks.

        Fail-stop: the first source, stage or sink error is raised as a
        :class:`PipelineError` naming the stage and frame index.
        """
        self._t0 = time.perf_counter()
        it = iter(source)
        index: Optional[int] = None
        try:
            while True:
                try:
                    frame = next(it)
                except StopIteration:
                    break
                except Exception as exc:
                    nxt = 0 if index is None else index + 1
                    raise PipelineError("source", nxt, exc) from exc
                index = frame.index
                if self.model is not None and frame.shape != (self.model.width, self.model.height):
                    exc = FrameShapeError(
                        f"source changed dimensions to {frame.width}x{frame.height}"
                    )
                    raise PipelineError("source", index, exc) from exc
                out = self.process_frame(frame)
                if out is None:
                    continue
                for sink in sinks:
                    name = getattr(sink, "stage", "sink")
                    t = time.perf_counter()
                    try:
                        sink(out)
                    except Exception as exc:
                        self._failed = PipelineError(name, out.index, exc)
                        raise self._failed from exc
                    self.stats.record(name, time.perf_counter() - t)
        finally:
            self.close()
            elapsed = time.perf_counter() - self._t0
            if elapsed > 0:
                self.stats.wall_fps = self.stats.frames_in / elapsed
        return self.stats


def process_frame(state: Pipeline, frame: Frame) -> Optional[Frame]:
    return state.process_frame(frame)


def run(
    config: PipelineConfig, source: Iterable[Frame], sinks: Sequence[Sink] = ()
) -> PipelineStats:
    return Pipeline(config).run(source, sinks)


def trace(config: PipelineConfig, frames: Iterable[Frame]) -> tuple[list[Frame], list[Frame]]:
    """Background after every input frame and every output frame.

    Same shape of result as the naive reference, so the two can be compared
    frame by frame.
    """
    backgrounds: list[Frame] = []
    outputs: list[Frame] = []
    with Pipeline(config) as pipe:
        for frame in frames:
            out = pipe.process_frame(frame)
            assert pipe.model is not None
            backgrounds.append(pipe.model.snapshot_background())
            if out is not None:
                outputs.append(out)
    return backgrounds, outputs
