"""Throughput benchmark on synthetic HD input.

    python -m halfdr.bench --threads 1 2 --frames 300
"""

from __future__ import annotations

import argparse
import itertools
from typing import Iterator, Optional, Sequence

from halfdr.core import Frame, PipelineConfig
from halfdr.pipeline import Pipeline, PipelineStats, Sink
from halfdr.synth.scene import MoveEvent, SceneSpec, render_scene


def hd_scene(width: int = 1280, height: int = 720, frame_count: int = 120) -> SceneSpec:
    """A board filling the frame with a hand making a move every 40 frames."""
    cell = 40 if width % 40 == 0 and height % 40 == 0 else 16
    cols, rows = width // cell, height // cell
    pieces = {(c, r): "KGSNLBRP"[(c + r) % 8] for c in range(1, cols - 1, 3) for r in range(1, rows - 1, 3)}
    moves = []
    occupied = dict(pieces)
    free = [(c, r) for r in range(rows) for c in range(cols) if (c, r) not in pieces]
    for k, t in enumerate(range(5, frame_count - 20, 40)):
        pick = sorted(occupied)[k % len(occupied)]
        place = free[(7 * k + 3) % len(free)]
        if place in occupied:
            continue
        moves.append(MoveEvent(pick, place, t, t + 15))
        occupied[place] = occupied.pop(pick)
        free.remove(place)
        free.append(pick)
    return SceneSpec(
        cols=cols, rows=rows, cell=cell, pieces=pieces, hand_size=(3 * cell, 3 * cell),
        hand_snap="pixel", moves=tuple(moves), noise_amplitude=2, seed=5,
        fps=10, frame_count=frame_count,
    )


def cycled_source(frames: Sequence[Frame], count: int) -> Iterator[Frame]:
    """``count`` frames drawn cyclically from pre-rendered ones, re-indexed."""
    for i, f in zip(range(count), itertools.cycle(frames)):
        yield f.with_index(i)


def benchmark(
    threads: int,
    frames: int = 300,
    width: int = 1280,
    height: int = 720,
    d_seconds: float = 3.0,
    block_size: int = 16,
    sinks: Sequence[Sink] = (),
    rendered: Optional[Sequence[Frame]] = None,
) -> PipelineStats:
    """Run the full pipeline over pre-rendered synthetic frames; rendering is
    excluded from the measurement."""
    if rendered is None:
        spec = hd_scene(width, height)
        rendered = [render_scene(spec, t) for t in range(spec.frame_count)]
    config = PipelineConfig(fps=10, d_seconds=d_seconds, block_size=block_size, threads=threads)
    return Pipeline(config).run(cycled_source(rendered, frames), sinks)


def main(argv: Optional[Sequence[str]] = None) -> int:
    p = argparse.ArgumentParser(prog="python -m halfdr.bench", description=__doc__)
    p.add_argument("--threads", type=int, nargs="+", default=[1, 2])
    p.add_argument("--frames", type=int, default=300)
    p.add_argument("--width", type=int, default=1280)
    p.add_argument("--height", type=int, default=720)
    args = p.parse_args(argv)
    spec = hd_scene(args.width, args.height)
    rendered = [render_scene(spec, t) for t in range(spec.frame_count)]
    for n in args.threads:
        stats = benchmark(n, args.frames, args.width, args.height, rendered=rendered)
        stages = ", ".join(f"{k} {v:.2f} ms" for k, v in stats.per_stage_ms.items())
        print(f"threads={n}: {stats.wall_fps:.1f} fps over {stats.frames_in} frames ({stages})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
