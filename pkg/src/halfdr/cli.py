"""Command-line front end.

    halfdr --input in.y4m --output out/ --d 3
    halfdr --input - --serve 0.0.0.0:8080
    halfdr --input synth:scene.scene --output out.y4m --stats
    halfdr --verify onemove.scene

Inputs: a Y4M file, ``-`` for Y4M on standard input, a directory of P6 PPM
files (needs ``--fps``), or ``synth:<scene file>``.  Outputs: a ``.y4m``
file or a PPM directory; ``--serve host:port`` publishes Motion JPEG.

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Optional, Sequence

from halfdr.core import Frame, PipelineConfig, Rate, default_threads
from halfdr.pipeline import Pipeline, PipelineError, trace
from halfdr.synth.oracle import reference_pipeline
from halfdr.synth.scene import SceneError, SceneSpec, calibrate, frames as scene_frames, load_scene
from halfdr.synth.verify import verify_conditions
from halfdr.videoio.jpeg import DEFAULT_QUALITY
from halfdr.videoio.ppm import PPMSequenceWriter, read_ppm_sequence
from halfdr.videoio.y4m import VideoHeader, Y4MError, Y4MWriter, read_y4m

log = logging.getLogger("halfdr")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunPlan:
    input: Optional[str]
    output: Optional[str]
    serve: Optional[str]
    fps: Optional[Rate]
    d_seconds: float
    block_size: int
    tau: float
    alpha: float
    threads: int
    quality: int
    stats: bool
    verify: Optional[str]

    def config(self, fps: Rate) -> PipelineConfig:
        return PipelineConfig(
            fps=fps,
            d_seconds=self.d_seconds,
            block_size=self.block_size,
            tau=self.tau,
            alpha=self.alpha,
            threads=self.threads,
        )


def _rate(text: str) -> Rate:
    try:
        value = Fraction(text.replace(":", "/"))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"invalid rate {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("fps must be positive")
    return value


def _bounded(kind, lo, hi, name):
    def convert(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {name} {text!r}") from None
        if (lo is not None and value < lo) or (hi is not None and value > hi):
            rng = f"[{lo}, {hi}]" if hi is not None else f">= {lo}"
            raise argparse.ArgumentTypeError(f"{name} must be {rng}, got {text}")
        return value

    return convert


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="halfdr",
        description="Half-diminished reality: erase moving hands into a background "
        "model, delay the live stream by the same time and blend the two.",
        epilog="Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 verification failure.",
        allow_abbrev=False,
    )
    p.add_argument("--input", metavar="SRC",
                   help="Y4M file, '-' (Y4M on stdin), PPM directory or synth:<scene file>")
    p.add_argument("--output", metavar="DST", help="output .y4m file or PPM directory")
    p.add_argument("--serve", metavar="HOST:PORT",
                   help="serve Motion JPEG at /stream, /snapshot and /stats")
    p.add_argument("--fps", type=_rate,
                   help="frame rate; required for PPM input, must match a Y4M header")
    p.add_argument("--d", dest="d_seconds", type=_bounded(float, 0.0, None, "d"), default=3.0,
                   metavar="SECONDS", help="background estimation time (default 3)")
    p.add_argument("--block-size", type=_bounded(int, 1, None, "block size"), default=16,
                   help="stability block edge in pixels (default 16)")
    p.add_argument("--tau", type=_bounded(float, 0.0, 255.0, "tau"), default=8.0,
                   help="stability threshold, mean absolute difference per channel (default 8)")
    p.add_argument("--alpha", type=_bounded(float, 0.0, 1.0, "alpha"), default=0.5,
                   help="weight of the delayed live layer in the blend (default 0.5)")
    p.add_argument("--threads", type=_bounded(int, 1, None, "threads"), default=default_threads(),
                   help="worker threads inside a frame (default: available cores)")
    p.add_argument("--quality", type=_bounded(int, 1, 100, "quality"), default=DEFAULT_QUALITY,
                   help=f"JPEG quality for --serve (default {DEFAULT_QUALITY})")
    p.add_argument("--stats", action="store_true", help="print run statistics to stderr")
    p.add_argument("--verify", metavar="SCENE",
                   help="run a scene file through the optimised and the reference pipeline "
                   "and report conditions A-C")
    return p


def parse_args(argv: Optional[Sequence[str]] = None) -> RunPlan:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.verify is None:
        if ns.input is None:
            parser.error("--input is required (or use --verify SCENE)")
        if ns.output is None and ns.serve is None:
            parser.error("nothing to do: give --output and/or --serve")
    if ns.serve is not None:
        from halfdr.service.app import parse_address

        try:
            parse_address(ns.serve)
        except ValueError as exc:
            parser.error(str(exc))
    return RunPlan(
        input=ns.input,
        output=ns.output,
        serve=ns.serve,
        fps=ns.fps,
        d_seconds=ns.d_seconds,
        block_size=ns.block_size,
        tau=ns.tau,
        alpha=ns.alpha,
        threads=ns.threads,
        quality=ns.quality,
        stats=ns.stats,
        verify=ns.verify,
    )


# ---------------------------------------------------------------- sources/sinks


@dataclass
class Source:
    frames: Iterable[Frame]
    fps: Rate
    header: Optional[VideoHeader] = None
    scene: Optional[SceneSpec] = None


def open_source(plan: RunPlan, stdin: BinaryIO) -> Source:
    spec = plan.input
    assert spec is not None
    if spec.startswith("synth:"):
        scene = load_scene(spec[len("synth:"):])
        if plan.fps is not None and Fraction(plan.fps) != Fraction(scene.fps):
            raise UsageError(f"--fps {plan.fps} contradicts the scene's fps {scene.fps}")
        return Source(scene_frames(scene), scene.fps, scene=scene)
    if spec == "-":
        header, frames = read_y4m(stdin)
        return _check_header(plan, header, frames)
    path = Path(spec)
    if path.is_dir():
        if plan.fps is None:
            raise UsageError("--fps is required for PPM sequence input")
        return Source(read_ppm_sequence(path), plan.fps)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    stream = open(path, "rb")
    header, frames = read_y4m(stream)
    return _check_header(plan, header, frames)


def _check_header(plan: RunPlan, header: VideoHeader, frames: Iterator[Frame]) -> Source:
    if plan.fps is not None and Fraction(plan.fps) != header.fps:
        raise UsageError(f"--fps {plan.fps} contradicts the stream header rate {header.fps}")
    return Source(frames, header.fps, header=header)


class LazyY4MSink:
    """Writes the Y4M header once the first output frame fixes the size."""

    stage = "sink"

    def __init__(self, path: Path, fps: Rate):
        self.path = path
        self.fps = Fraction(fps)
        self._stream: Optional[BinaryIO] = None
        self._writer: Optional[Y4MWriter] = None

    def __call__(self, frame: Frame) -> None:
        if self._writer is None:
            self._stream = open(self.path, "wb")
            header = VideoHeader(frame.width, frame.height, self.fps)
            self._writer = Y4MWriter(self._stream, header)
        self._writer(frame)

    def close(self) -> None:
        if self._stream is None:
            # no output frames: still leave a valid (empty) stream behind
            return
        self._stream.close()


def open_sink(output: str, fps: Rate):
    path = Path(output)
    if path.suffix.lower() == ".y4m":
        return LazyY4MSink(path, fps)
    return PPMSequenceWriter(path)


# ---------------------------------------------------------------- commands


def run_verify(plan: RunPlan, out) -> int:
    assert plan.verify is not None
    scene = load_scene(plan.verify)
    fps = plan.fps if plan.fps is not None else scene.fps
    config = plan.config(fps)
    try:
        calibrate(scene, config.tau)
    except SceneError as exc:
        print(f"warning: {exc}", file=out)
    frames = list(scene_frames(scene))
    reference = reference_pipeline(config, frames)
    optimised = trace(config, frames)
    same = len(reference[0]) == len(optimised[0]) and len(reference[1]) == len(optimised[1])
    same = same and all(a == b for a, b in zip(reference[0], optimised[0]))
    same = same and all(a == b for a, b in zip(reference[1], optimised[1]))
    report = verify_conditions(scene, config, optimised)
    print(f"scene {plan.verify}: {scene.width}x{scene.height}, {scene.frame_count} frames, "
          f"n_stable = n_delay = {config.n_stable}", file=out)
    print(report.to_text(), file=out)
    print(f"{'PASS' if same else 'FAIL'}  oracle-equivalence     "
          f"{len(optimised[1])} output frames compared bit for bit", file=out)
    return EXIT_OK if (same and report.passed) else EXIT_VERIFY


def run_plan(plan: RunPlan, stdin: BinaryIO, err) -> int:
    source = open_source(plan, stdin)
    config = plan.config(source.fps)
    if source.scene is not None:
        try:
            calibrate(source.scene, config.tau)
        except SceneError as exc:
            print(f"warning: {exc}", file=err)
    print(
        f"warm-up: the first {config.n_delay} input frames produce no output "
        f"(d = {config.d_seconds} s at {float(source.fps):g} fps)",
        file=err,
    )
    pipeline = Pipeline(config)
    sinks = []
    file_sink = None
    if plan.output is not None:
        file_sink = open_sink(plan.output, source.fps)
        sinks.append(file_sink)
    server = slot = None
    if plan.serve is not None:
        from halfdr.service.app import MJPEGServer, create_app, parse_address
        from halfdr.service.slot import FrameSlot

        slot = FrameSlot(plan.quality)
        host, port = parse_address(plan.serve)
        server = MJPEGServer(create_app(slot, lambda: pipeline.stats), host, port).start()
        print(f"serving Motion JPEG at {server.url}/stream", file=err)
        sinks.append(slot)
    try:
        stats = pipeline.run(source.frames, sinks)
    finally:
        if file_sink is not None and hasattr(file_sink, "close"):
            file_sink.close()
        if slot is not None:
            slot.close()
        if server is not None:
            server.stop()
    if plan.stats:
        from halfdr.service.schemas import StatsModel

        print(StatsModel.from_stats(stats).to_text(), end="", file=err)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        plan = parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    err = sys.stderr
    try:
        if plan.verify is not None:
            return run_verify(plan, sys.stdout)
        return run_plan(plan, sys.stdin.buffer, err)
    except UsageError as exc:
        print(f"halfdr: error: {exc}", file=err)
        return EXIT_USAGE
    except (OSError, PipelineError, Y4MError, SceneError, ValueError) as exc:
        print(f"halfdr: {exc}", file=err)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
