"""Binary PPM (P6, maxval 255) frames and numbered sequences."""

from __future__ import annotations

import glob
import os
from pathlib import Path
from typing import Iterable, Iterator, Union

import numpy as np

from halfdr.core import Frame

PathLike = Union[str, Path]
DEFAULT_PATTERN = "frame_{:06d}.ppm"


class PPMError(ValueError):
    pass


def _tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """First ``count`` whitespace-separated header tokens (comments skipped)
    and the offset just past the single whitespace byte that ends the header."""
    out: list[bytes] = []
    pos = 0
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise PPMError("truncated header")
        out.append(data[start:pos])
    if pos >= n or not data[pos : pos + 1].isspace():
        raise PPMError("header must end with one whitespace byte")
    return out, pos + 1


def decode_ppm(data: bytes, index: int = 0, name: str = "<bytes>") -> Frame:
    if not data.startswith(b"P6"):
        raise PPMError(f"{name}: not a binary P6 file")
    try:
        toks, offset = _tokens(data, 4)
        width, height, maxval = (int(t) for t in toks[1:])
    except (PPMError, ValueError) as exc:
        raise PPMError(f"{name}: bad header ({exc})") from None
    if maxval != 255:
        raise PPMError(f"{name}: maxval {maxval} unsupported (need 255)")
    size = width * height * 3
    payload = data[offset : offset + size]
    if len(payload) != size:
        raise PPMError(f"{name}: expected {size} pixel bytes, found {len(payload)}")
    pixels = np.frombuffer(payload, np.uint8).reshape(height, width, 3)
    return Frame(pixels, index)


def encode_ppm(frame: Frame) -> bytes:
    head = f"P6\n{frame.width} {frame.height}\n255\n".encode("ascii")
    return head + np.ascontiguousarray(frame.pixels).tobytes()


def read_ppm(path: PathLike, index: int = 0) -> Frame:
    return decode_ppm(Path(path).read_bytes(), index, str(path))


def write_ppm(path: PathLike, frame: Frame) -> None:
    Path(path).write_bytes(encode_ppm(frame))


def sequence_paths(source: PathLike) -> list[Path]:
    """Files of a sequence: every ``*.ppm`` in a directory, or a glob pattern,
    in lexicographic order."""
    src = str(source)
    if os.path.isdir(src):
        paths = sorted(Path(src).glob("*.ppm"))
    else:
        paths = sorted(Path(p) for p in glob.glob(src))
    return paths


def read_ppm_sequence(source: PathLike) -> Iterator[Frame]:
    """Lazily read a sequence; all files must share one size."""
    paths = sequence_paths(source)
    if not paths:
        raise PPMError(f"no .ppm files found at {source}")
    shape = None
    for i, path in enumerate(paths):
        frame = read_ppm(path, i)
        if shape is None:
            shape = frame.shape
        elif frame.shape != shape:
            raise PPMError(
                f"{path}: {frame.width}x{frame.height} differs from sequence size "
                f"{shape[0]}x{shape[1]}"
            )
        yield frame


def _target(pattern: PathLike, index: int) -> Path:
    text = str(pattern)
    if "%" in text:
        return Path(text % index)
    if "{" in text:
        return Path(text.format(index))
    return Path(text) / DEFAULT_PATTERN.format(index)


def write_ppm_sequence(frames: Iterable[Frame], pattern: PathLike) -> int:
    """Write frames named by their index.  ``pattern`` is a directory, a
    ``%``-style pattern (``out/f%05d.ppm``) or a ``{}``-style one."""
    count = 0
    for frame in frames:
        path = _target(pattern, frame.index)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_ppm(path, frame)
        count += 1
    return count


class PPMSequenceWriter:
    stage = "sink"

    def __init__(self, pattern: PathLike):
        self.pattern = pattern
        self.count = 0
        if not any(ch in str(pattern) for ch in "%{"):
            Path(pattern).mkdir(parents=True, exist_ok=True)

    def __call__(self, frame: Frame) -> None:
        self.count += write_ppm_sequence([frame], self.pattern)
