"""YUV4MPEG2 streams.

Reading accepts ``C444`` and the 4:2:0 family (``C420``, ``C420jpeg``,
``C420paldv``, ``C420mpeg2``; a missing ``C`` tag means ``420jpeg``).  4:2:0
chroma is upsampled by pixel replication, ignoring chroma siting.  Writing
always produces ``C444`` tagged ``XCOLORRANGE=FULL``.

Colour conversion is BT.601 full range with these fixed coefficients, each
result rounded half up and clamped to [0, 255]::

    Y  =       0.299    R + 0.587    G + 0.114    B
    Cb = 128 - 0.168736 R - 0.331264 G + 0.5      B
    Cr = 128 + 0.5      R - 0.418688 G - 0.081312 B

    R = Y                      + 1.402    (Cr - 128)
    G = Y - 0.344136 (Cb - 128) - 0.714136 (Cr - 128)
    B = Y + 1.772    (Cb - 128)

Grey (R = G = B, or Cb = Cr = 128) converts exactly in both directions.
The container layer (:func:`read_y4m_ycbcr` / :func:`write_y4m_ycbcr`) moves
samples without any conversion and is lossless for 4:4:4.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from halfdr.core import Frame

SIGNATURE = b"YUV4MPEG2"
_MAX_HEADER = 4096

_RGB_TO_YCC = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_CHROMA_TAGS = {"444": "444", "420": "420", "420jpeg": "420", "420paldv": "420", "420mpeg2": "420"}


class Y4MError(ValueError):
    pass


class Y4MHeaderError(Y4MError):
    """The stream or frame header is malformed."""


class Y4MTruncatedError(Y4MError):
    """A frame payload ended early."""

    def __init__(self, frame_index: int, got: int, expected: int):
        super().__init__(
            f"frame {frame_index} truncated: {got} of {expected} payload bytes"
        )
        self.frame_index = frame_index


class Y4MColorspaceError(Y4MError):
    """The ``C`` tag names a sample layout this reader does not handle."""


@dataclass(frozen=True)
class VideoHeader:
    width: int
    height: int
    fps: Fraction
    colorspace: str = "444"

    @property
    def fps_num(self) -> int:
        return self.fps.numerator

    @property
    def fps_den(self) -> int:
        return self.fps.denominator


def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    x = rgb.astype(np.float64) @ _RGB_TO_YCC.T
    x[..., 1:] += 128.0
    return np.clip(np.floor(x + 0.5), 0, 255).astype(np.uint8)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    y = ycc[..., 0].astype(np.float64)
    cb = ycc[..., 1].astype(np.float64) - 128.0
    cr = ycc[..., 2].astype(np.float64) - 128.0
    rgb = np.stack(
        [y + 1.402 * cr, y - 0.344136 * cb - 0.714136 * cr, y + 1.772 * cb], axis=-1
    )
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)


def _read_line(stream: BinaryIO, what: str) -> bytes:
    buf = bytearray()
    while True:
        c = stream.read(1)
        if not c:
            if not buf:
                return b""
            raise Y4MHeaderError(f"{what}: unexpected end of stream inside header")
        if c == b"\n":
            return bytes(buf)
        buf += c
        if len(buf) > _MAX_HEADER:
            raise Y4MHeaderError(f"{what}: header line longer than {_MAX_HEADER} bytes")


def parse_header(line: bytes) -> VideoHeader:
    tokens = line.split(b" ")
    if tokens[0] != SIGNATURE:
        raise Y4MHeaderError("missing YUV4MPEG2 signature")
    params: dict[str, str] = {}
    for tok in tokens[1:]:
        if not tok:
            continue
        text = tok.decode("ascii", "replace")
        params[text[0]] = text[1:]
    try:
        width = int(params["W"])
        height = int(params["H"])
    except (KeyError, ValueError):
        raise Y4MHeaderError("header needs integer W and H parameters") from None
    if width < 1 or height < 1:
        raise Y4MHeaderError(f"bad dimensions {width}x{height}")
    try:
        num, den = (int(v) for v in params["F"].split(":"))
        fps = Fraction(num, den)
    except (KeyError, ValueError, ZeroDivisionError):
        raise Y4MHeaderError("header needs a frame rate F<num>:<den>") from None
    if fps <= 0:
        raise Y4MHeaderError(f"bad frame rate {num}:{den}")
    tag = params.get("C", "420jpeg")
    if tag not in _CHROMA_TAGS:
        raise Y4MColorspaceError(f"unsupported colorspace C{tag} (accepted: C444, C420*)")
    return VideoHeader(width, height, fps, _CHROMA_TAGS[tag])


def _plane_sizes(header: VideoHeader) -> tuple[int, int, int]:
    w, h = header.width, header.height
    if header.colorspace == "444":
        return w, h, w * h
    cw, ch = -(-w // 2), -(-h // 2)
    return cw, ch, cw * ch


def _iter_payloads(stream: BinaryIO, header: VideoHeader) -> Iterator[np.ndarray]:
    w, h = header.width, header.height
    cw, ch, csize = _plane_sizes(header)
    size = w * h + 2 * csize
    index = 0
    while True:
        line = _read_line(stream, f"frame {index}")
        if not line:
            return
        if not line.startswith(b"FRAME"):
            raise Y4MHeaderError(f"frame {index}: expected FRAME marker, got {line[:16]!r}")
        data = stream.read(size)
        if len(data) < size:
            raise Y4MTruncatedError(index, len(data), size)
        buf = np.frombuffer(data, np.uint8)
        y = buf[: w * h].reshape(h, w)
        cb = buf[w * h : w * h + csize].reshape(ch, cw)
        cr = buf[w * h + csize :].reshape(ch, cw)
        if header.colorspace == "420":
            cb = cb.repeat(2, axis=0).repeat(2, axis=1)[:h, :w]
            cr = cr.repeat(2, axis=0).repeat(2, axis=1)[:h, :w]
        yield np.stack([y, cb, cr], axis=-1)
        index += 1


def read_y4m_ycbcr(stream: BinaryIO) -> tuple[VideoHeader, Iterator[np.ndarray]]:
    """Parse the stream header and return a lazy iterator of (H, W, 3) YCbCr
    4:4:4 sample arrays, one per frame."""
    line = _read_line(stream, "stream header")
    if not line:
        raise Y4MHeaderError("empty stream")
    header = parse_header(line)
    return header, _iter_payloads(stream, header)


def read_y4m(stream: BinaryIO) -> tuple[VideoHeader, Iterator[Frame]]:
    """Parse a Y4M stream into RGB frames (lazily)."""
    header, payloads = read_y4m_ycbcr(stream)

    def frames() -> Iterator[Frame]:
        for i, ycc in enumerate(payloads):
            yield Frame(ycbcr_to_rgb(ycc), i)

    return header, frames()


def format_header(header: VideoHeader) -> bytes:
    return (
        f"YUV4MPEG2 W{header.width} H{header.height} "
        f"F{header.fps.numerator}:{header.fps.denominator} Ip A1:1 C444 XCOLORRANGE=FULL\n"
    ).encode("ascii")


def write_y4m_ycbcr(header: VideoHeader, planes: Iterable[np.ndarray], sink: BinaryIO) -> int:
    """Write 4:4:4 YCbCr sample arrays verbatim; returns the frame count."""
    sink.write(format_header(header))
    count = 0
    for ycc in planes:
        if ycc.shape != (header.height, header.width, 3):
            raise Y4MError(
                f"frame {count} has shape {ycc.shape}, header says "
                f"{header.width}x{header.height}"
            )
        sink.write(b"FRAME\n")
        sink.write(np.ascontiguousarray(np.moveaxis(ycc.astype(np.uint8), -1, 0)).tobytes())
        count += 1
    return count


def write_y4m(header: VideoHeader, frames: Iterable[Frame], sink: BinaryIO) -> int:
    return write_y4m_ycbcr(header, (rgb_to_ycbcr(f.pixels) for f in frames), sink)


class Y4MWriter:
    """Incremental writer usable as a pipeline sink."""

    stage = "sink"

    def __init__(self, sink: BinaryIO, header: VideoHeader):
        self._sink = sink
        self.header = header
        self.count = 0
        sink.write(format_header(header))

    def __call__(self, frame: Frame) -> None:
        if frame.shape != (self.header.width, self.header.height):
            raise Y4MError(f"frame {frame.index} does not match the stream dimensions")
        self._sink.write(b"FRAME\n")
        planes = np.moveaxis(rgb_to_ycbcr(frame.pixels), -1, 0)
        self._sink.write(np.ascontiguousarray(planes).tobytes())
        self.count += 1

    def close(self) -> None:
        self._sink.flush()
