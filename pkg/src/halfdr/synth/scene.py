"""Deterministic board-game manipulation scenes.

A scene is a board of square cells with lettered pieces, and a solid hand
rectangle that carries pieces from one cell to another.  Frames are a pure
function of (scene, frame index).

Scene files are plain ``key = value`` text, ``#`` starts a comment::

    board = 8x6                 # columns x rows
    cell = 32                   # cell edge, pixels
    hand = 96x96                # hand rectangle, pixels
    hand_color = 205,150,125
    hand_snap = cell            # cell: hand jumps cell to cell; pixel: smooth
    noise = 0                   # uniform jitter amplitude per channel
    seed = 7
    fps = 10
    frames = 90
    piece = 2,3 K               # column,row glyph (repeatable)
    move = 2,3 -> 3,3 @ 20..35  # pick -> place @ t_start..t_end (repeatable)

Optional colour keys: ``board_color``, ``line_color``, ``piece_color``,
``glyph_color``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Optional, Union

import numpy as np

from halfdr.core import Frame, Rate

Cell = tuple[int, int]
Color = tuple[int, int, int]

_FONT = {
    "K": ("10010", "10100", "11000", "10100", "10010"),
    "G": ("01110", "10000", "10110", "10010", "01110"),
    "S": ("01111", "10000", "01110", "00001", "11110"),
    "N": ("10001", "11001", "10101", "10011", "10001"),
    "L": ("10000", "10000", "10000", "10000", "11111"),
    "B": ("11110", "10001", "11110", "10001", "11110"),
    "R": ("11110", "10001", "11110", "10100", "10010"),
    "P": ("11110", "10001", "11110", "10000", "10000"),
}


def glyph_bitmap(char: str) -> np.ndarray:
    """5x5 boolean bitmap for a piece letter."""
    rows = _FONT.get(char.upper())
    if rows is None:
        # unknown letters get a stable pseudo-random pattern with a solid frame
        bits = np.random.default_rng(ord(char[0])).random((5, 5)) < 0.5
        bits[0, :] = bits[-1, :] = bits[:, 0] = bits[:, -1] = True
        return bits
    return np.array([[c == "1" for c in r] for r in rows])


class SceneError(ValueError):
    pass


@dataclass(frozen=True)
class MoveEvent:
    pick_cell: Cell
    place_cell: Cell
    t_start: int
    t_end: int


@dataclass(frozen=True)
class SceneSpec:
    cols: int = 8
    rows: int = 6
    cell: int = 32
    pieces: dict[Cell, str] = field(default_factory=dict)
    hand_size: tuple[int, int] = (96, 96)
    hand_color: Color = (205, 150, 125)
    hand_snap: str = "cell"
    moves: tuple[MoveEvent, ...] = ()
    noise_amplitude: int = 0
    seed: int = 0
    fps: Rate = 10
    frame_count: int = 90
    board_color: Color = (225, 185, 105)
    line_color: Color = (120, 80, 40)
    piece_color: Color = (245, 225, 180)
    glyph_color: Color = (20, 20, 20)

    def __post_init__(self) -> None:
        if self.cols < 1 or self.rows < 1 or self.cell < 4:
            raise SceneError("board needs at least one cell of at least 4 pixels")
        if self.hand_snap not in ("cell", "pixel"):
            raise SceneError(f"hand_snap must be 'cell' or 'pixel', got {self.hand_snap!r}")
        if self.noise_amplitude < 0:
            raise SceneError("noise amplitude must be >= 0")
        if self.frame_count < 1:
            raise SceneError("frame_count must be >= 1")
        for c in self.pieces:
            self._check_cell(c)
        occupied = dict(self.pieces)
        last_end = -1
        for m in sorted(self.moves, key=lambda m: m.t_start):
            self._check_cell(m.pick_cell)
            self._check_cell(m.place_cell)
            if not 0 <= m.t_start < m.t_end < self.frame_count:
                raise SceneError(f"move {m}: need 0 <= t_start < t_end < frame_count")
            if m.t_start <= last_end:
                raise SceneError(f"move {m} overlaps the previous move (one hand only)")
            if m.pick_cell not in occupied:
                raise SceneError(f"move {m}: no piece at {m.pick_cell}")
            if m.place_cell in occupied and m.place_cell != m.pick_cell:
                raise SceneError(f"move {m}: {m.place_cell} already occupied")
            occupied[m.place_cell] = occupied.pop(m.pick_cell)
            last_end = m.t_end
        for color in self.palette:
            if _near(color, self.hand_color, 2 * self.noise_amplitude):
                raise SceneError(f"hand colour too close to board colour {color}")

    def _check_cell(self, c: Cell) -> None:
        if not (0 <= c[0] < self.cols and 0 <= c[1] < self.rows):
            raise SceneError(f"cell {c} is off the {self.cols}x{self.rows} board")

    @property
    def width(self) -> int:
        return self.cols * self.cell

    @property
    def height(self) -> int:
        return self.rows * self.cell

    @property
    def palette(self) -> tuple[Color, ...]:
        return (self.board_color, self.line_color, self.piece_color, self.glyph_color)

    def cell_rect(self, c: Cell) -> tuple[slice, slice]:
        x, y = c[0] * self.cell, c[1] * self.cell
        return slice(y, y + self.cell), slice(x, x + self.cell)

    def with_changes(self, **changes) -> SceneSpec:
        return replace(self, **changes)


def _near(a: Color, b: Color, tol: int) -> bool:
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def min_hand_contrast(spec: SceneSpec) -> float:
    """Smallest mean per-channel difference between the hand and any board colour."""
    return min(
        sum(abs(h - c) for h, c in zip(spec.hand_color, color)) / 3 for color in spec.palette
    )


def calibrate(spec: SceneSpec, tau: float) -> None:
    """Check the noise level against a stability threshold.

    Two noisy renders of the same content differ by at most ``2 * noise`` per
    sample, so ``noise <= tau / 2`` means noise alone can never reset a block.
    The hand must still stand out from every board colour by more than
    ``tau`` after noise eats up to ``2 * noise`` of the contrast.
    """
    if 2 * spec.noise_amplitude > tau:
        raise SceneError(
            f"noise amplitude {spec.noise_amplitude} exceeds tau/2 = {tau / 2:g}; "
            "noise alone could reset stability counters"
        )
    if min_hand_contrast(spec) - 2 * spec.noise_amplitude <= tau:
        raise SceneError("hand contrast against the board is too small for this tau")


# ---------------------------------------------------------------- rendering


def _piece_layout(spec: SceneSpec, t: int, settled_only: bool) -> tuple[dict[Cell, str], Optional[tuple[MoveEvent, str]]]:
    """Pieces resting on the board at frame ``t`` and the move in progress.

    With ``settled_only`` an in-flight piece stays on its pick cell until the
    move ends, which is what the background is supposed to show.
    """
    board = dict(spec.pieces)
    active = None
    for m in sorted(spec.moves, key=lambda m: m.t_start):
        if t >= m.t_end:
            board[m.place_cell] = board.pop(m.pick_cell)
        elif t >= m.t_start:
            if not settled_only:
                active = (m, board.pop(m.pick_cell))
            break
        else:
            break
    return board, active


def _draw_board(spec: SceneSpec) -> np.ndarray:
    img = np.empty((spec.height, spec.width, 3), np.uint8)
    img[...] = spec.board_color
    img[:: spec.cell, :] = spec.line_color
    img[:, :: spec.cell] = spec.line_color
    return img


def _tile_geometry(spec: SceneSpec) -> tuple[int, int, int]:
    margin = max(1, spec.cell // 8)
    inner = spec.cell - 2 * margin
    scale = max(1, inner // 7)
    return margin, inner, scale


def _draw_piece(spec: SceneSpec, img: np.ndarray, x0: int, y0: int, char: str,
                glyph_mask: Optional[np.ndarray] = None) -> None:
    """Draw a piece tile whose cell has its top-left corner at (x0, y0); clipped."""
    margin, inner, scale = _tile_geometry(spec)
    tile = np.empty((inner, inner, 3), np.uint8)
    tile[...] = spec.piece_color
    bits = np.kron(glyph_bitmap(char), np.ones((scale, scale), bool))
    off = (inner - bits.shape[0]) // 2
    sub = np.zeros((inner, inner), bool)
    sub[off : off + bits.shape[0], off : off + bits.shape[1]] = bits
    tile[sub] = spec.glyph_color
    _paste(img, tile, x0 + margin, y0 + margin, glyph_mask, sub)


def _paste(img: np.ndarray, tile: np.ndarray, x: int, y: int,
           mask_out: Optional[np.ndarray] = None, tile_mask: Optional[np.ndarray] = None) -> None:
    h, w = tile.shape[:2]
    H, W = img.shape[:2]
    ax0, ay0 = max(x, 0), max(y, 0)
    ax1, ay1 = min(x + w, W), min(y + h, H)
    if ax0 >= ax1 or ay0 >= ay1:
        return
    src = (slice(ay0 - y, ay1 - y), slice(ax0 - x, ax1 - x))
    img[ay0:ay1, ax0:ax1] = tile[src]
    if mask_out is not None and tile_mask is not None:
        mask_out[ay0:ay1, ax0:ax1] |= tile_mask[src]


def hand_box(spec: SceneSpec, t: int) -> Optional[tuple[int, int, int, int]]:
    """Hand rectangle ``(x, y, w, h)`` at frame ``t`` (unclipped), or None.

    The hand is present only while a move is in progress, travelling on a
    straight line from the pick cell to the place cell; it is lifted out of
    view at ``t_end``, the frame the piece comes to rest.
    """
    _, active = _piece_layout(spec, t, settled_only=False)
    if active is None:
        return None
    m, _ = active
    span = m.t_end - 1 - m.t_start
    f = Fraction(t - m.t_start, span) if span > 0 else Fraction(1)
    (pc, pr), (qc, qr) = m.pick_cell, m.place_cell
    if spec.hand_snap == "cell":
        col = _round_half_up(pc + f * (qc - pc))
        row = _round_half_up(pr + f * (qr - pr))
        cx = col * spec.cell + spec.cell // 2
        cy = row * spec.cell + spec.cell // 2
    else:
        half = Fraction(spec.cell, 2)
        cx = _round_half_up(pc * spec.cell + half + f * (qc - pc) * spec.cell)
        cy = _round_half_up(pr * spec.cell + half + f * (qr - pr) * spec.cell)
    w, h = spec.hand_size
    return cx - w // 2, cy - h // 2, w, h


def _round_half_up(q: Fraction) -> int:
    return int((q + Fraction(1, 2)) // 1)


def _check_index(spec: SceneSpec, t: int) -> None:
    if not 0 <= t < spec.frame_count:
        raise IndexError(f"frame index {t} outside [0, {spec.frame_count})")


def _render_layers(spec: SceneSpec, t: int, background_only: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Raster plus glyph mask and hand mask (hand mask empty for backgrounds)."""
    img = _draw_board(spec)
    glyphs = np.zeros(img.shape[:2], bool)
    hand = np.zeros(img.shape[:2], bool)
    board, active = _piece_layout(spec, t, settled_only=background_only)
    for (c, r), char in sorted(board.items()):
        _draw_piece(spec, img, c * spec.cell, r * spec.cell, char, glyphs)
    if not background_only and active is not None:
        box = hand_box(spec, t)
        assert box is not None
        x, y, w, h = box
        patch = np.empty((h, w, 3), np.uint8)
        patch[...] = spec.hand_color
        _paste(img, patch, x, y, hand, np.ones((h, w), bool))
        # the carried piece sits in the hand's palm
        _draw_piece(spec, img, x + w // 2 - spec.cell // 2, y + h // 2 - spec.cell // 2, active[1])
        hand &= (img == np.array(spec.hand_color, np.uint8)).all(axis=2)
    return img, glyphs, hand


def _add_noise(spec: SceneSpec, img: np.ndarray, t: int) -> np.ndarray:
    a = spec.noise_amplitude
    if a == 0:
        return img
    rng = np.random.default_rng([spec.seed, t])
    jitter = rng.integers(-a, a + 1, size=img.shape, dtype=np.int16)
    return np.clip(img.astype(np.int16) + jitter, 0, 255).astype(np.uint8)


def render_scene(spec: SceneSpec, frame_index: int) -> Frame:
    """Board, pieces, hand (with carried piece) on top, then seeded noise."""
    _check_index(spec, frame_index)
    img, _, _ = _render_layers(spec, frame_index, background_only=False)
    return Frame(_add_noise(spec, img, frame_index), frame_index)


def ground_truth_background(spec: SceneSpec, frame_index: int) -> Frame:
    """The scene without the hand and without noise.

    A piece being carried is still drawn on its pick cell until the move
    ends, and on its place cell from ``t_end`` on.
    """
    _check_index(spec, frame_index)
    img, _, _ = _render_layers(spec, frame_index, background_only=True)
    return Frame(img, frame_index)


def glyph_mask(spec: SceneSpec, frame_index: int) -> np.ndarray:
    """Glyph pixels of the ground-truth background at ``frame_index``."""
    _check_index(spec, frame_index)
    return _render_layers(spec, frame_index, background_only=True)[1]


def hand_mask(spec: SceneSpec, frame_index: int) -> np.ndarray:
    """Pixels showing bare hand (not the carried piece) in the rendered frame."""
    _check_index(spec, frame_index)
    return _render_layers(spec, frame_index, background_only=False)[2]


def hand_colored(spec: SceneSpec, pixels: np.ndarray) -> np.ndarray:
    """Pixels within noise amplitude of the hand colour in every channel."""
    diff = np.abs(pixels.astype(np.int16) - np.array(spec.hand_color, np.int16))
    return (diff <= spec.noise_amplitude).all(axis=2)


def frames(spec: SceneSpec) -> Iterator[Frame]:
    for t in range(spec.frame_count):
        yield render_scene(spec, t)


# ---------------------------------------------------------------- text format

_CELL = r"(\d+)\s*,\s*(\d+)"
_MOVE_RE = re.compile(rf"^{_CELL}\s*->\s*{_CELL}\s*@\s*(\d+)\s*\.\.\s*(\d+)$")
_PIECE_RE = re.compile(rf"^{_CELL}\s+(\S)$")


def _parse_pair(value: str, sep: str) -> tuple[int, int]:
    parts = [p.strip() for p in value.split(sep)]
    if len(parts) != 2:
        raise SceneError(f"expected two numbers separated by {sep!r}, got {value!r}")
    return int(parts[0]), int(parts[1])


def _parse_color(value: str) -> Color:
    parts = [int(p) for p in value.split(",")]
    if len(parts) != 3 or not all(0 <= p <= 255 for p in parts):
        raise SceneError(f"bad colour {value!r}")
    return parts[0], parts[1], parts[2]


def _parse_fps(value: str) -> Rate:
    if "/" in value:
        return Fraction(value)
    return float(value) if "." in value else int(value)


def parse_scene(text: str) -> SceneSpec:
    kwargs: dict = {}
    pieces: dict[Cell, str] = {}
    moves: list[MoveEvent] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SceneError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key == "board":
                kwargs["cols"], kwargs["rows"] = _parse_pair(value, "x")
            elif key == "cell":
                kwargs["cell"] = int(value)
            elif key == "hand":
                kwargs["hand_size"] = _parse_pair(value, "x")
            elif key == "hand_snap":
                kwargs["hand_snap"] = value
            elif key.endswith("_color"):
                kwargs[key] = _parse_color(value)
            elif key == "noise":
                kwargs["noise_amplitude"] = int(value)
            elif key == "seed":
                kwargs["seed"] = int(value)
            elif key == "fps":
                kwargs["fps"] = _parse_fps(value)
            elif key == "frames":
                kwargs["frame_count"] = int(value)
            elif key == "piece":
                m = _PIECE_RE.match(value)
                if not m:
                    raise SceneError(f"bad piece {value!r}")
                pieces[(int(m[1]), int(m[2]))] = m[3]
            elif key == "move":
                m = _MOVE_RE.match(value)
                if not m:
                    raise SceneError(f"bad move {value!r}")
                a, b, c, d, t0, t1 = (int(g) for g in m.groups())
                moves.append(MoveEvent((a, b), (c, d), t0, t1))
            else:
                raise SceneError(f"unknown key {key!r}")
        except (SceneError, ValueError) as exc:
            raise SceneError(f"line {lineno}: {exc}") from None
    return SceneSpec(pieces=pieces, moves=tuple(moves), **kwargs)


def format_scene(spec: SceneSpec) -> str:
    def color(c: Color) -> str:
        return ",".join(str(v) for v in c)

    lines = [
        f"board = {spec.cols}x{spec.rows}",
        f"cell = {spec.cell}",
        f"hand = {spec.hand_size[0]}x{spec.hand_size[1]}",
        f"hand_color = {color(spec.hand_color)}",
        f"hand_snap = {spec.hand_snap}",
        f"noise = {spec.noise_amplitude}",
        f"seed = {spec.seed}",
        f"fps = {spec.fps}",
        f"frames = {spec.frame_count}",
        f"board_color = {color(spec.board_color)}",
        f"line_color = {color(spec.line_color)}",
        f"piece_color = {color(spec.piece_color)}",
        f"glyph_color = {color(spec.glyph_color)}",
    ]
    lines += [f"piece = {c},{r} {ch}" for (c, r), ch in sorted(spec.pieces.items())]
    lines += [
        f"move = {m.pick_cell[0]},{m.pick_cell[1]} -> {m.place_cell[0]},{m.place_cell[1]}"
        f" @ {m.t_start}..{m.t_end}"
        for m in spec.moves
    ]
    return "\n".join(lines) + "\n"


def load_scene(path: Union[str, Path]) -> SceneSpec:
    return parse_scene(Path(path).read_text())


# ---------------------------------------------------------------- random scenes


def random_scene(rng: np.random.Generator, width: int = 64, height: int = 64,
                 frame_count: int = 60) -> SceneSpec:
    """A small scene with random pieces, moves, hand and noise (for fuzzing)."""
    cell = int(rng.choice([c for c in (8, 16, 32) if width % c == 0 and height % c == 0]))
    cols, rows = width // cell, height // cell
    cells = [(c, r) for r in range(rows) for c in range(cols)]
    n_pieces = int(rng.integers(1, max(2, len(cells) // 2)))
    chosen = rng.choice(len(cells), size=n_pieces, replace=False)
    letters = list(_FONT)
    pieces = {cells[i]: letters[int(rng.integers(len(letters)))] for i in chosen}

    moves = []
    occupied = dict(pieces)
    t = int(rng.integers(1, 8))
    while t < frame_count - 2:
        length = int(rng.integers(2, 20))
        t_end = min(t + length, frame_count - 1)
        if t_end <= t:
            break
        pick = list(occupied)[int(rng.integers(len(occupied)))]
        free = [c for c in cells if c not in occupied]
        if not free:
            break
        place = free[int(rng.integers(len(free)))]
        moves.append(MoveEvent(pick, place, t, t_end))
        occupied[place] = occupied.pop(pick)
        t = t_end + int(rng.integers(1, 12))

    hw = int(rng.integers(4, width // 2 + 1))
    hh = int(rng.integers(4, height // 2 + 1))
    return SceneSpec(
        cols=cols,
        rows=rows,
        cell=cell,
        pieces=pieces,
        hand_size=(hw, hh),
        hand_snap=str(rng.choice(["cell", "pixel"])),
        moves=tuple(moves),
        noise_amplitude=int(rng.integers(0, 4)),
        seed=int(rng.integers(1 << 30)),
        frame_count=frame_count,
    )
