"""Check a pipeline run on a synthetic scene against conditions A, B and C.

A  the background layer never hides anything: it matches the hand-free
   ground truth (within the noise amplitude), contains no hand-coloured
   pixel, and shows through the hand wherever a glyph is covered.
B  hand and background are merged into one image: every output pixel is the
   blend of its two layers, and where the hand covers a glyph both of them
   change the output pixel.
C  layers are synchronised: the first output whose background shows a moved
   piece on its new cell is the output whose delayed layer is the settle
   frame ``t_end``.

Latency (D) is not judged here; it is reported by ``PipelineStats``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from halfdr.compositor import blend_table
from halfdr.core import Frame, PipelineConfig
from halfdr.synth.scene import (
    SceneSpec,
    glyph_mask,
    ground_truth_background,
    hand_colored,
    hand_mask,
    render_scene,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ConditionReport:
    checks: list[Check] = field(default_factory=list)
    latency_frames: int = 0
    latency_seconds: float = 0.0
    commit_frames: dict[int, Optional[int]] = field(default_factory=dict)

    def add(self, name: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(passed), detail))

    def condition(self, letter: str) -> bool:
        return all(c.passed for c in self.checks if c.name.startswith(letter))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status}  {c.name:<22} {c.detail}".rstrip())
        lines.append(
            f"INFO  D-latency              output delayed by {self.latency_frames} frames "
            f"({self.latency_seconds:.3f} s); throughput in pipeline stats"
        )
        return "\n".join(lines)


def _within(a: np.ndarray, b: np.ndarray, tol: int) -> bool:
    return bool(np.abs(a.astype(np.int16) - b.astype(np.int16)).max(initial=0) <= tol)


def verify_conditions(
    spec: SceneSpec,
    config: PipelineConfig,
    outputs: tuple[Sequence[Frame], Sequence[Frame]],
) -> ConditionReport:
    """``outputs`` is ``(backgrounds, composited)`` from either pipeline run
    over ``render_scene`` frames of ``spec``."""
    backgrounds, composited = outputs
    n = config.n_delay
    noise = spec.noise_amplitude
    report = ConditionReport(latency_frames=n, latency_seconds=n / float(config.fps))
    table = blend_table(float(config.alpha))

    gt_mismatch: Optional[int] = None
    hand_leak: Optional[int] = None
    hidden_glyph: Optional[int] = None
    formula_bad: Optional[int] = None
    unmixed: Optional[int] = None
    overlap_pixels = 0
    hand_over_glyph_pixels = 0

    for out in composited:
        j = out.index
        layer = backgrounds[j + n].pixels
        delayed = render_scene(spec, j).pixels
        truth = ground_truth_background(spec, j).pixels

        if gt_mismatch is None and not _within(layer, truth, noise):
            gt_mismatch = j
        if hand_leak is None and hand_colored(spec, layer).any():
            hand_leak = j

        expected = table[(delayed.astype(np.uint16) << 8) | layer]
        if formula_bad is None and not np.array_equal(expected, out.pixels):
            formula_bad = j

        overlap = hand_mask(spec, j) & glyph_mask(spec, j)
        if overlap.any():
            o = out.pixels[overlap]
            d = delayed[overlap]
            b = layer[overlap]
            hand_over_glyph_pixels += int(overlap.sum())
            # background shows through the hand
            if hidden_glyph is None and (o == d).all(axis=1).any():
                hidden_glyph = j
            # both layers move the result
            overlap_pixels += int(overlap.sum())
            if unmixed is None and ((o == d).all(axis=1) | (o == b).all(axis=1)).any():
                unmixed = j

    def first(label: str, j: Optional[int]) -> str:
        return "ok" if j is None else f"{label} at output frame {j}"

    report.add("A-background-truth", gt_mismatch is None,
               first("differs from hand-free ground truth", gt_mismatch))
    report.add("A-no-hand", hand_leak is None, first("hand-coloured pixel", hand_leak))
    report.add("A-visibility", hidden_glyph is None,
               first("glyph hidden under hand", hidden_glyph)
               + f" ({hand_over_glyph_pixels} covered glyph pixels checked)")
    report.add("B-blend", formula_bad is None, first("output is not the layer blend", formula_bad))
    mixed = unmixed is None and 0.0 < config.alpha < 1.0
    report.add("B-mixed", mixed,
               (first("a layer has no influence", unmixed) if unmixed is not None
                else f"alpha={config.alpha:g}, {overlap_pixels} overlap pixels checked"))

    for k, move in enumerate(spec.moves):
        rows, cols = spec.cell_rect(move.place_cell)
        settled = ground_truth_background(spec, move.t_end).pixels[rows, cols]
        shown: Optional[int] = None
        for out in composited:
            if out.index < move.t_start:
                continue
            layer = backgrounds[out.index + n].pixels[rows, cols]
            if _within(layer, settled, noise):
                shown = out.index
                break
        report.commit_frames[k] = shown
        ok = shown == move.t_end
        report.add(
            f"C-sync-move{k}",
            ok,
            f"settle frame {move.t_end}, background first shows it with delayed frame {shown}",
        )
    return report
