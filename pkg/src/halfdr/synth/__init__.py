"""Synthetic scenes, the naive reference pipeline and the condition checks."""

from halfdr.synth.oracle import reference_pipeline
from halfdr.synth.scene import (
    MoveEvent,
    SceneError,
    SceneSpec,
    calibrate,
    format_scene,
    ground_truth_background,
    load_scene,
    parse_scene,
    random_scene,
    render_scene,
)
from halfdr.synth.verify import ConditionReport, verify_conditions

__all__ = [
    "ConditionReport",
    "MoveEvent",
    "SceneError",
    "SceneSpec",
    "calibrate",
    "format_scene",
    "ground_truth_background",
    "load_scene",
    "parse_scene",
    "random_scene",
    "reference_pipeline",
    "render_scene",
    "verify_conditions",
]
