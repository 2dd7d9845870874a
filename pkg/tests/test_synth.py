import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from halfdr.core import PipelineConfig
from halfdr.pipeline import trace
from halfdr.synth.oracle import reference_pipeline
from halfdr.synth.scene import (
    MoveEvent, SceneError, SceneSpec, calibrate, format_scene, frames, glyph_bitmap,
    ground_truth_background, hand_box, hand_colored, load_scene, parse_scene, random_scene,
    render_scene,
)
from halfdr.synth.verify import verify_conditions

from conftest import same_sequence, solid

ONE = SceneSpec(pieces={(2, 2): "K", (5, 3): "G"}, moves=(MoveEvent((2, 2), (3, 2), 20, 35),),
                frame_count=80)


def cell_pixels(spec, frame, cell):
    rows, cols = spec.cell_rect(cell)
    return frame.pixels[rows, cols]


def has_glyph(spec, frame, cell):
    return bool((cell_pixels(spec, frame, cell) == spec.glyph_color).all(axis=2).any())


def test_before_move_glyph_on_pick_cell_no_hand():
    f = render_scene(ONE, 5)
    assert has_glyph(ONE, f, (2, 2)) and not has_glyph(ONE, f, (3, 2))
    assert not hand_colored(ONE, f.pixels).any()
    assert hand_box(ONE, 5) is None


def test_after_move_glyph_on_place_cell():
    f = render_scene(ONE, 40)
    assert has_glyph(ONE, f, (3, 2)) and not has_glyph(ONE, f, (2, 2))
    assert not hand_colored(ONE, f.pixels).any()


def test_hand_present_during_move():
    for t in (20, 27, 34):
        assert hand_colored(ONE, render_scene(ONE, t).pixels).any()


def test_render_is_pure():
    noisy = ONE.with_changes(noise_amplitude=3, seed=9)
    assert render_scene(noisy, 12) == render_scene(noisy, 12)
    assert render_scene(noisy, 12) != render_scene(noisy, 13).with_index(12)


def test_ground_truth_keeps_premove_state():
    for t in (20, 30, 34):
        gt = ground_truth_background(ONE, t)
        assert has_glyph(ONE, gt, (2, 2)) and not has_glyph(ONE, gt, (3, 2))
    gt = ground_truth_background(ONE, 35)
    assert has_glyph(ONE, gt, (3, 2)) and not has_glyph(ONE, gt, (2, 2))


def test_ground_truth_of_static_scene_equals_render():
    still = ONE.with_changes(moves=())
    for t in (0, 50):
        assert np.array_equal(ground_truth_background(still, t).pixels, render_scene(still, t).pixels)


def test_index_out_of_range():
    with pytest.raises(IndexError):
        render_scene(ONE, 80)
    with pytest.raises(IndexError):
        ground_truth_background(ONE, -1)


@pytest.mark.parametrize(
    "moves",
    [
        (MoveEvent((2, 2), (3, 2), 30, 20),),
        (MoveEvent((2, 2), (3, 2), 20, 80),),
        (MoveEvent((0, 0), (3, 2), 20, 30),),
        (MoveEvent((2, 2), (5, 3), 20, 30),),
        (MoveEvent((2, 2), (3, 2), 20, 30), MoveEvent((3, 2), (4, 2), 25, 40)),
    ],
)
def test_invalid_moves_rejected(moves):
    with pytest.raises(SceneError):
        ONE.with_changes(moves=moves)


def test_scene_text_round_trip(scenes_dir):
    for path in sorted(scenes_dir.glob("*.scene")):
        spec = load_scene(path)
        assert parse_scene(format_scene(spec)) == spec


def test_parse_errors_name_the_line():
    with pytest.raises(SceneError, match="line 2"):
        parse_scene("board = 4x4\nbogus = 1\n")


def test_calibration():
    calibrate(ONE.with_changes(noise_amplitude=4), 8)
    with pytest.raises(SceneError):
        calibrate(ONE.with_changes(noise_amplitude=5), 8)
    with pytest.raises(SceneError):
        calibrate(ONE.with_changes(hand_color=(230, 190, 110)), 8)


@given(st.integers(0, 2**16))
@settings(max_examples=20, deadline=None)
def test_random_scenes_are_valid(seed):
    spec = random_scene(np.random.default_rng(seed))
    assert (spec.width, spec.height, spec.frame_count) == (64, 64, 60)
    f = render_scene(spec, spec.frame_count - 1)
    assert f.shape == (64, 64)


def test_glyph_font():
    k = glyph_bitmap("K")
    assert k.shape == (5, 5) and k.dtype == bool and k.any()
    other = glyph_bitmap("?")
    assert np.array_equal(other, glyph_bitmap("?")) and other[0].all()


def run_scene(spec, **cfg):
    config = PipelineConfig(fps=spec.fps, **cfg)
    return config, trace(config, list(frames(spec)))


def test_verify_passes_on_clean_move():
    config, result = run_scene(ONE)
    report = verify_conditions(ONE, config, result)
    assert report.passed, report.to_text()
    assert report.commit_frames == {0: 35}
    assert report.latency_frames == 30 and report.latency_seconds == 3.0


def test_phase_narrative():
    """Before the move the pick cell shows the piece; while the hand carries it
    the background still has it on the pick cell; at the output whose delayed
    frame is the settle frame the piece jumps to the place cell in both layers."""
    config, (backgrounds, outs) = run_scene(ONE)
    n = config.n_delay
    for out in outs:
        bg = backgrounds[out.index + n]
        on_pick, on_place = has_glyph(ONE, bg, (2, 2)), has_glyph(ONE, bg, (3, 2))
        if out.index < 35:
            assert on_pick and not on_place, out.index
        else:
            assert on_place and not on_pick, out.index
            assert has_glyph(ONE, render_scene(ONE, out.index), (3, 2))


def test_opaque_output_hides_glyph():
    config, result = run_scene(ONE, alpha=1.0)
    report = verify_conditions(ONE, config, result)
    assert not report.condition("A-visibility") and not report.condition("B-mixed")


def test_background_only_output_fails_mixing():
    config, result = run_scene(ONE, alpha=0.0)
    assert not verify_conditions(ONE, config, result).condition("B-mixed")


def test_lingering_hand_fails_condition_a(scenes_dir):
    spec = load_scene(scenes_dir / "pause.scene")
    config, result = run_scene(spec)
    report = verify_conditions(spec, config, result)
    assert not report.condition("A")
    assert report.condition("B-blend")


def test_tampered_outputs_are_caught():
    config, (backgrounds, outs) = run_scene(ONE)
    # shift the background layer by one frame: synchronisation must break
    shifted = backgrounds[1:] + backgrounds[-1:]
    report = verify_conditions(ONE, config, (shifted, outs))
    assert not report.condition("C")
    # a blanked output breaks the blend check
    blank = [solid(o.width, o.height, (0, 0, 0), o.index) for o in outs]
    assert not verify_conditions(ONE, config, (backgrounds, blank)).condition("B-blend")


def test_oracle_agrees_on_bundled_scenes(scenes_dir):
    for path in sorted(scenes_dir.glob("*.scene")):
        spec = load_scene(path)
        config = PipelineConfig(fps=spec.fps)
        fs = list(frames(spec))
        ref, opt = reference_pipeline(config, fs), trace(config, fs)
        assert same_sequence(ref[0], opt[0]) and same_sequence(ref[1], opt[1]), path.name
