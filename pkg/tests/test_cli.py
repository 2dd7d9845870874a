import io
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from halfdr import cli
from halfdr.videoio.ppm import read_ppm_sequence
from halfdr.videoio.y4m import VideoHeader, read_y4m, write_y4m

from conftest import random_frame

SCENES = Path(cli.__file__).parent / "scenes"


def test_parse_defaults():
    plan = cli.parse_args(["--input", "a.y4m", "--output", "out"])
    assert (plan.d_seconds, plan.block_size, plan.tau, plan.alpha) == (3.0, 16, 8.0, 0.5)
    assert plan.fps is None and plan.threads >= 1 and plan.quality == 85


def test_parse_rates():
    assert cli.parse_args(["--input", "x", "--output", "y", "--fps", "30000/1001"]).fps == Fraction(30000, 1001)
    assert cli.parse_args(["--input", "x", "--output", "y", "--fps", "25"]).fps == 25


@pytest.mark.parametrize(
    "argv",
    [
        ["--input", "x", "--output", "y", "--d", "-1"],
        ["--input", "x", "--output", "y", "--alpha", "1.5"],
        ["--input", "x", "--output", "y", "--tau", "300"],
        ["--input", "x", "--output", "y", "--quality", "0"],
        ["--input", "x", "--output", "y", "--threads", "0"],
        ["--input", "x", "--output", "y", "--fps", "0"],
        ["--input", "x"],
        ["--output", "y"],
        ["--input", "x", "--serve", "nonsense"],
        ["--bogus"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    err = capsys.readouterr().err
    assert "error" in err and err.count("\n") == 1


def test_missing_input_exits_1(tmp_path, capsys):
    assert cli.main(["--input", str(tmp_path / "missing.y4m"), "--output", str(tmp_path / "o")]) == 1
    assert "not found" in capsys.readouterr().err


def test_ppm_input_needs_fps(tmp_path, capsys):
    (tmp_path / "in").mkdir()
    assert cli.main(["--input", str(tmp_path / "in"), "--output", str(tmp_path / "o")]) == 2


def test_verify_exit_codes(capsys):
    assert cli.main(["--verify", str(SCENES / "onemove.scene")]) == 0
    out = capsys.readouterr().out
    assert "PASS  C-sync-move0" in out and "oracle-equivalence" in out
    assert cli.main(["--verify", str(SCENES / "pause.scene")]) == 3
    assert "FAIL  A-no-hand" in capsys.readouterr().out


def test_synth_to_y4m_then_ppm(tmp_path, capsys):
    y4m = tmp_path / "out.y4m"
    assert cli.main(["--input", f"synth:{SCENES / 'onemove.scene'}", "--output", str(y4m),
                     "--stats", "--threads", "2"]) == 0
    err = capsys.readouterr().err
    assert "warm-up: the first 30 input frames" in err
    assert "frames_in=80" in err and "frames_out=50" in err
    with open(y4m, "rb") as fh:
        header, frames = read_y4m(fh)
        assert (header.width, header.height, header.fps) == (256, 192, 10)
        assert len(list(frames)) == 50
    out_dir = tmp_path / "ppm"
    assert cli.main(["--input", str(y4m), "--output", str(out_dir), "--d", "1"]) == 0
    assert len(list(read_ppm_sequence(out_dir))) == 40


def test_stdin_input_and_fps_mismatch(tmp_path, monkeypatch, capsys, rng):
    buf = io.BytesIO()
    write_y4m(VideoHeader(8, 8, Fraction(5)), [random_frame(rng, 8, 8, i) for i in range(6)], buf)

    class FakeStdin:
        def __init__(self, data):
            self.buffer = io.BytesIO(data)

    monkeypatch.setattr(sys, "stdin", FakeStdin(buf.getvalue()))
    assert cli.main(["--input", "-", "--output", str(tmp_path / "o"), "--d", "0.4", "--block-size", "4"]) == 0
    assert len(list((tmp_path / "o").iterdir())) == 4

    monkeypatch.setattr(sys, "stdin", FakeStdin(buf.getvalue()))
    assert cli.main(["--input", "-", "--output", str(tmp_path / "p"), "--fps", "25"]) == 2


def test_truncated_input_exits_1(tmp_path, capsys, rng):
    path = tmp_path / "t.y4m"
    with open(path, "wb") as fh:
        write_y4m(VideoHeader(8, 8, Fraction(5)), [random_frame(rng, 8, 8, i) for i in range(3)], fh)
    path.write_bytes(path.read_bytes()[:-10])
    assert cli.main(["--input", str(path), "--output", str(tmp_path / "o"), "--d", "0"]) == 1
    assert "frame 2" in capsys.readouterr().err


def test_serve_and_output_together(tmp_path, capsys):
    assert cli.main(["--input", f"synth:{SCENES / 'onemove.scene'}", "--output", str(tmp_path / "o"),
                     "--serve", "127.0.0.1:0", "--d", "1"]) == 0
    assert "serving Motion JPEG at http://127.0.0.1:" in capsys.readouterr().err
    assert len(list((tmp_path / "o").iterdir())) == 70


def test_full_run_is_deterministic(tmp_path, capsys):
    scene = f"synth:{SCENES / 'onemove_noisy.scene'}"
    outputs = []
    for n, threads in enumerate(("1", "3", "1")):
        path = tmp_path / f"run{n}.y4m"
        assert cli.main(["--input", scene, "--output", str(path), "--threads", threads]) == 0
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
