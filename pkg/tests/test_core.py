from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from halfdr.core import BlockRect, Frame, PipelineConfig, block_partition, derive_counts


def test_partition_hd_geometry():
    rects = block_partition(1280, 720, 16)
    assert len(rects) == 3600
    assert all(r.w == 16 and r.h == 16 for r in rects)


def test_partition_single_block():
    assert block_partition(16, 16, 16) == [BlockRect(0, 0, 16, 16)]


def test_partition_edge_remainders():
    assert block_partition(20, 20, 16) == [
        BlockRect(0, 0, 16, 16),
        BlockRect(16, 0, 4, 16),
        BlockRect(0, 16, 16, 4),
        BlockRect(16, 16, 4, 4),
    ]


@given(st.integers(1, 40), st.integers(1, 40), st.integers(1, 20))
def test_partition_tiles_every_pixel_once(width, height, bs):
    rects = block_partition(width, height, bs)
    assert len(rects) == -(-width // bs) * -(-height // bs)
    cover = np.zeros((height, width), int)
    for r in rects:
        assert 1 <= r.w <= bs and 1 <= r.h <= bs
        # only the last column/row may be short
        if r.x + r.w < width:
            assert r.w == bs
        if r.y + r.h < height:
            assert r.h == bs
        cover[r.slices()] += 1
    assert (cover == 1).all()


@pytest.mark.parametrize(
    "fps, d, expected",
    [(10, 3.0, (30, 30)), (13, 3.0, (39, 39)), (30, 0.0, (0, 0))],
)
def test_derive_counts(fps, d, expected):
    assert derive_counts(fps, d) == expected


def test_derive_counts_uses_decimal_semantics():
    assert derive_counts(30, 0.1) == (3, 3)
    assert derive_counts(Fraction(30000, 1001), 3) == (90, 90)


@pytest.mark.parametrize("fps", [0, -1, -0.5])
def test_derive_counts_rejects_bad_fps(fps):
    with pytest.raises(ValueError):
        derive_counts(fps, 3)


@given(
    st.floats(0.1, 120, allow_nan=False), st.floats(0.1, 120, allow_nan=False),
    st.floats(0, 10, allow_nan=False), st.floats(0, 10, allow_nan=False),
)
def test_derive_counts_monotone(f1, f2, d1, d2):
    lo_f, hi_f = sorted((f1, f2))
    lo_d, hi_d = sorted((d1, d2))
    assert derive_counts(lo_f, lo_d)[0] <= derive_counts(hi_f, lo_d)[0]
    assert derive_counts(lo_f, lo_d)[0] <= derive_counts(lo_f, hi_d)[0]


def test_config_defaults_and_derivation():
    cfg = PipelineConfig(fps=10)
    assert (cfg.d_seconds, cfg.block_size, cfg.tau, cfg.alpha) == (3.0, 16, 8.0, 0.5)
    assert cfg.n_stable == cfg.n_delay == 30
    assert PipelineConfig(fps=25, d_seconds=0).n_stable == 0


@pytest.mark.parametrize(
    "kwargs",
    [dict(block_size=0), dict(tau=-1), dict(tau=256), dict(alpha=1.5), dict(threads=0),
     dict(fps=0), dict(d_seconds=-1)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PipelineConfig(**{"fps": 10, **kwargs})


def test_frame_is_read_only_and_validated():
    f = Frame(np.zeros((2, 3, 3), np.uint8), 4)
    assert (f.width, f.height, f.index) == (3, 2, 4)
    with pytest.raises(ValueError):
        f.pixels[0, 0, 0] = 1
    with pytest.raises(ValueError):
        Frame(np.zeros((2, 3), np.uint8))
    with pytest.raises(ValueError):
        Frame(np.full((1, 1, 3), 300))
    with pytest.raises(ValueError):
        Frame(np.zeros((1, 1, 3), np.uint8), -1)
