import pytest
from hypothesis import given, strategies as st

from halfdr.core import FrameOrderError
from halfdr.delayline import DelayLine

from conftest import solid


def frames(n):
    return [solid(2, 2, (i % 256, 0, 0), i) for i in range(n)]


def test_capacity_one():
    line = DelayLine(1)
    f0, f1 = frames(2)
    assert line.push(f0) is None
    assert line.push(f1) is f0


def test_capacity_zero_passes_through():
    (f0,) = frames(1)
    assert DelayLine(0).push(f0) is f0


def test_capacity_thirty_first_output():
    line = DelayLine(30)
    fs = frames(31)
    outs = [line.push(f) for f in fs]
    assert outs[:30] == [None] * 30
    assert outs[30] is fs[0]


@given(st.integers(0, 20), st.integers(0, 60))
def test_shift_exactly_once_in_order(capacity, n):
    line = DelayLine(capacity)
    fs = frames(n)
    emitted = [out for out in (line.push(f) for f in fs) if out is not None]
    assert emitted == fs[: max(0, n - capacity)]
    assert len(line) == min(n, capacity)


def test_out_of_order_rejected():
    line = DelayLine(2)
    with pytest.raises(FrameOrderError):
        line.push(solid(2, 2, (0, 0, 0), 3))


def test_negative_capacity_rejected():
    with pytest.raises(ValueError):
        DelayLine(-1)
