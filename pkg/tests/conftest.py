from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from halfdr.core import Frame

SCENES = Path(__file__).resolve().parents[1] / "src" / "halfdr" / "scenes"


@pytest.fixture
def scenes_dir() -> Path:
    return SCENES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def solid(width: int, height: int, color, index: int = 0) -> Frame:
    px = np.empty((height, width, 3), np.uint8)
    px[...] = color
    return Frame(px, index)


def random_frame(rng: np.random.Generator, width: int, height: int, index: int = 0) -> Frame:
    return Frame(rng.integers(0, 256, (height, width, 3), dtype=np.uint8), index)


def same_sequence(a, b) -> bool:
    return len(a) == len(b) and all(x == y for x, y in zip(a, b))


_RESULTS_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record and print one pass/fail line for an acceptance criterion."""
    results = request.config.stash.setdefault(_RESULTS_KEY, [])

    def report(number: int, name: str, passed: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number} {name}: {detail}".rstrip(": ")
        results.append(line)
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS_KEY, [])
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
