import numpy as np
import pytest

from equiwide.model import DissimilarityMatrix
from oracles import LINE_POINTS, line_matrix


@pytest.fixture
def line_D():
    """The six points 0, 1, 2, 10, 11, 20 on a line."""
    return DissimilarityMatrix(line_matrix())


@pytest.fixture
def line_points():
    return np.array(LINE_POINTS)[:, None]


_VERDICTS: list[str] = []


@pytest.fixture
def criterion():
    """Run one acceptance check, log a PASS/FAIL line, then assert on it."""

    def check(number, body):
        try:
            ok, detail = body()
        except Exception as exc:  # a crash is a failed criterion, not a missing line
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
