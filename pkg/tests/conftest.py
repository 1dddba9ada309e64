from __future__ import annotations

import pytest

from higgsteich.picard import SurfaceData

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def record(criterion: str, passed: bool, detail: str = "") -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def hyperbolic_sweep(g_max: int = 5, n_max: int = 8, n_min: int = 0):
    return [
        SurfaceData(g, n)
        for g in range(g_max + 1)
        for n in range(n_min, n_max + 1)
        if 2 * g - 2 + n > 0
    ]
