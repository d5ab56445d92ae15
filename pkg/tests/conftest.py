import numpy as np
import pytest

_CRITERIA: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20121018)


@pytest.fixture
def criterion():
    """Record one acceptance line; the summary is printed at the end of the run."""

    def record(label: str, passed: bool, detail: str):
        _CRITERIA.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
        assert passed, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
