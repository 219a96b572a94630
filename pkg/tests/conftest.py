import numpy as np
import pytest

# filled by tests/test_acceptance.py, printed at the end of the run
CRITERIA = {}


def record(number, name, ok, detail=""):
    CRITERIA[number] = (name, bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        name, ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {name}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


EXAMPLE_K = np.array([[0.3, 0.3, 0.0], [0.7, 0.1, 0.5], [0.0, 0.6, 0.5]])
