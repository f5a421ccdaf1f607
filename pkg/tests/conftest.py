import numpy as np
import pytest

from fraclob import LatticeSpec, SourceSpec, relax_to_equilibrium


@pytest.fixture(scope="session")
def table1():
    return LatticeSpec()


@pytest.fixture(scope="session")
def relaxed(table1):
    return relax_to_equilibrium(table1, SourceSpec())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_LINES = []


@pytest.fixture(scope="session")
def report():
    """Record one verdict line per acceptance criterion."""
    def emit(ok: bool, number, text: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        _LINES.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
