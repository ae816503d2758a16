import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vpecho.equilibrium import make_gaussian, make_table, make_two_stream

settings.register_profile(
    "deterministic", derandomize=True, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def gaussian():
    return make_gaussian()


@pytest.fixture(scope="session")
def two_stream():
    return make_two_stream(a=3.0)


@pytest.fixture(scope="session")
def gaussian_table():
    """Gaussian sampled onto a table: exercises the interpolated/quadrature paths."""
    eta = np.arange(0.0, 40.0 + 1e-9, 0.01)
    values = np.sqrt(2 * np.pi) * np.exp(-0.5 * eta**2)
    return make_table(eta, values.astype(complex), c0=4.2, theta0=1.0)


@pytest.fixture(scope="session")
def zero_equilibrium():
    """mu identically zero; the resolvent kernel must vanish with it."""
    eta = np.linspace(0.0, 10.0, 11)
    return make_table(eta, np.zeros(11, dtype=complex), c0=1.0, theta0=1.0)


# ---------------------------------------------------------------------------
# acceptance reporting: one pass/fail line per criterion, shown at the end
# ---------------------------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


def acceptance_record(criterion: str, ok: bool, detail: str):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
