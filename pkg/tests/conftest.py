import numpy as np
import pytest

from swiptaf.endtoend import SystemConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical or sweep checks")


@pytest.fixture(scope="session")
def cfg():
    """Default operating point: TS, m1=3, alpha2=2, mu2=4.2, C=1, P_S/N1=40 dB."""
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel(a, b):
    return abs(a - b) / abs(b)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
