import math

import pytest
from hypothesis import HealthCheck, settings

from periodic_fbp.coefficients import RobinBC, constant, sinusoid

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

HSTAR_UNIT = math.pi / 2  # a = b = d = 1, zero flux at x = 0


@pytest.fixture
def one():
    return constant(1.0)


@pytest.fixture
def b1():
    return constant(1.0, role="b")


@pytest.fixture
def neumann():
    return RobinBC.neumann()


@pytest.fixture
def dirichlet():
    return RobinBC.dirichlet()


@pytest.fixture
def seasonal():
    return sinusoid(1.0, 0.5)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
