import os

import pytest
from hypothesis import HealthCheck, settings

from sphlab.padic import PrimeContext

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=150, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# lines recorded by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list = []


@pytest.fixture
def c22():
    return PrimeContext(2, 2)


@pytest.fixture
def c23():
    return PrimeContext(2, 3)


@pytest.fixture
def c32():
    return PrimeContext(3, 2)


@pytest.fixture
def c33():
    return PrimeContext(3, 3)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
