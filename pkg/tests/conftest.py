"""Shared fixtures and the hypothesis profile."""

import pytest
from hypothesis import HealthCheck, settings

from wentro import Sft
from wentro.carpets import CarpetSpec

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def golden():
    return Sft.golden_mean()


@pytest.fixture
def example_carpet():
    return CarpetSpec(3, 2, [(0, 0), (1, 1), (2, 0)])


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """List of one-line verdicts, echoed in the terminal summary."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
