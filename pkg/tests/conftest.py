"""Shared fixtures: one full storage run is expensive enough to reuse."""

import pytest

from slowlight import run, scenario

ACCEPTANCE_VERDICTS: list[str] = []


@pytest.fixture(scope="session")
def fig2a_spec():
    return scenario("fig2a")


@pytest.fixture(scope="session")
def fig2a_result(fig2a_spec):
    return run(fig2a_spec, output_stride=10)


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_VERDICTS


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)
