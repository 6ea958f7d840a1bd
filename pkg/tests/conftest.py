import pytest

from _acceptance_log import LINES
from blockgth import models, oracle


@pytest.fixture(scope="session")
def queue_spec():
    """Uniformised working-vacation queue at the default parameters."""
    return models.build_spec()


@pytest.fixture(scope="session")
def queue_reference(queue_spec):
    return oracle.reference_stationary(queue_spec, 3000)


def pytest_terminal_summary(terminalreporter):
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
