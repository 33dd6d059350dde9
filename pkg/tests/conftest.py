import pytest

from forster.pair import PhysicalParams

ACCEPTANCE_LINES = []


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
