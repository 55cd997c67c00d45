import pytest

import helpers


@pytest.fixture(scope="session")
def list_prog():
    return helpers.load_list()


@pytest.fixture(scope="session")
def coloring_prog():
    return helpers.load_coloring()


@pytest.fixture(scope="session")
def stdlib_prog():
    from diaplan import stdlib_program
    return stdlib_program()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if helpers.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in helpers.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
