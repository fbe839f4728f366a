"""Shared test plumbing: collects acceptance-criterion verdict lines and
prints them in the terminal summary regardless of output capture."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_recorder():
    def record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
