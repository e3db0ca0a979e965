import sys

import pytest

from mtvar import solve_green


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Echo the acceptance-criteria verdict lines even under output capture."""
    mod = sys.modules.get("test_acceptance")
    lines = sorted(getattr(mod, "VERDICTS", []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def green2():
    """Green table for N=2 at default settings, shared across the session."""
    return solve_green(2)


@pytest.fixture(scope="session")
def green3():
    return solve_green(3)
