from __future__ import annotations

import pytest

from cmpiv.connection import Params
from cmpiv.ode import OdeSettings, integrate

# lines collected by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def traj_0_1():
    return integrate(Params(0.0, 1.0), OdeSettings(), x_end=-12.0)


@pytest.fixture(scope="session")
def traj_0_m05():
    return integrate(Params(0.0, -0.5), OdeSettings(), x_end=-12.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
