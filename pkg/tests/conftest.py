import numpy as np
import pytest
from hypothesis import settings

from carbongame import decentralized, stackelberg
from carbongame.config import reference_scenario, validate

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def scn():
    return validate(reference_scenario())


@pytest.fixture(scope="session")
def eq_d(scn):
    return decentralized.solve(scn)


@pytest.fixture(scope="session")
def eq_s(scn):
    return stackelberg.solve(scn)


@pytest.fixture(params=["decentralized", "stackelberg"])
def eq(request, eq_d, eq_s):
    return eq_d if request.param == "decentralized" else eq_s


def g_grid(Gs, n=101):
    return np.linspace(0.0, 2.0 * Gs, n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
