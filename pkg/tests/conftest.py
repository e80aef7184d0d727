import numpy as np
import pytest

from thermo_tdbem import geometry
from thermo_tdbem.material import Material

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def mat():
    return Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.5, eta=0.4, kappa=1.1)


@pytest.fixture(scope="session")
def mat_dec():
    return Material(rho=1.0, lam=1.3, mu=0.9, gamma=0.0, eta=0.0, kappa=1.1)


@pytest.fixture(scope="session")
def circle32():
    return geometry.make_mesh("circle", 32)


@pytest.fixture(scope="session")
def circle64():
    return geometry.make_mesh("circle", 64)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
