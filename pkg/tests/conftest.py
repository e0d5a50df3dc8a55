import math

import numpy as np
import pytest
from hypothesis import settings

from fockcheck.fock import CutoffSpec, StateVector

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# default sweep grid for (r, theta)
R_GRID = (0.2, 0.5, math.pi / 4, 1.0)
THETA_GRID = (0.0, math.pi / 4, math.pi / 2, math.pi)


def random_state(rng: np.random.Generator, cutoff: CutoffSpec) -> StateVector:
    v = rng.normal(size=cutoff.dim) + 1j * rng.normal(size=cutoff.dim)
    return StateVector(cutoff, v / np.linalg.norm(v))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
