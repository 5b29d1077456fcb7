import numpy as np
import pytest
from hypothesis import settings

from scanopt import BivariateGaussianSpec, build_binomial_model

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def biv_example():
    return BivariateGaussianSpec(2.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def binom_11():
    return build_binomial_model(1, 1, 0.5)


@pytest.fixture(scope="session")
def binom_63():
    return build_binomial_model(6, 3, 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def match_eigenvalues(a, b):
    """Greedy nearest matching; returns max pairwise distance."""
    b = list(b)
    worst = 0.0
    for x in a:
        k = int(np.argmin([abs(x - y) for y in b]))
        worst = max(worst, abs(x - b.pop(k)))
    return worst


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
