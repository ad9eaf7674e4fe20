import numpy as np
import pytest

from sparse_moments.mixtures import Domain, SpikeMixture, random_mixture


def separated_interval(k, seed, zeta=0.1, wmin=0.1):
    return random_mixture(Domain.interval(), k, seed, separation=zeta, min_weight=wmin)


def mix(locs, weights, domain=None):
    locs = np.asarray(locs, dtype=float)
    if domain is None:
        domain = Domain.interval() if locs.ndim == 1 or locs.shape[1] == 1 else Domain.triangle()
    return SpikeMixture(domain, locs, np.asarray(weights, dtype=float))


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
