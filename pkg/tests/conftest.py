import numpy as np
import pytest

from fairrank.core_data import Dataset
from fairrank.model import MlpScorer

# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_dataset(rng, n=200, d=3):
    """Features, labels and groups with every cell populated."""
    X = rng.normal(size=(n, d))
    y = rng.choice([-1, 1], size=n)
    z = rng.integers(0, 2, size=n)
    k = min(n, 4)
    y[:k] = [-1, -1, 1, 1][:k]
    z[:k] = [0, 1, 0, 1][:k]
    return Dataset(X, y, z)


def generic_instance(seed, depth, n=40, d=3):
    """A model at a generic point (random biases keep ReLUs off their kinks) and a batch."""
    rng = np.random.default_rng(seed)
    m = MlpScorer.init(depth, d, seed, init_std=0.5).train()
    for k in range(1, len(m.params), 2):
        m.params[k] = rng.normal(0.0, 0.3, m.params[k].shape)
    X = rng.normal(size=(n, d))
    y = rng.choice([-1, 1], n)
    z = rng.integers(0, 2, n)
    y[:4], z[:4] = [-1, -1, 1, 1], [0, 1, 0, 1]
    return m, X, y, z
