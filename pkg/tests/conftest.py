import itertools
import math
from pathlib import Path

import numpy as np
import pytest

from primalbp.model import build_model, energy, zero_model
from primalbp.modelfile import read_model

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def slow_log_partition(model):
    """Pure-Python enumeration with per-assignment energies; independent of the vectorized oracle."""
    energies = [energy(model, x) for x in itertools.product(*(range(d) for d in model.domain_sizes))]
    top = max(energies)
    return top + math.log(math.fsum(math.exp(e - top) for e in energies))


def slow_variable_marginal(model, v):
    logz = slow_log_partition(model)
    out = np.zeros(model.domain_sizes[v])
    for x in itertools.product(*(range(d) for d in model.domain_sizes)):
        out[x[v]] += math.exp(energy(model, x) - logz)
    return out


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def t1():
    return zero_model((2, 2), [(0, 1)])


@pytest.fixture
def t2():
    return zero_model((3,), [])


@pytest.fixture
def l1():
    return zero_model((2, 2, 2), [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def t1_bumped():
    """T1 with theta_edge = 1 at x = (0, 0): p^a proportional to (e, 1, 1, 1)."""
    return build_model(2, (2, 2), [(0, 1)], [[0, 0], [0, 0]], [[1, 0, 0, 0]])


@pytest.fixture
def grid3x3():
    return read_model(DATA / "grid3x3.gl")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
