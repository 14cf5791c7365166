import numpy as np
import pytest

from sparse_unitary import SparseMatrix, random_sparse_unitary

X = SparseMatrix(2, [0, 1], [1, 0], [1, 1])
Z = SparseMatrix(2, [0, 1], [0, 1], [1, -1])


def random_state(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[(8, 1, 0), (16, 2, 1), (32, 3, 2), (64, 4, 3)],
                ids=lambda p: f"N{p[0]}-d{p[1]}")
def small_unitary(request):
    n, d, seed = request.param
    return random_sparse_unitary(n, d, seed)


ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(ok, detail)``."""
    lines = request.config.stash[ACCEPTANCE]

    def record(ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'} {request.node.name}: {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[ACCEPTANCE]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
