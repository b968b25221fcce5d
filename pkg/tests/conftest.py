import numpy as np
import pytest

from cubicderiv.algebra import build_triangular_example, matrix_algebra, scalar_algebra, regular_bimodule
from cubicderiv.probes import make_probes


@pytest.fixture(scope="session")
def triangular():
    """(T, T-dual, D) over real 2x2 matrices with a seeded G0."""
    return build_triangular_example(matrix_algebra(2, real=True), seed=1)


@pytest.fixture(scope="session")
def tri_probes(triangular):
    tri, _, _ = triangular
    return make_probes(tri, 100, seed=3)


@pytest.fixture(scope="session")
def scalar():
    alg = scalar_algebra()
    return alg, regular_bimodule(alg)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = {}


@pytest.fixture
def acceptance(request):
    """record(n, ok, detail): one summary line per acceptance criterion."""
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(n, ok, detail):
        lines[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
