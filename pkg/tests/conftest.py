import numpy as np
import pytest

from moapg.bench import BenchmarkSpec, make_problem
from moapg.core import NonsmoothTerm, Problem, QuadraticObjective, SolverConfig, admissible_s0_bound

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def bench_problem(name, l1=0.0, n=2):
    return make_problem(BenchmarkSpec(name, n=n, l1_weight=l1))


def config_for(problem, alpha=4.0, frac=0.99, **kw):
    s0 = frac * admissible_s0_bound(alpha, problem.lipschitz_global)
    return SolverConfig(alpha=alpha, s0=s0, **kw)


def single_quadratic(diag, b=None, l1=0.0):
    diag = np.asarray(diag, dtype=float)
    g = NonsmoothTerm.l1(l1) if l1 else NonsmoothTerm.zero()
    return Problem(len(diag), [QuadraticObjective(np.diag(diag), b)], [g])


@pytest.fixture
def bk1():
    return bench_problem("BK1")


@pytest.fixture
def bk1_l1():
    return bench_problem("BK1", 0.1)
