import math

import pytest

from sectorvolterra import BivariatePoly, LogPoly, Problem, make_manufactured, validate

LN2 = math.log(2.0)


def paper_problem(f=(0.0, 1.0)):
    return Problem.from_dict({
        "alphas": [0.5],
        "kernels": [[[0, 0, 1.0]], [[0, 0, -1.0]]],
        "f": list(f),
        "T": 1.0,
    })


def paper_solution(c):
    """c - ln t / ln 2."""
    return LogPoly({(0, 0): c, (0, 1): -1.0 / LN2})


def double_root_kernels():
    """K(0,0) = (1, -3, 1) on alpha = (1/4, 1/2).

    From L(0) = 0 and S_1 = 0 with K_3 = 1: the jumps d_i = K_i - K_{i+1}
    solve  d1/4 + d2/2 = -1,  (d1/4) ln(1/4) + (d2/2) ln(1/2) = 0,
    i.e. d1 = 4, d2 = -4.
    """
    return [BivariatePoly.constant(1.0), BivariatePoly.constant(-3.0),
            BivariatePoly.constant(1.0)], [0.25, 0.5]


@pytest.fixture
def paper():
    return validate(paper_problem())


@pytest.fixture
def single():
    return validate(Problem.from_dict(
        {"alphas": [], "kernels": [[[0, 0, 1.0]]], "f": [0.0, 1.0], "T": 1.0}))


@pytest.fixture
def regular():
    problem, target = make_manufactured(
        [BivariatePoly.constant(1.0), BivariatePoly.constant(2.0)], [0.5],
        LogPoly({(0, 0): 1.0, (1, 0): -1.0}), 1.0)
    return problem


@pytest.fixture
def double_root():
    kernels, alphas = double_root_kernels()
    return validate(Problem(tuple(alphas), tuple(kernels), paper_problem().rhs, 1.0))


@pytest.fixture
def tail_fixture():
    """Paper example plus t^2; with N = 1 the true tail is u(t) = t."""
    x = paper_solution(2.0) + LogPoly.monomial(2)
    problem, _ = make_manufactured(
        [BivariatePoly.constant(1.0), BivariatePoly.constant(-1.0)], [0.5], x, 1.0)
    return problem


@pytest.fixture
def curved_tail_fixture():
    """Paper example plus t^3; with N = 1 the true tail is u(t) = t^2."""
    x = paper_solution(2.0) + LogPoly.monomial(3)
    problem, _ = make_manufactured(
        [BivariatePoly.constant(1.0), BivariatePoly.constant(-1.0)], [0.5], x, 1.0)
    return problem


@pytest.fixture
def variable_kernel_fixture():
    """t-dependent kernels, x = 1 - s + s^3; with N = 1 the true tail is u(t) = t^2."""
    kernels = [BivariatePoly({(0, 0): 1.0, (1, 0): 1.0}),
               BivariatePoly({(0, 0): 2.0, (0, 1): 1.0})]
    x = LogPoly({(0, 0): 1.0, (1, 0): -1.0, (3, 0): 1.0})
    problem, _ = make_manufactured(kernels, [0.5], x, 1.0)
    return problem


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in sorted(test_acceptance.RESULTS.items()):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
