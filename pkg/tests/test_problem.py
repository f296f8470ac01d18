import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sectorvolterra import BivariatePoly, Problem, UniPoly, kernel_dt, select_N, validate
from sectorvolterra.errors import (
    BreakpointOrder,
    DegenerateDiagonal,
    DegreeCapExceeded,
    KernelCountMismatch,
    NonzeroF0,
)
from sectorvolterra.problem import contraction_factor

from conftest import paper_problem


def make(alphas, kernels, f=(0.0, 1.0), T=1.0):
    return Problem(tuple(alphas), tuple(kernels), UniPoly(f), T)


const = BivariatePoly.constant


def test_paper_example_is_valid():
    vp = validate(paper_problem())
    assert vp.n == 2
    assert vp.alphas == (0.0, 0.5, 1.0)


def test_validate_idempotent(paper):
    assert validate(paper) is paper


@pytest.mark.parametrize("alphas", [(0.7, 0.3), (0.5, 0.5), (0.0,), (1.0,), (-0.2,)])
def test_breakpoint_order(alphas):
    kernels = [const(1.0)] * (len(alphas) + 1)
    with pytest.raises(BreakpointOrder):
        validate(make(alphas, kernels))


def test_nonzero_f0():
    with pytest.raises(NonzeroF0):
        validate(paper_problem(f=(1.0, 1.0)))


def test_degenerate_diagonal():
    k2 = BivariatePoly({(1, 0): 1.0, (0, 0): -0.5})  # K_2(t,t) = t - 1/2
    with pytest.raises(DegenerateDiagonal):
        validate(make([0.5], [const(1.0), k2]))


def test_diagonal_zero_polynomial():
    with pytest.raises(DegenerateDiagonal):
        validate(make([0.5], [const(1.0), BivariatePoly()]))


def test_kernel_count():
    with pytest.raises(KernelCountMismatch):
        validate(make([0.5], [const(1.0)]))


def test_degree_cap():
    with pytest.raises(DegreeCapExceeded):
        BivariatePoly({(10, 7): 1.0})


def test_json_round_trip():
    data = {"alphas": [0.5], "kernels": [[[0, 0, 1.0]], [[0, 0, -1.0]]], "f": [0.0, 1.0], "T": 1.0}
    assert Problem.from_dict(data).to_dict() == data


@pytest.mark.parametrize("q_max, N", [(0.5, 1), (0.25, 2)])
def test_select_N_paper(paper, q_max, N):
    params = select_N(paper, q_max)
    # sum over the rays is 1 + 2 * (1/2)^(1+N), so q(N) = 2^-N
    assert params.N == N
    assert params.q == pytest.approx(2.0 ** -N, abs=1e-15)


def test_select_N_single_sector(single):
    params = select_N(single, 0.5)
    assert params.N == 0 and params.q == 0.0


def test_select_N_rejects_bad_qmax(paper):
    with pytest.raises(ValueError):
        select_N(paper, 1.0)


@pytest.mark.parametrize("terms, expected", [
    ({(1, 2): 1.0}, {(0, 2): 1.0}),
    ({(0, 0): 1.0}, {}),
    ({(2, 0): 3.0, (1, 1): 2.0}, {(1, 0): 6.0, (0, 1): 2.0}),
])
def test_kernel_dt(terms, expected):
    assert kernel_dt(BivariatePoly(terms)).terms == expected


def test_along_ray():
    k = BivariatePoly({(1, 1): 2.0, (0, 2): 1.0, (1, 0): 3.0})
    t = np.linspace(0, 2, 7)
    assert np.allclose(k.along_ray(0.3)(t), k(t, 0.3 * t), rtol=0, atol=1e-14)


# -- properties ---------------------------------------------------------------

coef = st.floats(-5, 5, allow_nan=False).filter(lambda c: abs(c) > 1e-3)


@st.composite
def problems(draw):
    n = draw(st.integers(1, 4))
    cuts = sorted(set(draw(st.lists(st.floats(0.05, 0.95), min_size=n - 1, max_size=n - 1))))
    if len(cuts) != n - 1 or any(b - a < 1e-3 for a, b in zip(cuts, cuts[1:])):
        cuts = list(np.linspace(0, 1, n + 1)[1:-1])
    kernels = []
    for _ in range(n):
        terms = draw(st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), coef, max_size=3))
        kernels.append(BivariatePoly(terms))
    # keep the diagonal K_n(t,t) bounded away from zero
    kernels[-1] = BivariatePoly({(0, 0): draw(st.sampled_from([-4.0, 3.0, 10.0]))})
    return validate(make(cuts, kernels, T=draw(st.floats(0.5, 2.0))))


@settings(max_examples=40, deadline=None)
@given(problems())
def test_contraction_factor_monotone(problem):
    qs = [contraction_factor(problem, N, 201) for N in range(12)]
    assert all(b <= a + 1e-12 for a, b in zip(qs, qs[1:]))


@settings(max_examples=40, deadline=None)
@given(problems())
def test_validate_idempotent_property(problem):
    assert validate(problem) is problem


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coef, min_size=1, max_size=5),
       st.floats(0.0, 1.5), st.floats(-1.0, 1.0))
def test_kernel_dt_integrates_back(terms, x, s):
    k = BivariatePoly(terms)
    dk = kernel_dt(k)
    # exact integral of dk in t over [0, x]
    integral = sum(c * x ** (p + 1) / (p + 1) * s**q for (p, q), c in dk.terms.items())
    assert integral == pytest.approx(k(x, s) - k(0.0, s), abs=1e-12 * (1 + abs(k(x, s))))
