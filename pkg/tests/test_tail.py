import numpy as np
import pytest

from sectorvolterra import (
    LogPoly,
    Solution,
    TailProblem,
    analyze,
    build_asymptotic,
    compute_g,
    solve_tail,
    solve_tail_quadrature,
    validate,
)
from sectorvolterra.asymptotic import AsymptoticSolution
from sectorvolterra.errors import AsymptoticInconsistent, NoConvergence
from sectorvolterra.logpoly import ZPoly, lp_dt

from conftest import LN2, paper_problem


def asymptotics(problem, N, constants=None):
    return build_asymptotic(problem, analyze(problem, N), N, constants)


def tail_problem(problem, N, constants=None):
    return compute_g(problem, asymptotics(problem, N, constants))


@pytest.mark.parametrize("c", [0.0, 2.0, -3.5])
def test_g_vanishes_for_exact_paper_solution(paper, c):
    tp = tail_problem(paper, 1, [c])
    assert tp.g.is_zero and tp.g_prime.is_zero


def test_g_single_sector(single):
    tp = tail_problem(single, 0)
    assert tp.g.is_zero


def test_g_linear_in_f(paper):
    perturbed = validate(paper_problem(f=(0.0, 1.0, 0.0, 1.0)))
    xN = asymptotics(paper, 1, [2.0])
    tp = compute_g(perturbed, xN)
    assert tp.g.terms == pytest.approx({(3, 0): 1.0})
    assert tp.g_prime.terms == pytest.approx({(2, 0): 3.0})


def test_g_rejects_wrong_asymptotics(paper):
    wrong = AsymptoticSolution(1, (ZPoly((1.0,)), ZPoly()))
    with pytest.raises(AsymptoticInconsistent):
        compute_g(paper, wrong)


def test_zero_rhs_converges_in_one_sweep(paper):
    tp = tail_problem(paper, 2, [2.0])
    sol = solve_tail(tp, h=1e-2)
    assert sol.iterations == 1 and sol.converged
    assert not np.any(sol.values)


def test_manufactured_tail(tail_fixture):
    tp = tail_problem(tail_fixture, 1, [2.0])
    sol = solve_tail(tp, h=1e-3)
    assert sol.converged and sol.iterations <= 200
    assert sol.values[0] == 0.0
    assert np.max(np.abs(sol.values - sol.grid)) <= 5e-3


def test_contraction_diagnostics(tail_fixture, curved_tail_fixture, variable_kernel_fixture):
    for problem in (tail_fixture, curved_tail_fixture, variable_kernel_fixture):
        constants = None if analyze(problem, 1).regular else [2.0]
        sol = solve_tail(tail_problem(problem, 1, constants), h=2e-3)
        norms = sol.diff_norms
        assert all(b <= a for a, b in zip(norms[3:], norms[4:]))
        assert sol.contraction_estimate <= 0.95


def test_variable_kernel_tail(variable_kernel_fixture):
    # exercises the dK/dt sector integrals; true tail u = t^2
    sol = solve_tail(tail_problem(variable_kernel_fixture, 1), h=1e-3)
    assert np.max(np.abs(sol.values - sol.grid**2)) <= 1e-6


def test_second_order_on_curved_tail(curved_tail_fixture):
    tp = tail_problem(curved_tail_fixture, 1, [2.0])
    errs = [np.max(np.abs(s.values - s.grid**2)) for s in (solve_tail(tp, h=h) for h in (2e-3, 1e-3))]
    assert errs[1] <= errs[0] / 3.5


def test_linearity_in_g(paper):
    vp = validate(paper)
    g1 = LogPoly({(3, 0): -0.25})
    g2 = LogPoly({(4, 0): 1.0, (3, 1): 0.5})
    tol = 1e-10
    def run(g):
        return solve_tail(TailProblem(g, lp_dt(g), 1, vp), h=2e-3, tol=tol)
    u1, u2, u12 = run(g1), run(g2), run(g1 + g2)
    assert np.max(np.abs(u12.values - u1.values - u2.values)) <= 10 * tol


def test_tail_vanishes_at_first_node(tail_fixture, variable_kernel_fixture):
    for problem, c in ((tail_fixture, [2.0]), (variable_kernel_fixture, None)):
        sol = solve_tail(tail_problem(problem, 1, c), h=1e-3)
        top = np.max(np.abs(sol.values))
        assert top > 0 and abs(sol.values[1]) <= 1e-2 * top


def test_no_convergence(tail_fixture):
    tp = tail_problem(tail_fixture, 1, [2.0])
    with pytest.raises(NoConvergence):
        solve_tail(tp, h=1e-2, max_iter=2)


def test_step_must_divide_horizon(tail_fixture):
    with pytest.raises(ValueError):
        solve_tail(tail_problem(tail_fixture, 1, [2.0]), h=0.3)


def test_quadrature_zero_rhs(paper):
    sol = solve_tail_quadrature(tail_problem(paper, 1, [2.0]), h=1e-2)
    assert not np.any(sol.values)


def test_quadrature_agrees_with_iteration(tail_fixture):
    tp = tail_problem(tail_fixture, 1, [2.0])
    a = solve_tail(tp, h=1e-3)
    b = solve_tail_quadrature(tp, h=1e-3)
    assert np.max(np.abs(a.values - b.values)) <= 1e-2


def test_quadrature_richardson(tail_fixture):
    tp = tail_problem(tail_fixture, 1, [2.0])
    errs = [np.max(np.abs(s.values - s.grid)) for s in
            (solve_tail_quadrature(tp, h=h) for h in (2e-3, 1e-3))]
    ratio = errs[0] / errs[1]
    assert 1.8 <= ratio <= 4.5


def test_cross_method_gap_shrinks(variable_kernel_fixture):
    tp = tail_problem(variable_kernel_fixture, 1)
    gaps = []
    for h in (4e-3, 2e-3, 1e-3):
        gaps.append(np.max(np.abs(solve_tail(tp, h=h).values - solve_tail_quadrature(tp, h=h).values)))
    assert gaps[0] > gaps[1] > gaps[2]


def test_solution_evaluation(tail_fixture):
    tp = tail_problem(tail_fixture, 1, [2.0])
    asym = asymptotics(tail_fixture, 1, [2.0])
    sol = Solution(asym, solve_tail(tp, h=1e-3), 1, 1.0)
    t = np.geomspace(0.01, 1, 30)
    exact = 2 - np.log(t) / LN2 + t**2
    assert np.max(np.abs(sol(t) - exact)) <= 1e-6
