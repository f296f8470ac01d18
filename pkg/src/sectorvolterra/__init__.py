"""Volterra equations of the first kind with kernels defined piecewise on sectors
alpha_{i-1} t <= s < alpha_i t, solved as a log-power asymptotic expansion plus
a numerically computed tail."""

from .asymptotic import AsymptoticSolution, build_asymptotic, build_Mj, difference_operator, solve_coeff
from .charteq import CharacteristicReport, analyze, eval_L, multiplicity, natural_roots
from .errors import VolterraError
from .logpoly import LogPoly, ZPoly, antiderivative_power_log, integrate_segment, lp_dt, lp_eval, lp_ring
from .problem import (
    BivariatePoly,
    Problem,
    RegularizationParams,
    UniPoly,
    ValidatedProblem,
    kernel_dt,
    select_N,
    validate,
)
from .tail import Solution, TailProblem, TailSolution, compute_g, solve_tail, solve_tail_quadrature
from .verify import ResidualReport, eval_solution, make_manufactured, residual, solve

__version__ = "0.1.0"
