"""Characteristic equation L(j) and root multiplicities."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .errors import MultiplicityOverflow
from .problem import RegularizationParams, ValidatedProblem, validate

log = logging.getLogger(__name__)

ROOT_TOL = 1e-10
# |L(j)| below this multiple of the root threshold is flagged as a near root
NEAR_ROOT_FACTOR = 1e4


@dataclass(frozen=True)
class CharacteristicReport:
    N: int
    L_values: tuple[float, ...]
    roots: tuple[int, ...]
    multiplicities: dict[int, int]
    free_constant_count: int
    log_breakpoints: tuple[float, ...]
    near_roots: dict[int, float] = field(default_factory=dict)

    @property
    def regular(self) -> bool:
        return not self.roots

    def to_dict(self) -> dict:
        return {
            "roots": list(self.roots),
            "multiplicities": {str(j): r for j, r in self.multiplicities.items()},
            "p": self.free_constant_count,
            "regular": self.regular,
            "L": list(self.L_values),
            "N": self.N,
            "log_breakpoints": list(self.log_breakpoints),
            "near_roots": {str(j): v for j, v in self.near_roots.items()},
            "root_tol": ROOT_TOL,
        }


def origin_values(problem: ValidatedProblem) -> list[float]:
    return [k.at_origin() for k in problem.kernels]


def kernel_scale(problem: ValidatedProblem) -> float:
    """Sum of |K_i(0,0)|, the reference magnitude for "zero" tests."""
    return math.fsum(abs(k) for k in origin_values(problem))


def jump_weights(problem: ValidatedProblem, j: int) -> list[float]:
    """beta_i = alpha_i^(1+j) (K_i(0,0) - K_{i+1}(0,0)) for i = 1..n-1."""
    k0 = origin_values(problem)
    return [a ** (1 + j) * (k0[i] - k0[i + 1]) for i, a in enumerate(problem.breakpoints)]


def log_breakpoints(problem: ValidatedProblem) -> list[float]:
    return [math.log(a) for a in problem.breakpoints]


def eval_L(problem: ValidatedProblem, j: int) -> float:
    a = problem.alphas
    k0 = origin_values(problem)
    return math.fsum(k0[i - 1] * (a[i] ** (1 + j) - a[i - 1] ** (1 + j))
                     for i in range(1, problem.n + 1))


def _is_zero(value: float, scale: float) -> bool:
    return abs(value) <= ROOT_TOL * scale


def natural_roots(problem: ValidatedProblem, N: int) -> list[int]:
    scale = kernel_scale(problem)
    return [j for j in range(N + 1) if _is_zero(eval_L(problem, j), scale)]


def shifted_moment(problem: ValidatedProblem, j: int, l: int) -> float:
    """S_l = sum_i beta_i (ln alpha_i)^l."""
    return math.fsum(b * a**l for b, a in zip(jump_weights(problem, j), log_breakpoints(problem)))


def multiplicity(problem: ValidatedProblem, j: int) -> int:
    """Multiplicity r_j of lambda = 1 as a root of the j-th lambda-equation."""
    scale = kernel_scale(problem)
    for l in range(1, problem.n):
        if not _is_zero(shifted_moment(problem, j, l), scale):
            return l
    raise MultiplicityOverflow(
        f"S_1..S_{problem.n - 1} all vanish at j={j}; kernels violate K_n(0,0) != 0")


def analyze(problem: ValidatedProblem, params: RegularizationParams | int) -> CharacteristicReport:
    problem = validate(problem)
    N = params.N if isinstance(params, RegularizationParams) else int(params)
    scale = kernel_scale(problem)
    L = [eval_L(problem, j) for j in range(N + 1)]
    roots = [j for j, v in enumerate(L) if _is_zero(v, scale)]
    near = {j: abs(v) for j, v in enumerate(L)
            if j not in roots and abs(v) <= NEAR_ROOT_FACTOR * ROOT_TOL * scale}
    for j, v in near.items():
        log.warning("L(%d) = %.3e is close to zero but above the root threshold", j, v)
    mult = {j: multiplicity(problem, j) for j in roots}
    return CharacteristicReport(
        N=N,
        L_values=tuple(L),
        roots=tuple(roots),
        multiplicities=mult,
        free_constant_count=sum(mult.values()),
        log_breakpoints=tuple(log_breakpoints(problem)),
        near_roots=near,
    )
