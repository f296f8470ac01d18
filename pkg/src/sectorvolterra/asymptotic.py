"""Log-power asymptotic approximation  x^N(t) = sum_j x_j(ln t) t^j.

Each coefficient solves a difference equation in z = ln t,

    D_j[x_j](z) = K_n(0,0) x_j(z) + sum_i beta_i x_j(z + a_i) = M_j(z),

where beta_i = alpha_i^(1+j) (K_i(0,0) - K_{i+1}(0,0)), a_i = ln alpha_i and
M_j collects what x_0 .. x_{j-1} leave at order t^j in the differentiated
equation.  In the monomial basis D_j is upper triangular with L(j) on the
diagonal, so at a root of L the lowest r_j powers of z stay free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .charteq import CharacteristicReport, jump_weights, log_breakpoints
from .errors import InconsistentSystem
from .logpoly import LogPoly, ZPoly, integrate_segment
from .problem import UniPoly, ValidatedProblem, kernel_dt, validate

INCONSISTENT_REL = 1e-8


def _unipoly_to_logpoly(poly: UniPoly) -> LogPoly:
    return LogPoly({(k, 0): c for k, c in enumerate(poly.coeffs)})


def differentiated_lhs(problem: ValidatedProblem, x: LogPoly) -> LogPoly:
    """d/dt of sum_i int_{alpha_{i-1} t}^{alpha_i t} K_i(t,s) x(s) ds, via the Leibniz rule.

    Boundary terms alpha K_i(t, alpha t) x(alpha t) use exact dilation of x;
    the remaining part integrates dK_i/dt against x over each sector.
    """
    parts = []
    for kern, lo, hi in problem.sectors:
        parts.append(_unipoly_to_logpoly(kern.along_ray(hi)) * x.dilate(hi) * hi)
        if lo > 0.0:
            parts.append(_unipoly_to_logpoly(kern.along_ray(lo)) * x.dilate(lo) * (-lo))
        dk = kernel_dt(kern)
        if not dk.is_zero:
            parts.append(integrate_segment(dk, x, lo, hi))
    return LogPoly.sum(parts)


def partial_sum(coeffs: Sequence[ZPoly]) -> LogPoly:
    return LogPoly.sum(c.to_logpoly(j) for j, c in enumerate(coeffs))


def build_Mj(problem: ValidatedProblem, prior: Sequence[ZPoly], j: int) -> ZPoly:
    """Right-hand side M_j(z) of the j-th difference equation."""
    if len(prior) != j:
        raise ValueError(f"need exactly x_0..x_{j - 1} ({j} coefficients), got {len(prior)}")
    fprime = _unipoly_to_logpoly(problem.rhs.derivative())
    residual = LogPoly.sum((fprime, -differentiated_lhs(problem, partial_sum(prior))))
    return residual.power_coefficient(j)


def difference_operator(problem: ValidatedProblem, j: int, deg: int) -> np.ndarray:
    """Matrix of D_j on coefficient vectors (c_0, ..., c_deg) of sum c_k z^k."""
    if deg < 0:
        raise ValueError("deg must be nonnegative")
    kn = problem.kernels[-1].at_origin()
    betas = jump_weights(problem, j)
    shifts = log_breakpoints(problem)
    D = np.zeros((deg + 1, deg + 1))
    for k in range(deg + 1):
        D[k, k] += kn
        for b, a in zip(betas, shifts):
            for r in range(k + 1):
                D[r, k] += b * math.comb(k, r) * a ** (k - r)
    return D


def solve_coeff(problem: ValidatedProblem, j: int, M_j: ZPoly, r_j: int,
                free: Sequence[float] = ()) -> ZPoly:
    """Solve D_j[x_j] = M_j by undetermined coefficients from the top power down.

    With r_j >= 1 the coefficients of z^0 .. z^(r_j - 1) are taken from ``free``.
    """
    if len(free) != r_j:
        raise ValueError(f"expected {r_j} free value(s) for j={j}, got {len(free)}")
    deg = M_j.degree + r_j
    if deg < 0:
        return ZPoly()
    D = difference_operator(problem, j, deg)
    rhs = np.array([M_j.coeff(k) for k in range(deg + 1)])
    c = np.zeros(deg + 1)
    c[:r_j] = free
    # D[z^k] has degree k - r_j; match z^(k - r_j) for k = deg .. r_j
    for k in range(deg, r_j - 1, -1):
        row = k - r_j
        acc = rhs[row] - D[row, k + 1:] @ c[k + 1:]
        if D[row, k] == 0.0:
            raise InconsistentSystem(f"x_{j}: zero pivot for z^{k}; r_{j}={r_j} is likely wrong")
        c[k] = acc / D[row, k]
    resid = np.max(np.abs(D @ c - rhs))
    ref = max(np.max(np.abs(rhs)), np.max(np.abs(D)) * np.max(np.abs(c)))
    if not np.isfinite(resid) or resid > INCONSISTENT_REL * max(ref, np.finfo(float).tiny):
        raise InconsistentSystem(
            f"x_{j}: back-substitution residual {resid:.3e} exceeds tolerance "
            f"(reference {ref:.3e}); multiplicity r_{j}={r_j} is likely wrong")
    return ZPoly(c)


@dataclass(frozen=True)
class AsymptoticSolution:
    N: int
    coeffs: tuple[ZPoly, ...]
    free_slots: tuple[tuple[int, int], ...] = ()
    assigned: dict[tuple[int, int], float] = field(default_factory=dict)

    def as_logpoly(self) -> LogPoly:
        return partial_sum(self.coeffs)

    def __call__(self, t):
        return self.as_logpoly()(t)

    def lines(self) -> list[str]:
        return [f"x_{j}(z) = {c.render()}" for j, c in enumerate(self.coeffs)]

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "coefficients": [
                {"j": j, "z_power": k, "value": v}
                for j, c in enumerate(self.coeffs) for k, v in enumerate(c.coeffs)
            ],
            "free_constants": [
                {"j": j, "i": i, "value": self.assigned[(j, i)]} for j, i in self.free_slots
            ],
            "rendered": self.lines(),
        }


def build_asymptotic(problem: ValidatedProblem, report: CharacteristicReport, N: int | None = None,
                     constants: Sequence[float] | None = None) -> AsymptoticSolution:
    """Run the j = 0..N recursion, threading free constants into root slots in (j, i) order."""
    problem = validate(problem)
    N = report.N if N is None else N
    if N > report.N:
        raise ValueError(f"characteristic report covers j <= {report.N}, asked for N={N}")
    slots = tuple((j, i) for j in report.roots if j <= N for i in range(report.multiplicities[j]))
    if constants is None:
        constants = [0.0] * len(slots)
    if len(constants) != len(slots):
        raise ValueError(f"expected {len(slots)} free constant(s), got {len(constants)}")
    assigned = {slot: float(v) for slot, v in zip(slots, constants)}

    coeffs: list[ZPoly] = []
    for j in range(N + 1):
        M_j = build_Mj(problem, coeffs, j)
        r_j = report.multiplicities.get(j, 0)
        free = [assigned[(j, i)] for i in range(r_j)]
        coeffs.append(solve_coeff(problem, j, M_j, r_j, free))
    return AsymptoticSolution(N, tuple(coeffs), slots, assigned)
