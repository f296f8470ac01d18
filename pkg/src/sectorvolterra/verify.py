"""End-to-end evaluation, residual checks and manufactured problems."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .asymptotic import build_asymptotic
from .charteq import CharacteristicReport, analyze
from .errors import OutOfDomain, ResidualLogTerms
from .logpoly import SNAP_REL, LogPoly, integrate_segment
from .problem import (
    BivariatePoly,
    Problem,
    RegularizationParams,
    UniPoly,
    contraction_factor,
    select_N,
    validate,
)
from .tail import Solution, compute_g, solve_tail

DYADIC_LEVELS = 40


@dataclass(frozen=True)
class ResidualReport:
    samples: tuple[tuple[float, float], ...]
    quad_order: int

    @property
    def max_abs(self) -> float:
        return max((abs(r) for _, r in self.samples), default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "residual"])
        for t, r in self.samples:
            w.writerow([f"{t:.17g}", f"{r:.17g}"])
        return buf.getvalue()


def eval_solution(sol: Solution, t):
    return sol(t)


def _gauss_nodes(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return (half * x + 0.5 * (a + b)).ravel(), (half * w).ravel()


def sector_edges(lo: float, hi: float, dyadic: bool) -> np.ndarray:
    """Subinterval edges; the sector touching 0 is split geometrically toward 0."""
    if not dyadic:
        return np.array([lo, hi])
    inner = hi * 2.0 ** -np.arange(DYADIC_LEVELS - 1, -1, -1)
    return np.concatenate(([0.0], inner))


def residual(problem: Problem, sol, ts: Sequence[float], quad_order: int = 32) -> ResidualReport:
    """r(t) = int_0^t K(t,s) x(s) ds - f(t) with Gauss-Legendre per sector.

    ``sol`` is anything callable on arrays of s > 0 (a Solution, a LogPoly).
    """
    problem = validate(problem)
    samples = []
    for t in ts:
        t = float(t)
        if not 0.0 < t <= problem.horizon * (1 + 1e-12):
            raise OutOfDomain(f"residual sample t={t} outside (0, {problem.horizon}]")
        pieces = []
        for kern, lo, hi in problem.sectors:
            s, w = _gauss_nodes(sector_edges(lo * t, hi * t, lo == 0.0), quad_order)
            pieces.append(float(np.sum(w * kern(t, s) * np.asarray(sol(s)))))
        samples.append((t, math.fsum(pieces) - float(problem.rhs(t))))
    return ResidualReport(tuple(samples), quad_order)


def make_manufactured(kernels: Sequence[BivariatePoly], alphas: Sequence[float],
                      x_target: LogPoly, T: float) -> tuple[Problem, LogPoly]:
    """Choose x, compute f = int_0^t K x ds exactly; f must come out polynomial."""
    a = (0.0, *alphas, 1.0)
    parts = [integrate_segment(k, x_target, a[i], a[i + 1]) for i, k in enumerate(kernels)]
    f = LogPoly.sum(parts)
    ref = max((p.max_abs_coeff() for p in parts), default=0.0)
    logs = {key: c for key, c in f.terms.items() if key[1] > 0}
    if logs:
        key, c = max(logs.items(), key=lambda kv: abs(kv[1]))
        if abs(c) > SNAP_REL * ref:
            raise ResidualLogTerms(
                f"f keeps term {c:.3e} * t^{key[0]} ln(t)^{key[1]}; x_target's log part "
                "is not a homogeneous solution")
    deg = max((p for p, _ in f.terms), default=0)
    coeffs = [0.0] * (deg + 1)
    for (p, m), c in f.terms.items():
        if m == 0:
            coeffs[p] = c
    coeffs[0] = 0.0  # integrals start at t^1
    problem = Problem(tuple(alphas), tuple(kernels), UniPoly(coeffs), T)
    return validate(problem), x_target


def solve(problem: Problem, N: int | None = None, q_max: float = 0.5,
          constants: Sequence[float] | None = None, h: float | None = None,
          l: float = 1.0, tol: float = 1e-10, max_iter: int = 500,
          ) -> tuple[Solution, CharacteristicReport, RegularizationParams]:
    """Full pipeline: select N, analyze, build x^N, regularize, solve for the tail."""
    problem = validate(problem)
    params = select_N(problem, q_max)
    if N is not None and N != params.N:
        q = contraction_factor(problem, N, params.t_grid_size)
        if q >= 1.0:
            raise ValueError(f"N={N} gives contraction factor q={q:.4g} >= 1")
        params = RegularizationParams(N, max(q, 0.0), params.t_grid_size)
    report = analyze(problem, params)
    asym = build_asymptotic(problem, report, params.N, constants)
    tp = compute_g(problem, asym)
    tail = solve_tail(tp, h=h, l=l, tol=tol, max_iter=max_iter)
    return Solution(asym, tail, params.N, problem.horizon), report, params
