"""Problem definition, validation and choice of the regularization order.

The equation is

    sum_i  int_{alpha_{i-1} t}^{alpha_i t} K_i(t, s) x(s) ds = f(t),   0 < t <= T

with 0 = alpha_0 < alpha_1 < ... < alpha_n = 1, polynomial kernels K_i and a
polynomial right-hand side with f(0) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BreakpointOrder,
    DegenerateDiagonal,
    DegreeCapExceeded,
    KernelCountMismatch,
    NoFeasibleN,
    NonzeroF0,
    ProblemSchemaError,
)

DEGREE_CAP = 16
DIAGONAL_GRID = 1001
DIAGONAL_REL_FLOOR = 1e-9
N_CAP = 64


@dataclass(frozen=True)
class BivariatePoly:
    """Polynomial sum c * t**p * s**q stored as {(p, q): c}."""

    terms: Mapping[tuple[int, int], float] = field(default_factory=dict)
    degree_cap: int = DEGREE_CAP

    def __post_init__(self):
        clean: dict[tuple[int, int], float] = {}
        for (p, q), c in dict(self.terms).items():
            p, q, c = int(p), int(q), float(c)
            if p < 0 or q < 0:
                raise ValueError(f"negative exponent in kernel term ({p}, {q})")
            clean[(p, q)] = clean.get((p, q), 0.0) + c
        clean = {k: v for k, v in sorted(clean.items()) if v != 0.0}
        if clean and max(p + q for p, q in clean) > self.degree_cap:
            raise DegreeCapExceeded(
                f"kernel total degree exceeds cap {self.degree_cap}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[float]]) -> "BivariatePoly":
        terms: dict[tuple[int, int], float] = {}
        for triple in triples:
            if len(triple) != 3:
                raise ProblemSchemaError(f"kernel term must be [p, q, c], got {triple!r}")
            p, q, c = triple
            if int(p) != p or int(q) != q:
                raise ProblemSchemaError(f"kernel exponents must be integers, got {triple!r}")
            terms[(int(p), int(q))] = terms.get((int(p), int(q)), 0.0) + float(c)
        return cls(terms)

    @classmethod
    def constant(cls, c: float) -> "BivariatePoly":
        return cls({(0, 0): c})

    def to_triples(self) -> list[list]:
        return [[p, q, c] for (p, q), c in self.terms.items()]

    def __call__(self, t, s):
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        out = np.zeros(np.broadcast(t, s).shape)
        for (p, q), c in self.terms.items():
            out = out + c * t**p * s**q
        return out if out.ndim else float(out)

    def at_origin(self) -> float:
        return self.terms.get((0, 0), 0.0)

    def along_ray(self, alpha: float) -> "UniPoly":
        """K(t, alpha*t) as a polynomial in t."""
        deg = max((p + q for p, q in self.terms), default=0)
        coeffs = [0.0] * (deg + 1)
        for (p, q), c in self.terms.items():
            coeffs[p + q] += c * alpha**q
        return UniPoly(coeffs)

    def dt(self) -> "BivariatePoly":
        return kernel_dt(self)

    def scale(self, factor: float) -> "BivariatePoly":
        return BivariatePoly({k: factor * c for k, c in self.terms.items()})

    @property
    def is_zero(self) -> bool:
        return not self.terms


@dataclass(frozen=True)
class UniPoly:
    """Dense polynomial in t, ``coeffs[k]`` multiplies t**k."""

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while c and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    def __call__(self, t):
        if not self.coeffs:
            return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def coeff(self, k: int) -> float:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0.0


@dataclass(frozen=True)
class Problem:
    breakpoints: tuple[float, ...]
    kernels: tuple[BivariatePoly, ...]
    rhs: UniPoly
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(float(a) for a in self.breakpoints))
        object.__setattr__(self, "kernels", tuple(self.kernels))
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def n(self) -> int:
        return len(self.kernels)

    @property
    def alphas(self) -> tuple[float, ...]:
        """alpha_0 = 0, alpha_1 .. alpha_{n-1}, alpha_n = 1."""
        return (0.0, *self.breakpoints, 1.0)

    @property
    def sectors(self) -> list[tuple[BivariatePoly, float, float]]:
        a = self.alphas
        return [(k, a[i], a[i + 1]) for i, k in enumerate(self.kernels)]

    @classmethod
    def from_dict(cls, data: Mapping) -> "Problem":
        try:
            alphas = [float(a) for a in data["alphas"]]
            kernels = [BivariatePoly.from_triples(k) for k in data["kernels"]]
            f = UniPoly([float(c) for c in data["f"]])
            T = float(data["T"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProblemSchemaError(f"malformed problem JSON: {exc}") from exc
        return cls(tuple(alphas), tuple(kernels), f, T)

    def to_dict(self) -> dict:
        return {
            "alphas": list(self.breakpoints),
            "kernels": [k.to_triples() for k in self.kernels],
            "f": list(self.rhs.coeffs) or [0.0],
            "T": self.horizon,
        }


@dataclass(frozen=True)
class ValidatedProblem(Problem):
    """A Problem that passed :func:`validate`."""


@dataclass(frozen=True)
class RegularizationParams:
    N: int
    q: float
    t_grid_size: int = DIAGONAL_GRID

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"contraction factor q={self.q} outside [0, 1)")


def validate(problem: Problem) -> ValidatedProblem:
    if isinstance(problem, ValidatedProblem):
        return problem
    bp = problem.breakpoints
    if problem.n != len(bp) + 1:
        raise KernelCountMismatch(
            f"{problem.n} kernels for {len(bp)} breakpoints; need {len(bp) + 1}")
    if any(not math.isfinite(a) for a in bp) or any(a <= 0.0 or a >= 1.0 for a in bp):
        raise BreakpointOrder(f"breakpoints must lie in (0, 1), got {list(bp)}")
    if any(b <= a for a, b in zip(bp, bp[1:])):
        raise BreakpointOrder(f"breakpoints must be strictly increasing, got {list(bp)}")
    if not (problem.horizon > 0.0 and math.isfinite(problem.horizon)):
        raise ValueError(f"horizon T must be positive, got {problem.horizon}")
    if problem.rhs.coeff(0) != 0.0:
        raise NonzeroF0(f"f(0) = {problem.rhs.coeff(0)} but must be exactly 0")

    t = np.linspace(0.0, problem.horizon, DIAGONAL_GRID)
    diag = np.abs(problem.kernels[-1].along_ray(1.0)(t))
    top = float(diag.max())
    if top == 0.0 or float(diag.min()) < DIAGONAL_REL_FLOOR * top:
        k = int(np.argmin(diag))
        raise DegenerateDiagonal(
            f"K_n(t,t) nearly vanishes at t={t[k]:.6g} (|K_n|={diag[k]:.3g}, max {top:.3g})")

    return ValidatedProblem(problem.breakpoints, problem.kernels, problem.rhs, problem.horizon)


def contraction_factor(problem: ValidatedProblem, N: int,
                       t_grid_size: int = DIAGONAL_GRID) -> float:
    """q(N): max over the t-grid of the normalized ray sum, minus one."""
    t = np.linspace(0.0, problem.horizon, t_grid_size)
    a = problem.alphas
    total = np.zeros_like(t)
    for i, kern in enumerate(problem.kernels, start=1):
        total += a[i] ** (1 + N) * np.abs(kern.along_ray(a[i])(t))
        if a[i - 1] > 0.0:
            total += a[i - 1] ** (1 + N) * np.abs(kern.along_ray(a[i - 1])(t))
    diag = np.abs(problem.kernels[-1].along_ray(1.0)(t))
    return float(np.max(total / diag)) - 1.0


def select_N(problem: ValidatedProblem, q_max: float = 0.5,
             t_grid_size: int = DIAGONAL_GRID, n_cap: int = N_CAP) -> RegularizationParams:
    """Smallest N whose contraction factor q(N) does not exceed ``q_max``."""
    if not 0.0 < q_max < 1.0:
        raise ValueError(f"q_max must lie in (0, 1), got {q_max}")
    problem = validate(problem)
    for N in range(n_cap + 1):
        q = contraction_factor(problem, N, t_grid_size)
        if q <= q_max:
            return RegularizationParams(N, max(q, 0.0), t_grid_size)
    raise NoFeasibleN(f"no N <= {n_cap} gives q(N) <= {q_max} (last q = {q:.6g})")


def kernel_dt(k: BivariatePoly) -> BivariatePoly:
    """Exact partial derivative in t."""
    return BivariatePoly({(p - 1, q): p * c for (p, q), c in k.terms.items() if p > 0},
                         k.degree_cap)
