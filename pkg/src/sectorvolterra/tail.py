"""Regularized equation for the tail u and its numerical solution.

Substituting x = x^N + t^N u into the equation leaves

    int_0^t K(t,s) s^N u(s) ds = g(t),   g = f - int_0^t K x^N ds,

whose t-derivative is a functional-integral equation of the second kind in u
with contraction factor q from the choice of N.  :func:`solve_tail` iterates
that form; :func:`solve_tail_quadrature` steps the undifferentiated form
directly and serves as an independent check.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import AsymptoticSolution
from .errors import AsymptoticInconsistent, DegenerateDiagonal, NoConvergence, OutOfDomain
from .logpoly import LogPoly, integrate_segment, lp_dt
from .problem import ValidatedProblem, kernel_dt, validate

log = logging.getLogger(__name__)

OTN_TOL = 1e-9
MIN_SECTOR_NODES = 8
CONTRACTION_WINDOW = 5


@dataclass(frozen=True)
class TailProblem:
    g: LogPoly
    g_prime: LogPoly
    N: int
    problem: ValidatedProblem

    @property
    def scaled_rhs(self) -> LogPoly:
        """t^(-N) g'(t), formed symbolically; powers <= N were checked to vanish."""
        kept = {(p, m): c for (p, m), c in self.g_prime.terms.items() if p > self.N}
        return LogPoly(kept).shift_power(-self.N)


def compute_g(problem: ValidatedProblem, xN: AsymptoticSolution,
              otN_tol: float = OTN_TOL) -> TailProblem:
    problem = validate(problem)
    x = xN.as_logpoly()
    f = LogPoly({(k, 0): c for k, c in enumerate(problem.rhs.coeffs)})
    integrals = [integrate_segment(k, x, lo, hi) for k, lo, hi in problem.sectors]
    g = LogPoly.sum([f] + [-part for part in integrals])
    g_prime = lp_dt(g)

    # noise in g' is judged against the size of what cancelled to produce it
    ref = max([g_prime.max_abs_coeff(), lp_dt(f).max_abs_coeff()]
              + [lp_dt(part).max_abs_coeff() for part in integrals])
    offending = {(p, m): c for (p, m), c in g_prime.terms.items() if p <= xN.N}
    if offending:
        (p, m), c = max(offending.items(), key=lambda kv: abs(kv[1]))
        if abs(c) > otN_tol * ref:
            raise AsymptoticInconsistent(
                f"g' is not o(t^{xN.N}): coefficient {c:.3e} of t^{p} ln(t)^{m} "
                f"(reference magnitude {ref:.3e})")
    return TailProblem(g, g_prime, xN.N, problem)


@dataclass(frozen=True)
class TailSolution:
    grid: np.ndarray
    values: np.ndarray
    weight_l: float
    iterations: int
    contraction_estimate: float
    converged: bool
    diff_norms: tuple[float, ...] = ()

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "contraction": self.contraction_estimate,
            "l": self.weight_l,
            "converged": self.converged,
            "max_u": float(np.max(np.abs(self.values))),
        }


@dataclass(frozen=True)
class Solution:
    asymptotic: AsymptoticSolution
    tail: TailSolution
    N: int
    horizon: float = field(default=math.inf)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if np.any(~(t_arr > 0.0)) or np.any(t_arr > self.horizon * (1 + 1e-12)):
            raise OutOfDomain(f"solution is defined on (0, {self.horizon}]")
        out = self.asymptotic.as_logpoly()(t_arr) + t_arr**self.N * self.tail(t_arr)
        return float(out) if np.ndim(out) == 0 else out


def _grid(T: float, h: float | None) -> tuple[np.ndarray, float]:
    if h is None:
        h = T / 1000
    K = int(round(T / h))
    if K < 1 or abs(K * h - T) > 1e-9 * T:
        raise ValueError(f"step h={h} does not divide T={T}")
    return np.linspace(0.0, T, K + 1), T / K


def _diagonal_values(problem: ValidatedProblem, t: np.ndarray) -> np.ndarray:
    diag = problem.kernels[-1].along_ray(1.0)(t)
    if np.any(diag == 0.0):
        raise DegenerateDiagonal("K_n(t,t) vanishes on the tail grid")
    return diag


def _scatter_interp(A: np.ndarray, row: int, pos: np.ndarray, w: np.ndarray, h: float) -> None:
    """Add weights for u(pos) (linear interpolation on the grid) into A[row]."""
    x = pos / h
    idx = np.minimum(np.floor(x).astype(int), A.shape[1] - 2)
    frac = x - idx
    np.add.at(A[row], idx, w * (1.0 - frac))
    np.add.at(A[row], idx + 1, w * frac)


def tail_operator(tp: TailProblem, grid: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Affine map u -> A u + b of one fixed-point sweep on the grid.

    Row k solves the differentiated equation for the upper boundary term
    K_n(t,t) t^N u(t); all other boundary terms and the dK/dt integrals use
    the previous iterate.  Row 0 is pinned to u(0) = 0.
    """
    problem, N = tp.problem, tp.N
    K = len(grid) - 1
    A = np.zeros((K + 1, K + 1))
    t = grid[1:]
    diag = _diagonal_values(problem, t)
    b = np.zeros(K + 1)
    b[1:] = tp.scaled_rhs(t) / diag if not tp.scaled_rhs.is_zero else 0.0

    a = problem.alphas
    dkernels = [kernel_dt(kern) for kern in problem.kernels]
    for k in range(1, K + 1):
        tk, dk = grid[k], diag[k - 1]
        pos, w = [], []
        for i, kern in enumerate(problem.kernels, start=1):
            if i < problem.n:
                pos.append(a[i] * tk)
                w.append(-a[i] ** (1 + N) * kern(tk, a[i] * tk) / dk)
            if i > 1:
                pos.append(a[i - 1] * tk)
                w.append(a[i - 1] ** (1 + N) * kern(tk, a[i - 1] * tk) / dk)
        if pos:
            _scatter_interp(A, k, np.array(pos), np.array(w), h)
        for i, dkern in enumerate(dkernels, start=1):
            if dkern.is_zero:
                continue
            lo, hi = a[i - 1] * tk, a[i] * tk
            m = max(MIN_SECTOR_NODES, math.ceil((hi - lo) / h))
            s = np.linspace(lo, hi, m + 1)
            omega = np.full(m + 1, (hi - lo) / m)
            omega[0] *= 0.5
            omega[-1] *= 0.5
            weights = -omega * dkern(tk, s) * (s / tk) ** N / dk
            _scatter_interp(A, k, s, weights, h)
    return A, b


def _iterate(A: np.ndarray, b: np.ndarray, grid: np.ndarray, l: float, tol: float,
             max_iter: int) -> tuple[np.ndarray, list[float], bool]:
    weight = np.exp(-l * grid)
    u = np.zeros_like(b)
    norms: list[float] = []
    for _ in range(max_iter):
        nxt = A @ u + b
        nxt[0] = 0.0
        d = float(np.max(weight * np.abs(nxt - u)))
        norms.append(d)
        u = nxt
        if d < tol:
            return u, norms, True
    return u, norms, False


def _contraction(norms: list[float]) -> float:
    ratios = [b / a for a, b in zip(norms[:-1], norms[1:]) if a > 0.0]
    ratios = ratios[-CONTRACTION_WINDOW:]
    if not ratios:
        return 0.0
    if any(r == 0.0 for r in ratios):
        return 0.0
    return float(np.exp(np.mean(np.log(ratios))))


def solve_tail(tp: TailProblem, h: float | None = None, l: float = 1.0, tol: float = 1e-10,
               max_iter: int = 500) -> TailSolution:
    """Successive approximations for u on a uniform grid (Jacobi sweeps)."""
    grid, h = _grid(tp.problem.horizon, h)
    A, b = tail_operator(tp, grid, h)
    for attempt in range(2):
        u, norms, ok = _iterate(A, b, grid, l, tol, max_iter)
        if ok:
            return TailSolution(grid, u, l, len(norms), _contraction(norms), True, tuple(norms))
        if attempt == 0:
            log.info("no convergence with l=%g after %d sweeps; retrying with l=%g",
                     l, max_iter, 2 * l)
            l *= 2
    raise NoConvergence(
        f"tail iteration did not reach tol={tol} within {max_iter} sweeps "
        f"(l={l}, last difference {norms[-1]:.3e})")


def quadrature_weights(tp: TailProblem, grid: np.ndarray) -> np.ndarray:
    """W[k, m] = int over cell m of K(t_k, s) s^N ds, cells [t_{m-1}, t_m] clipped to sectors."""
    problem, N = tp.problem, tp.N
    K = len(grid) - 1
    W = np.zeros((K + 1, K + 1))
    for k in range(1, K + 1):
        tk = grid[k]
        left, right = grid[:k], grid[1:k + 1]
        row = np.zeros(k)
        for kern, lo, hi in problem.sectors:
            a = np.clip(left, lo * tk, hi * tk)
            b = np.clip(right, lo * tk, hi * tk)
            for (p, q), c in kern.terms.items():
                e = q + N + 1
                row += c * tk**p * (b**e - a**e) / e
        W[k, 1:k + 1] = row
    return W


def solve_tail_quadrature(tp: TailProblem, h: float | None = None) -> TailSolution:
    """Direct time stepping of  int_0^t K(t,s) s^N u(s) ds = g(t).

    u is collocated at cell midpoints and held constant per cell while the
    kernel factor K(t_k, s) s^N is integrated exactly on each cell, split at
    the sector boundaries.  Node values are averages of adjacent midpoints.
    """
    grid, h = _grid(tp.problem.horizon, h)
    K = len(grid) - 1
    W = quadrature_weights(tp, grid)
    g = np.zeros(K + 1)
    if not tp.g.is_zero:
        g[1:] = tp.g(grid[1:])
    mid = np.zeros(K + 1)  # mid[m] ~ u((m - 1/2) h)
    for k in range(1, K + 1):
        lead = W[k, k]
        if lead == 0.0 or abs(lead) <= 1e-14 * np.sum(np.abs(W[k, 1:k + 1])):
            raise DegenerateDiagonal(f"leading quadrature weight vanishes at t={grid[k]:.6g}")
        mid[k] = (g[k] - W[k, 1:k] @ mid[1:k]) / lead
    values = np.zeros(K + 1)
    if K >= 2:
        values[1:K] = 0.5 * (mid[1:K] + mid[2:K + 1])
        values[K] = 1.5 * mid[K] - 0.5 * mid[K - 1]
    else:
        values[K] = mid[K]
    return TailSolution(grid, values, 0.0, K, 0.0, True)
