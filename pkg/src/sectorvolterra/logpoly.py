"""Closed algebra of log-power polynomials  sum c * t**p * (ln t)**m.

Everything the solver manipulates symbolically lives here: the asymptotic
part x^N, the regularized right-hand side g and every sector integral of a
polynomial kernel against them.  ``ln(alpha)`` enters as a float, so exact
cancellations only hold up to roundoff; like terms whose sum is below
``SNAP_REL`` times the sum of their magnitudes are dropped.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegreeCapExceeded, NonpositiveT, NotDifferentiableAtZero
from .problem import BivariatePoly

SNAP_REL = 1e-12
POWER_CAP = 256
LOG_CAP = 64

Key = tuple[int, int]


def _collect(contribs: Iterable[tuple[Key, float]]) -> dict[Key, float]:
    parts: dict[Key, list[float]] = defaultdict(list)
    for key, c in contribs:
        parts[key].append(c)
    out = {}
    for key, vals in parts.items():
        s = math.fsum(vals)
        if abs(s) <= SNAP_REL * math.fsum(abs(v) for v in vals):
            continue
        out[key] = s
    return out


@dataclass(frozen=True)
class LogPoly:
    """Finite sum of c * t**p * ln(t)**m, stored as {(p, m): c}."""

    terms: Mapping[Key, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (p, m), c in dict(self.terms).items():
            p, m, c = int(p), int(m), float(c)
            if p < 0 or m < 0:
                raise ValueError(f"LogPoly exponents must be nonnegative, got ({p}, {m})")
            if p > POWER_CAP or m > LOG_CAP:
                raise DegreeCapExceeded(f"term t^{p} ln(t)^{m} exceeds degree caps")
            if c != 0.0:
                clean[(p, m)] = clean.get((p, m), 0.0) + c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    # -- construction ------------------------------------------------------
    @classmethod
    def from_contributions(cls, contribs: Iterable[tuple[Key, float]]) -> "LogPoly":
        return cls(_collect(contribs))

    @classmethod
    def sum(cls, polys: Iterable["LogPoly"]) -> "LogPoly":
        """Sum with cancellation judged against all contributing terms at once."""
        return cls.from_contributions(kc for poly in polys for kc in poly.terms.items())

    @classmethod
    def constant(cls, c: float) -> "LogPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, p: int, m: int = 0, c: float = 1.0) -> "LogPoly":
        return cls({(p, m): c})

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[float]]) -> "LogPoly":
        return cls.from_contributions(((int(p), int(m)), float(c)) for p, m, c in triples)

    def to_triples(self) -> list[list]:
        return [[p, m, c] for (p, m), c in self.terms.items()]

    # -- ring --------------------------------------------------------------
    def __add__(self, other: "LogPoly") -> "LogPoly":
        if not isinstance(other, LogPoly):
            return NotImplemented
        return LogPoly.sum((self, other))

    def __neg__(self) -> "LogPoly":
        return self.scale(-1.0)

    def __sub__(self, other: "LogPoly") -> "LogPoly":
        if not isinstance(other, LogPoly):
            return NotImplemented
        return LogPoly.sum((self, -other))

    def __mul__(self, other):
        if isinstance(other, LogPoly):
            return LogPoly.from_contributions(
                ((p1 + p2, m1 + m2), c1 * c2)
                for (p1, m1), c1 in self.terms.items()
                for (p2, m2), c2 in other.terms.items())
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        return NotImplemented

    __rmul__ = __mul__

    def scale(self, factor: float) -> "LogPoly":
        if factor == 0.0:
            return LogPoly()
        return LogPoly({k: factor * c for k, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, LogPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    # -- structure ---------------------------------------------------------
    def min_power(self) -> int | None:
        return min((p for p, _ in self.terms), default=None)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def power_coefficient(self, p: int) -> "ZPoly":
        """Polynomial in z = ln t multiplying t**p."""
        deg = max((m for q, m in self.terms if q == p), default=-1)
        coeffs = [0.0] * (deg + 1)
        for (q, m), c in self.terms.items():
            if q == p:
                coeffs[m] = c
        return ZPoly(coeffs)

    def shift_power(self, k: int) -> "LogPoly":
        """Multiply by t**k; negative k must not push any power below zero."""
        return LogPoly({(p + k, m): c for (p, m), c in self.terms.items()})

    def dilate(self, alpha: float) -> "LogPoly":
        """The function t -> self(alpha * t), alpha > 0."""
        if alpha <= 0.0:
            raise ValueError("dilation factor must be positive")
        la = math.log(alpha)
        contribs = []
        for (p, m), c in self.terms.items():
            cp = c * alpha**p
            for r in range(m + 1):
                contribs.append(((p, r), cp * math.comb(m, r) * la ** (m - r)))
        return LogPoly.from_contributions(contribs)

    def __call__(self, t):
        return lp_eval(self, t)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"LogPoly({render(self)})"


@dataclass(frozen=True)
class ZPoly:
    """Dense polynomial in z = ln t, ``coeffs[k]`` multiplies z**k."""

    coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        c = [float(v) for v in self.coeffs]
        while c and c[-1] == 0.0:
            c.pop()
        if len(c) - 1 > LOG_CAP:
            raise DegreeCapExceeded(f"z-polynomial degree {len(c) - 1} exceeds {LOG_CAP}")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def coeff(self, k: int) -> float:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0.0

    def __call__(self, z):
        if not self.coeffs:
            return np.zeros_like(np.asarray(z, dtype=float)) if np.ndim(z) else 0.0
        return np.polynomial.polynomial.polyval(z, self.coeffs)

    def shift(self, a: float) -> "ZPoly":
        """z -> self(z + a)."""
        d = len(self.coeffs)
        out = [0.0] * d
        for k, c in enumerate(self.coeffs):
            for r in range(k + 1):
                out[r] += c * math.comb(k, r) * a ** (k - r)
        return ZPoly(out)

    def to_logpoly(self, power: int = 0) -> LogPoly:
        """self(ln t) * t**power."""
        return LogPoly({(power, m): c for m, c in enumerate(self.coeffs)})

    def render(self, var: str = "z") -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            parts.append(repr(c) if k == 0 else f"{c!r} * {var}" + (f"^{k}" if k > 1 else ""))
        return " + ".join(parts)


def render(a: LogPoly) -> str:
    if a.is_zero:
        return "0"
    return " + ".join(f"{c!r} * t^{p} * ln(t)^{m}" for (p, m), c in a.terms.items())


def lp_ring(a: LogPoly, b: LogPoly | float, op: str) -> LogPoly:
    """Dispatch ``add``, ``mul`` or ``scale`` (b is then the factor)."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(float(b))
    raise ValueError(f"unknown ring operation {op!r}")


def _antiderivative_coeffs(p: int, m: int) -> list[float]:
    # coefficient of ln(s)^(m-r) for r = 0..m
    k = p + 1
    return [(-1) ** r * math.perm(m, r) / k ** (r + 1) for r in range(m + 1)]


def antiderivative_power_log(p: int, m: int) -> LogPoly:
    """F with F'(s) = s**p ln(s)**m and F(s) -> 0 as s -> +0 (in the variable s)."""
    if p < 0 or m < 0:
        raise ValueError("p and m must be nonnegative")
    coeffs = _antiderivative_coeffs(p, m)
    return LogPoly({(p + 1, m - r): c for r, c in enumerate(coeffs)})


def _antiderivative_at_ray(k: int, m: int, alpha: float) -> list[tuple[Key, float]]:
    """F_{k,m}(alpha * t) expanded in t**(k+1) ln(t)**r."""
    if alpha == 0.0:
        return []
    la = math.log(alpha)
    scale = alpha ** (k + 1)
    out = []
    for r, c in enumerate(_antiderivative_coeffs(k, m)):
        e = m - r
        for u in range(e + 1):
            out.append(((k + 1, u), scale * c * math.comb(e, u) * la ** (e - u)))
    return out


def integrate_segment(kernel: BivariatePoly, x: LogPoly,
                      alpha_lo: float, alpha_hi: float) -> LogPoly:
    """Exact ``int_{alpha_lo t}^{alpha_hi t} kernel(t, s) x(s) ds`` as a LogPoly in t."""
    if not 0.0 <= alpha_lo < alpha_hi <= 1.0:
        raise ValueError(f"need 0 <= alpha_lo < alpha_hi <= 1, got [{alpha_lo}, {alpha_hi}]")
    # group kernel * x as  t**P * s**k * ln(s)**m
    grouped: dict[tuple[int, int, int], float] = defaultdict(float)
    for (P, Q), ck in kernel.terms.items():
        for (p, m), cx in x.terms.items():
            grouped[(P, Q + p, m)] += ck * cx
    contribs: list[tuple[Key, float]] = []
    for (P, k, m), c in grouped.items():
        if k + 1 + P > POWER_CAP:
            raise DegreeCapExceeded(f"integral produces power t^{k + 1 + P}")
        for (pw, lg), v in _antiderivative_at_ray(k, m, alpha_hi):
            contribs.append(((pw + P, lg), c * v))
        for (pw, lg), v in _antiderivative_at_ray(k, m, alpha_lo):
            contribs.append(((pw + P, lg), -c * v))
    return LogPoly.from_contributions(contribs)


def lp_dt(a: LogPoly) -> LogPoly:
    for (p, m) in a.terms:
        if p == 0 and m >= 1:
            raise NotDifferentiableAtZero(
                f"term ln(t)^{m} has no derivative inside the p >= 0 algebra")
    contribs = []
    for (p, m), c in a.terms.items():
        if p == 0:
            continue
        contribs.append(((p - 1, m), p * c))
        if m:
            contribs.append(((p - 1, m - 1), m * c))
    return LogPoly.from_contributions(contribs)


def lp_eval(a: LogPoly, t):
    """Evaluate at t > 0 (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr > 0.0)):
        raise NonpositiveT("LogPoly evaluation needs t > 0")
    z = np.log(arr)
    out = np.zeros_like(arr)
    for (p, m), c in a.terms.items():
        out = out + c * arr**p * z**m
    return float(out) if out.ndim == 0 else out
