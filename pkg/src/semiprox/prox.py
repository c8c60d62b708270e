"""Set-valued proximity operator of the semiconvex penalty ``f_alpha``.

For ``x >= 0`` the unconstrained operator is one of four closed forms, chosen
by whether ``b2 == 0`` and by the sign of ``alpha*b2*(a2*beta + 1) - beta*b2``
(strongly convex, convex-boundary, or concave subproblem near 0).  Negative
inputs are handled by reflecting the coefficients.  Interval-restricted
penalties are solved by enumerating the quadratic pieces of the objective.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np

from .moreau import _check_positive, falpha_pieces
from .penalty import PenaltySpec

__all__ = [
    "REL_TOL",
    "ProxResult",
    "CaseTag",
    "ThresholdParams",
    "ZeroSet",
    "DimensionMismatch",
    "s2_branch",
    "switch_point",
    "prox_semiconvex",
    "prox_semiconvex_restricted",
    "prox_hard",
    "sparsity_threshold",
    "prox_separable",
    "prox_select_values",
]

# Band used to classify exact-equality cases (trichotomy boundary, set-valued points).
REL_TOL = 1e-12


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(abs(a), abs(b))


@dataclass(frozen=True)
class ProxResult:
    """``single`` (lo == hi), ``pair`` {lo, hi} or closed ``segment`` [lo, hi]."""

    kind: str
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if self.kind == "single":
            if self.lo != self.hi:
                raise ValueError("single result needs lo == hi")
        elif self.kind in ("pair", "segment"):
            if not self.lo < self.hi:
                raise ValueError(f"{self.kind} needs lo < hi, got {self.lo}, {self.hi}")
        else:
            raise ValueError(f"unknown kind {self.kind!r}")

    @classmethod
    def single(cls, p: float) -> "ProxResult":
        p = float(p) + 0.0  # drop the sign of -0.0
        return cls("single", p, p)

    @classmethod
    def pair(cls, p: float, q: float) -> "ProxResult":
        lo, hi = sorted((float(p) + 0.0, float(q) + 0.0))
        return cls("pair", lo, hi)

    @classmethod
    def segment(cls, lo: float, hi: float) -> "ProxResult":
        return cls("segment", float(lo) + 0.0, float(hi) + 0.0)

    @property
    def is_set_valued(self) -> bool:
        return self.kind != "single"

    @property
    def points(self) -> tuple[float, ...]:
        """Isolated points, or the two endpoints of a segment."""
        return (self.lo,) if self.kind == "single" else (self.lo, self.hi)

    def contains(self, p: float, tol: float = 0.0) -> bool:
        if self.kind == "segment":
            return self.lo - tol <= p <= self.hi + tol
        return any(abs(p - q) <= tol for q in self.points)

    def select(self) -> float:
        """Element of smallest magnitude; ties go to 0."""
        if self.kind == "segment" and self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(self.points, key=lambda p: (abs(p), p != 0.0))

    def negated(self) -> "ProxResult":
        return ProxResult(self.kind, 0.0 - self.hi, 0.0 - self.lo)

    def __str__(self) -> str:
        if self.kind == "single":
            return f"Single({self.lo:g})"
        name = "Pair" if self.kind == "pair" else "Segment"
        return f"{name}({self.lo:g}, {self.hi:g})"


@dataclass(frozen=True)
class CaseTag:
    """Which closed form produced a result; diagnostic only."""

    label: str
    reflected: bool = False

    def __str__(self) -> str:
        return f"{self.label}/reflected" if self.reflected else self.label


@dataclass(frozen=True)
class ThresholdParams:
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_positive("alpha", self.alpha))
        object.__setattr__(self, "beta", _check_positive("beta", self.beta))


@dataclass(frozen=True)
class ZeroSet:
    """Interval of inputs guaranteed to be mapped to exactly {0}."""

    lo: float
    hi: float
    closed: bool

    def __contains__(self, x: float) -> bool:
        if self.closed:
            return self.lo <= x <= self.hi
        return self.lo < x < self.hi


class DimensionMismatch(ValueError):
    pass


def _linear_branch(a: float, b: float, alpha: float, beta: float, x: Any) -> Any:
    k = alpha * a + 1.0
    return k / (alpha * a * (a * beta + 1.0) + 1.0) * (x - alpha * a * beta * b / k)


def s2_branch(a2: float, b2: float, alpha: float, beta: float, x: float) -> float:
    """Minimizer of the objective over ``u >= alpha*b2`` for ``x >= 0``."""
    if x < 0:
        raise ValueError("s2_branch is defined for x >= 0")
    return max(alpha * b2, float(_linear_branch(a2, b2, alpha, beta, x)))


def switch_point(a2: float, b2: float, alpha: float, beta: float) -> float:
    """Input at which the concave-case prox jumps from 0 to the linear branch."""
    k = alpha * a2 + 1.0
    root = math.sqrt(alpha * beta * (alpha * a2 * a2 * beta + alpha * a2 + 1.0))
    return (alpha * a2 * beta * b2 + root * b2) / k


def _regime(a: float, b: float, alpha: float, beta: float) -> str:
    if b == 0.0:
        return "B2Zero"
    lhs, rhs = alpha * b * (a * beta + 1.0), beta * b
    if _close(lhs, rhs):
        return "ConvexBoundaryCase"
    return "StrongConvexCase" if lhs > rhs else "ConcaveCase"


def _prox_right(a: float, b: float, alpha: float, beta: float, x: float) -> tuple[ProxResult, str]:
    # x > 0; (a, b) are the curvature and slope on the side of x
    regime = _regime(a, b, alpha, beta)
    if regime == "B2Zero":
        return ProxResult.single(max(0.0, _linear_branch(a, 0.0, alpha, beta, x))), regime
    if regime == "ConvexBoundaryCase":
        if _close(x, beta * b):
            return ProxResult.segment(0.0, alpha * b), regime
        if x < beta * b:
            return ProxResult.single(0.0), regime
        return ProxResult.single(_linear_branch(a, b, alpha, beta, x)), regime
    if regime == "StrongConvexCase":
        knee = alpha * b * (a * beta + 1.0)
        if x < beta * b:
            return ProxResult.single(0.0), regime
        if x <= knee:
            return ProxResult.single(alpha / ((a * beta + 1.0) * alpha - beta) * (x - beta * b)), regime
        return ProxResult.single(_linear_branch(a, b, alpha, beta, x)), regime
    tau = switch_point(a, b, alpha, beta)
    if _close(x, tau):
        return ProxResult.pair(0.0, _linear_branch(a, b, alpha, beta, tau)), regime
    if x < tau:
        return ProxResult.single(0.0), regime
    return ProxResult.single(_linear_branch(a, b, alpha, beta, x)), regime


def prox_semiconvex(spec: PenaltySpec, alpha: float, beta: float, x: float) -> tuple[ProxResult, CaseTag]:
    """``prox_{beta f_alpha}(x)`` with the branch that produced it.

    Specs carrying an interval are forwarded to :func:`prox_semiconvex_restricted`.
    """
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"x must be finite, got {x}")
    if spec.constraint is not None:
        return prox_semiconvex_restricted(spec, alpha, beta, x)
    if x == 0.0:
        return ProxResult.single(0.0), CaseTag("Origin")
    c = spec.coeffs
    if x > 0:
        res, label = _prox_right(c.a2, c.b2, alpha, beta, x)
        return res, CaseTag(label)
    res, label = _prox_right(c.a1, -c.b1, alpha, beta, -x)
    return res.negated(), CaseTag(label, reflected=True)


def prox_semiconvex_restricted(
    spec: PenaltySpec, alpha: float, beta: float, x: float
) -> tuple[ProxResult, CaseTag]:
    """``prox_{beta f_alpha}`` for ``f + indicator([lo, hi])``.

    The objective ``f_alpha(u) + (u - x)**2 / (2 beta)`` is quadratic on each
    piece of ``f_alpha`` cut to the interval, so its global minimizers are among
    the piece endpoints and interior stationary points of convex pieces.  A
    piece on which the objective is exactly flat contributes a whole segment.
    """
    if spec.constraint is None:
        raise ValueError("prox_semiconvex_restricted needs a spec with an interval")
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    x = float(x)
    lo, hi = spec.lo, spec.hi
    cands: list[tuple[float, float, float]] = []
    slopes: list[tuple[float, float, float, float, float]] = []
    for piece in falpha_pieces(spec.coeffs, alpha):
        p, q = max(piece.lo, lo), min(piece.hi, hi)
        if p > q:
            continue
        qa = piece.quad + 0.5 / beta
        qb = piece.lin - x / beta
        qc = piece.const + x * x / (2.0 * beta)
        slopes.append((p, q, qa, qb, abs(piece.lin) + abs(x) / beta))
        if abs(qa) <= REL_TOL * (abs(piece.quad) + 0.5 / beta) and abs(qb) <= REL_TOL * (
            abs(piece.lin) + abs(x) / beta
        ):
            cands.append((qc, p, q))
            continue
        pts = [u for u in (p, q) if math.isfinite(u)]
        if qa > 0:
            u = -qb / (2.0 * qa)
            if p < u < q:
                pts.append(u)
        cands.extend(((qa * u + qb) * u + qc, u, u) for u in pts)

    def descends(u: float) -> bool:
        # the objective strictly decreases from u into some piece that has u as an endpoint
        for p, q, qa, qb, scale in slopes:
            d = 2.0 * qa * u + qb
            tol = REL_TOL * (scale + abs(2.0 * qa * u))
            if (u == p and d < -tol) or (u == q and d > tol):
                return True
        return False

    local = [c for c in cands if c[1] != c[2] or not descends(c[1])]
    cands = local or cands

    best = min(v for v, _, _ in cands)
    band = REL_TOL * max(best, x * x / (2.0 * beta))
    winners = sorted((a, b) for v, a, b in cands if v <= best + band)
    merge = REL_TOL * max(1.0, abs(x))
    groups: list[list[float]] = []
    for a, b in winners:
        if groups and a <= groups[-1][1] + merge:
            groups[-1][1] = max(groups[-1][1], b)
        else:
            groups.append([a, b])

    segs = [g for g in groups if g[1] - g[0] > merge]
    if segs:
        if len(groups) != 1:
            raise RuntimeError(f"unexpected minimizer structure {groups} at x={x}")
        res = ProxResult.segment(*segs[0])
    else:
        pts = [0.5 * (a + b) for a, b in groups]
        if len(pts) == 1:
            res = ProxResult.single(pts[0])
        elif len(pts) == 2:
            res = ProxResult.pair(*pts)
        else:
            raise RuntimeError(f"more than two minimizers {pts} at x={x}")
    saturated = any(math.isfinite(e) and res.contains(e, merge) for e in (lo, hi))
    return res, CaseTag("IntervalSaturated" if saturated else "IntervalInterior")


def prox_hard(gamma: float, x: float) -> ProxResult:
    """Proximity operator of ``gamma * |x|_0`` (hard thresholding at ``sqrt(2 gamma)``)."""
    gamma = _check_positive("gamma", gamma)
    thr = math.sqrt(2.0 * gamma)
    ax = abs(x)
    if _close(ax, thr):
        return ProxResult.pair(0.0, x)
    return ProxResult.single(0.0 if ax < thr else x)


def sparsity_threshold(spec: PenaltySpec, alpha: float, beta: float) -> ZeroSet:
    """Inputs that are guaranteed to map to exactly {0}.

    ``beta * [b1, b2]`` (closed) when beta < alpha, the open interval
    ``alpha * (b1, b2)`` when beta == alpha and ``alpha * [b1, b2]`` (closed)
    when beta > alpha.  The last case is only a lower bound on the true zero set.
    """
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    b1, b2 = spec.coeffs.b1, spec.coeffs.b2
    if _close(alpha, beta):
        return ZeroSet(alpha * b1, alpha * b2, closed=False)
    if beta < alpha:
        return ZeroSet(beta * b1, beta * b2, closed=True)
    return ZeroSet(alpha * b1, alpha * b2, closed=True)


def prox_separable(
    specs: Union[PenaltySpec, Sequence[PenaltySpec]], alpha: float, beta: float, x: Any
) -> list[ProxResult]:
    """Coordinatewise ``prox_{beta f_alpha}`` for a separable penalty."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"x must be a vector, got shape {x.shape}")
    if isinstance(specs, PenaltySpec):
        specs = [specs] * x.size
    if len(specs) != x.size:
        raise DimensionMismatch(f"{len(specs)} specs for a vector of length {x.size}")
    return [prox_semiconvex(s, alpha, beta, xi)[0] for s, xi in zip(specs, x)]


def _at_or_below(x: np.ndarray, t: float) -> np.ndarray:
    return (x < t) | (np.abs(x - t) <= REL_TOL * np.maximum(np.abs(x), abs(t)))


def _select_right(a: float, b: float, alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    regime = _regime(a, b, alpha, beta)
    lin = _linear_branch(a, b, alpha, beta, x)
    if regime == "B2Zero":
        return np.maximum(0.0, lin)
    if regime == "ConvexBoundaryCase":
        return np.where(_at_or_below(x, beta * b), 0.0, lin)
    if regime == "StrongConvexCase":
        knee = alpha * b * (a * beta + 1.0)
        mid = alpha / ((a * beta + 1.0) * alpha - beta) * (x - beta * b)
        return np.where(x < beta * b, 0.0, np.where(x <= knee, mid, lin))
    return np.where(_at_or_below(x, switch_point(a, b, alpha, beta)), 0.0, lin)


def prox_select_values(spec: PenaltySpec, alpha: float, beta: float, x: Any) -> np.ndarray:
    """Vectorized smallest-magnitude selection from ``prox_{beta f_alpha}``."""
    alpha = _check_positive("alpha", alpha)
    beta = _check_positive("beta", beta)
    x = np.asarray(x, dtype=float)
    if spec.constraint is not None:
        flat = [prox_semiconvex_restricted(spec, alpha, beta, v)[0].select() for v in x.ravel()]
        return np.asarray(flat, dtype=float).reshape(x.shape)
    c = spec.coeffs
    ax = np.abs(x)
    right = _select_right(c.a2, c.b2, alpha, beta, ax)
    left = -_select_right(c.a1, -c.b1, alpha, beta, ax)
    return np.where(x > 0, right, np.where(x < 0, left, 0.0)) + 0.0
