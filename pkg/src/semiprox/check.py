"""Cross-validation of the closed-form prox against the grid oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .moreau import falpha_values
from .oracle import DEFAULT_GRID, GridSpec, grid_prox
from .penalty import PenaltySpec
from .prox import ProxResult, prox_semiconvex, switch_point

__all__ = ["Mismatch", "CheckReport", "compare", "breakpoints", "cross_check"]

POINT_TOL = 1e-6


@dataclass(frozen=True)
class Mismatch:
    x: float
    result: ProxResult
    oracle: tuple[float, ...]
    deviation: float


@dataclass
class CheckReport:
    checked: int = 0
    max_deviation: float = 0.0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def compare(result: ProxResult, oracle_pts: np.ndarray, coarse_step: float) -> tuple[float, bool]:
    """Deviation between a closed-form result and oracle minimizers, and whether it passes.

    Isolated points must match one-to-one within 1e-6 in both directions.  A
    segment is sampled by the oracle at coarse spacing, so its points must lie
    within ten coarse steps of it and cover it without gaps wider than ten
    steps.
    """
    pts = np.sort(np.asarray(oracle_pts, dtype=float))
    if pts.size == 0:
        return math.inf, False
    if result.kind != "segment":
        mine = np.asarray(result.points)
        d_or = np.abs(pts[:, None] - mine[None, :]).min(axis=1).max()
        d_mine = np.abs(mine[:, None] - pts[None, :]).min(axis=1).max()
        dev = float(max(d_or, d_mine))
        return dev, dev <= POINT_TOL
    seg_tol = 10.0 * coarse_step
    outside = np.maximum(result.lo - pts, pts - result.hi).clip(min=0.0).max()
    inner = pts[(pts >= result.lo) & (pts <= result.hi)]
    gaps = np.diff(np.concatenate([[result.lo], inner, [result.hi]]))
    dev = float(max(outside, gaps.max() if gaps.size else math.inf))
    return dev, bool(outside <= seg_tol and gaps.size and gaps.max() <= seg_tol)


def breakpoints(spec: PenaltySpec, alpha: float, beta: float) -> list[float]:
    """Inputs where the closed form switches branch, on both sides of 0."""
    out: list[float] = []
    c = spec.coeffs
    for sign, a, b in ((1.0, c.a2, c.b2), (-1.0, c.a1, -c.b1)):
        if b == 0.0:
            continue
        knee = alpha * b * (a * beta + 1.0)
        out += [sign * beta * b, sign * alpha * b, sign * knee]
        if knee < beta * b:
            out.append(sign * switch_point(a, b, alpha, beta))
    if spec.constraint is not None:
        out += [v for v in (spec.lo, spec.hi) if math.isfinite(v)]
    return sorted(set(v for v in out if v != 0.0))


def cross_check(
    spec: PenaltySpec,
    alpha: float,
    beta: float,
    xs: Iterable[float],
    grid: GridSpec = DEFAULT_GRID,
) -> CheckReport:
    def g(u: np.ndarray) -> np.ndarray:
        return falpha_values(spec, alpha, u)

    report = CheckReport()
    for x in xs:
        x = float(x)
        res, _ = prox_semiconvex(spec, alpha, beta, x)
        pts = grid_prox(g, beta, x, grid)
        lo, hi = grid.window(x)
        dev, ok = compare(res, pts, (hi - lo) / (grid.n_coarse - 1))
        report.checked += 1
        if res.kind != "segment":
            report.max_deviation = max(report.max_deviation, dev)
        if not ok:
            report.mismatches.append(Mismatch(x, res, tuple(float(p) for p in pts), dev))
    return report
