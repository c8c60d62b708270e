"""Brute-force grid minimization used as ground truth for the closed forms.

Nothing here knows about the case analysis; the only inputs are a vectorized
function handle ``g`` (returning ``inf`` off its domain), a step ``t`` and a
query point ``x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .moreau import falpha_values
from .penalty import PenaltySpec

__all__ = [
    "EmptyDomain",
    "GridSpec",
    "ScalarFn",
    "grid_search",
    "grid_prox",
    "grid_env",
    "second_difference_min",
    "zero_set_scan",
]

# Vectorized: maps an array of points to an array of values in R ∪ {+inf}.
ScalarFn = Callable[[np.ndarray], np.ndarray]


class EmptyDomain(ValueError):
    """``g`` is +inf everywhere on the search window."""


@dataclass(frozen=True)
class GridSpec:
    """Search window and resolution.

    ``lo``/``hi`` default to ``x -/+ (|x| + 1)``, a margin-1 cover of the ball
    ``|u - x| <= |x|`` that contains every prox point of a nonnegative penalty
    vanishing at 0.
    """

    lo: Optional[float] = None
    hi: Optional[float] = None
    n_coarse: int = 20001
    n_refine: int = 3
    refine_points: int = 401
    tol: float = 1e-9
    anchors: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        if self.lo is not None and self.hi is not None and not self.lo < self.hi:
            raise ValueError("GridSpec needs lo < hi")
        if self.n_coarse < 1000:
            raise ValueError("n_coarse must be at least 1000")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def window(self, x: float) -> tuple[float, float]:
        r = abs(x) + 1.0
        lo = x - r if self.lo is None else self.lo
        hi = x + r if self.hi is None else self.hi
        return lo, hi


DEFAULT_GRID = GridSpec()


def grid_search(g: ScalarFn, t: float, x: float, grid: GridSpec = DEFAULT_GRID) -> tuple[np.ndarray, float]:
    """All near-global minimizers of ``u -> g(u) + (u - x)**2 / (2 t)`` and the minimum value.

    Coarse candidates are every grid point within one adjacent-value jump of the
    coarse minimum that is a discrete local minimum; each is refined
    ``n_refine`` times on a window of +/- 2 steps.  Refined points within
    ``tol`` of the best value are kept, and points closer than four final steps
    are merged to the better one.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    lo, hi = grid.window(x)

    half_inv_t = 0.5 / t

    def objective(u: np.ndarray) -> np.ndarray:
        # +inf from g stays +inf; nan (never produced by a valid g) is treated as +inf
        d = u - x
        v = np.asarray(g(u), dtype=float) + d * d * half_inv_t
        bad = np.isnan(v)
        if bad.any():
            v[bad] = np.inf
        return v

    u = np.linspace(lo, hi, grid.n_coarse)
    extra = np.asarray([a for a in grid.anchors if lo <= a <= hi and a not in u], dtype=float)
    if extra.size:
        u = np.insert(u, np.searchsorted(u, extra), extra)
    v = objective(u)
    finite = np.isfinite(v)
    if not finite.any():
        raise EmptyDomain(f"objective is +inf on [{lo}, {hi}]")
    vmin = v[finite].min()
    both = finite[1:] & finite[:-1]
    with np.errstate(invalid="ignore"):
        jumps = np.abs(np.diff(v))[both]
    slack = 2.0 * jumps.max() if jumps.size else 0.0

    vpad = np.concatenate([[np.inf], v, [np.inf]])
    local = (vpad[1:-1] <= vpad[:-2]) & (vpad[1:-1] <= vpad[2:])
    idx = np.flatnonzero(finite & local & (v <= vmin + slack))

    centers = u[idx]
    vals = v[idx]
    h = float(np.max(np.diff(u)))
    offs = np.linspace(-2.0, 2.0, grid.refine_points)
    offs[grid.refine_points // 2] = 0.0
    for _ in range(grid.n_refine):
        cand = np.clip(centers[:, None] + h * offs[None, :], lo, hi)
        cv = objective(cand)
        j = np.argmin(cv, axis=1)
        rows = np.arange(len(centers))
        better = cv[rows, j] < vals
        centers = np.where(better, cand[rows, j], centers)
        vals = np.where(better, cv[rows, j], vals)
        h *= 4.0 / (grid.refine_points - 1)

    best = float(vals.min())
    keep = vals <= best + grid.tol
    pts, pv = centers[keep], vals[keep]
    order = np.argsort(pts, kind="stable")
    pts, pv = pts[order], pv[order]
    radius = 4.0 * h
    out: list[float] = []
    out_v: list[float] = []
    for p, val in zip(pts, pv):
        if out and p - out[-1] <= radius:
            if val < out_v[-1]:
                out[-1], out_v[-1] = float(p), float(val)
            continue
        out.append(float(p))
        out_v.append(float(val))
    return np.asarray(out), best


def grid_prox(g: ScalarFn, t: float, x: float, grid: GridSpec = DEFAULT_GRID) -> np.ndarray:
    """Sorted minimizers of ``g(u) + (u - x)**2 / (2 t)``.

    A flat set of minimizers shows up as a run of points at coarse-grid spacing.
    """
    return grid_search(g, t, x, grid)[0]


def grid_env(g: ScalarFn, t: float, x: float, grid: GridSpec = DEFAULT_GRID) -> float:
    return grid_search(g, t, x, grid)[1]


def second_difference_min(g: ScalarFn, lo: float, hi: float, n: int) -> float:
    """Smallest ``g(x-h) - 2 g(x) + g(x+h)`` over the interior of a uniform n-point grid."""
    if n < 3:
        raise ValueError("n must be at least 3")
    u = np.linspace(lo, hi, n)
    v = np.asarray(g(u), dtype=float)
    if not np.isfinite(v).all():
        raise EmptyDomain(f"g is not finite on all of [{lo}, {hi}]")
    return float(np.min(v[:-2] - 2.0 * v[1:-1] + v[2:]))


def _only_zero(g: ScalarFn, beta: float, x: float, grid: GridSpec) -> bool:
    pts = grid_prox(g, beta, x, grid)
    return bool(np.all(np.abs(pts) <= 1e-9))


def _edge(g: ScalarFn, beta: float, sign: float, x_max: float, n_scan: int, grid: GridSpec) -> float:
    xs = sign * np.linspace(0.0, x_max, n_scan + 1)[1:]
    inside = 0.0
    for xv in xs:
        if not _only_zero(g, beta, float(xv), grid):
            outside = float(xv)
            break
        inside = float(xv)
    else:
        return sign * math.inf
    for _ in range(40):
        mid = 0.5 * (inside + outside)
        if _only_zero(g, beta, mid, grid):
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def zero_set_scan(
    spec: PenaltySpec,
    alpha: float,
    beta: float,
    x_max: Optional[float] = None,
    n_scan: int = 200,
    grid: GridSpec = DEFAULT_GRID,
) -> tuple[float, float]:
    """Empirical edges of the interval around 0 that the prox maps to {0} only.

    Scans ``n_scan`` points per side up to ``x_max`` and bisects the first
    transition.  A side that never leaves {0} is reported as infinite.
    """
    if x_max is None:
        b = max(abs(spec.coeffs.b1), abs(spec.coeffs.b2), 1.0)
        x_max = 4.0 * max(alpha, beta, 1.0) * b

    def g(u: np.ndarray) -> np.ndarray:
        return falpha_values(spec, alpha, u)

    return _edge(g, beta, -1.0, x_max, n_scan, grid), _edge(g, beta, 1.0, x_max, n_scan, grid)
