"""Closed-form Moreau envelope and proximity operator of the base penalties,
and the semiconvex penalty ``f_alpha = f - env_{alpha f}``.

All ``*_values`` functions are vectorized over ``x``; the scalar wrappers are
thin conveniences for single points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from .penalty import PenaltySpec, QuadCoeffs, _quad_values, f_values

__all__ = [
    "MoreauParams",
    "Piece",
    "prox_base",
    "prox_base_values",
    "prox_restricted",
    "env",
    "env_values",
    "eval_falpha",
    "falpha_values",
    "falpha_pieces",
]


def _check_positive(name: str, v: float) -> float:
    v = float(v)
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"{name} must be a positive finite real, got {v!r}")
    return v


@dataclass(frozen=True)
class MoreauParams:
    alpha: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", _check_positive("alpha", self.alpha))


def _prox_quad(c: QuadCoeffs, alpha: float, x: np.ndarray) -> np.ndarray:
    left = np.minimum(0.0, (x - alpha * c.b1) / (alpha * c.a1 + 1.0))
    right = np.maximum(0.0, (x - alpha * c.b2) / (alpha * c.a2 + 1.0))
    return np.where(x < 0, left, right)


def prox_base_values(spec: PenaltySpec, alpha: float, x: Any) -> np.ndarray:
    """Vectorized ``prox_{alpha f}``; with an interval, the unconstrained prox clamped into it."""
    alpha = _check_positive("alpha", alpha)
    x = np.asarray(x, dtype=float)
    p = _prox_quad(spec.coeffs, alpha, x)
    if spec.constraint is not None:
        # the unconstrained prox moves toward 0 and the interval contains 0, so clamping is exact
        p = np.clip(p, spec.lo, spec.hi)
    return p


def prox_base(spec: PenaltySpec, alpha: float, x: float) -> float:
    return float(prox_base_values(spec, alpha, x))


def prox_restricted(spec: PenaltySpec, alpha: float, x: float) -> float:
    if spec.constraint is None:
        raise ValueError("prox_restricted needs a spec with an interval")
    return prox_base(spec, alpha, x)


def _env_quad(c: QuadCoeffs, alpha: float, x: np.ndarray, fx: Any = None) -> np.ndarray:
    fx = _quad_values(c, x) if fx is None else fx
    left = x <= alpha * c.b1
    a = np.where(left, c.a1, c.a2)
    b = np.where(left, c.b1, c.b2)
    outer = (fx - 0.5 * alpha * b * b) / (alpha * a + 1.0)
    mid = ~left & (x < alpha * c.b2)
    return np.where(mid, x * x / (2.0 * alpha), outer) + 0.0


def env_values(spec: PenaltySpec, alpha: float, x: Any) -> np.ndarray:
    """Vectorized ``env_{alpha f}``; finite everywhere, also off the interval."""
    alpha = _check_positive("alpha", alpha)
    x = np.asarray(x, dtype=float)
    if spec.constraint is None:
        return _env_quad(spec.coeffs, alpha, x)
    p = prox_base_values(spec, alpha, x)
    return _quad_values(spec.coeffs, p) + (p - x) ** 2 / (2.0 * alpha)


def env(spec: PenaltySpec, alpha: float, x: float) -> float:
    return float(env_values(spec, alpha, x))


def falpha_values(spec: PenaltySpec, alpha: float, x: Any) -> np.ndarray:
    """Vectorized ``f_alpha = f - env_{alpha f}``; ``inf`` off the interval.

    On the interval ``f_alpha`` is built from the unrestricted base penalty and
    its envelope.
    """
    alpha = _check_positive("alpha", alpha)
    x = np.asarray(x, dtype=float)
    c = spec.coeffs
    # f - env simplifies to fx - x^2/(2 alpha) between alpha*b1 and alpha*b2
    # and to (alpha a fx + alpha b^2 / 2) / (alpha a + 1) outside
    left = x <= 0.0 if c.b1 == 0.0 else x < 0.0
    ka1, ka2 = alpha * c.a1 + 1.0, alpha * c.a2 + 1.0
    a = np.where(left, c.a1, c.a2)
    b = np.where(left, c.b1, c.b2)
    fx = (0.5 * a * x + b) * x
    slope = np.where(left, (ka1 - 1.0) / ka1, (ka2 - 1.0) / ka2)
    shift = np.where(left, 0.5 * alpha * c.b1 ** 2 / ka1, 0.5 * alpha * c.b2 ** 2 / ka2)
    mid = (x > alpha * c.b1) & (x < alpha * c.b2)
    inside = np.where(mid, fx - x * x * (0.5 / alpha), slope * fx + shift)
    if spec.constraint is None:
        return inside
    ok = (x >= spec.lo) & (x <= spec.hi)
    # never subtract from inf: compute on the finite branch only
    return np.where(ok, inside, np.inf)


def eval_falpha(spec: PenaltySpec, alpha: float, x: float) -> float:
    return float(falpha_values(spec, alpha, x))


@dataclass(frozen=True)
class Piece:
    """``f_alpha(u) = quad * u**2 + lin * u + const`` for ``u`` in ``[lo, hi]``."""

    lo: float
    hi: float
    quad: float
    lin: float
    const: float

    def __call__(self, u: float) -> float:
        return (self.quad * u + self.lin) * u + self.const


def _right_pieces(a: float, b: float, alpha: float) -> list[Piece]:
    # f_alpha on [0, inf) for slope b >= 0 and curvature a >= 0
    k = alpha * a + 1.0
    outer = Piece(alpha * b, math.inf, 0.5 * alpha * a * a / k, alpha * a * b / k, 0.5 * alpha * b * b / k)
    if b == 0.0:
        return [Piece(0.0, math.inf, outer.quad, outer.lin, outer.const)]
    return [Piece(0.0, alpha * b, 0.5 * (a - 1.0 / alpha), b, 0.0), outer]


def falpha_pieces(coeffs: QuadCoeffs, alpha: float) -> list[Piece]:
    """Quadratic pieces of the unrestricted ``f_alpha``, ordered left to right.

    Breakpoints sit at ``alpha*b1``, ``0`` and ``alpha*b2``.
    """
    alpha = _check_positive("alpha", alpha)
    right = _right_pieces(coeffs.a2, coeffs.b2, alpha)
    mirror = _right_pieces(coeffs.a1, -coeffs.b1, alpha)
    left = [Piece(-p.hi, -p.lo, p.quad, -p.lin, p.const) for p in reversed(mirror)]
    return left + right
