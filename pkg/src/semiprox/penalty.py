"""Piecewise quadratic sparsity-promoting penalties, optionally restricted to an interval.

A base penalty is

    f(x) = a1 x^2 / 2 + b1 x   for x <= 0
    f(x) = a2 x^2 / 2 + b2 x   for x >= 0

plus, optionally, the indicator of a closed interval [lo, hi] containing 0.
Values off the interval are ``math.inf``; no arithmetic is ever performed on
them, so evaluation never produces NaN.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

__all__ = [
    "RejectedCoeffs",
    "QuadCoeffs",
    "Interval",
    "PenaltySpec",
    "validate",
    "eval_f",
    "f_values",
    "subdiff_at_zero",
    "eval_l0",
    "indicator",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
    "ABS",
    "RELU",
    "ELASTIC_NET",
    "box_abs",
]


class RejectedCoeffs(ValueError):
    """Raised when coefficients or an interval do not define a sparsity-promoting penalty."""


def _check_finite(**values: float) -> None:
    for name, v in values.items():
        if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
            raise RejectedCoeffs(f"{name} must be a finite real, got {v!r}")


@dataclass(frozen=True)
class QuadCoeffs:
    """Curvatures ``a1, a2`` and one-sided slopes ``b1, b2`` at the origin."""

    a1: float
    a2: float
    b1: float
    b2: float

    def __post_init__(self) -> None:
        _check_finite(a1=self.a1, a2=self.a2, b1=self.b1, b2=self.b2)
        for name in ("a1", "a2", "b1", "b2"):
            object.__setattr__(self, name, float(getattr(self, name)))
        # exact comparisons: the conditions are closed inequalities plus one strict one
        if not self.a1 >= 0:
            raise RejectedCoeffs(f"a1 >= 0 violated (a1={self.a1})")
        if not self.a2 >= 0:
            raise RejectedCoeffs(f"a2 >= 0 violated (a2={self.a2})")
        if not self.b1 <= 0:
            raise RejectedCoeffs(f"b1 <= 0 violated (b1={self.b1})")
        if not self.b2 >= 0:
            raise RejectedCoeffs(f"b2 >= 0 violated (b2={self.b2})")
        if not self.b2 - self.b1 > 0:
            raise RejectedCoeffs(f"b2 - b1 > 0 violated (b1={self.b1}, b2={self.b2})")

    @classmethod
    def _zero(cls) -> "QuadCoeffs":
        # Only reachable through indicator(); skips the strict slope-gap check.
        obj = object.__new__(cls)
        for name in ("a1", "a2", "b1", "b2"):
            object.__setattr__(obj, name, 0.0)
        return obj

    @property
    def is_zero(self) -> bool:
        return self.a1 == self.a2 == self.b1 == self.b2 == 0.0

    def mirrored(self) -> "QuadCoeffs":
        """Coefficients of ``x -> f(-x)``."""
        if self.is_zero:
            return self
        return QuadCoeffs(self.a2, self.a1, -self.b2, -self.b1)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with ``lo <= 0 <= hi``; either end may be infinite."""

    lo: float = -math.inf
    hi: float = math.inf

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise RejectedCoeffs("interval endpoints must not be NaN")
        if not lo <= 0.0:
            raise RejectedCoeffs(f"interval lo <= 0 violated (lo={lo})")
        if not hi >= 0.0:
            raise RejectedCoeffs(f"interval hi >= 0 violated (hi={hi})")
        if not hi - lo > 0:
            raise RejectedCoeffs("interval must not reduce to {0}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def is_unbounded(self) -> bool:
        return self.lo == -math.inf and self.hi == math.inf

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def mirrored(self) -> "Interval":
        return Interval(-self.hi, -self.lo)


@dataclass(frozen=True)
class PenaltySpec:
    """A validated base penalty ``f`` or ``f + indicator(C)``.

    A constraint of ``(-inf, inf)`` is stored as ``None`` so both spellings compare equal.
    """

    coeffs: QuadCoeffs
    constraint: Optional[Interval] = None

    def __post_init__(self) -> None:
        c = self.constraint
        if c is not None and c.is_unbounded:
            object.__setattr__(self, "constraint", None)
            c = None
        if self.coeffs.is_zero:
            if c is None or not (c.lo == 0.0 or c.hi == 0.0):
                raise RejectedCoeffs("a pure indicator needs an interval with 0 on its boundary")
            return
        if c is not None:
            # {0} must be a proper subset of [b1, b2] ∩ [lo, hi]
            left = self.coeffs.b1 < 0 and c.lo < 0
            right = self.coeffs.b2 > 0 and c.hi > 0
            if not (left or right):
                raise RejectedCoeffs(
                    "subdifferential at 0 meets the interval only in {0}; penalty is not sparsity promoting"
                )

    @property
    def is_indicator(self) -> bool:
        return self.coeffs.is_zero

    @property
    def lo(self) -> float:
        return -math.inf if self.constraint is None else self.constraint.lo

    @property
    def hi(self) -> float:
        return math.inf if self.constraint is None else self.constraint.hi

    def mirrored(self) -> "PenaltySpec":
        """Spec of ``x -> f(-x)``."""
        c = None if self.constraint is None else self.constraint.mirrored()
        return PenaltySpec(self.coeffs.mirrored(), c)

    def unconstrained(self) -> "PenaltySpec":
        if self.constraint is None:
            return self
        if self.is_indicator:
            raise RejectedCoeffs("an indicator has no unconstrained counterpart")
        return PenaltySpec(self.coeffs)


def validate(a1: float, a2: float, b1: float, b2: float) -> QuadCoeffs:
    """Return :class:`QuadCoeffs` or raise :class:`RejectedCoeffs` naming the violated inequality."""
    return QuadCoeffs(a1, a2, b1, b2)


def indicator(interval: Interval) -> PenaltySpec:
    """Pure indicator of ``interval``; sparsity promoting only when 0 is a boundary point."""
    return PenaltySpec(QuadCoeffs._zero(), interval)


def box_abs(lam: float) -> PenaltySpec:
    """``|x|`` restricted to ``[-lam, lam]``."""
    return PenaltySpec(QuadCoeffs(0, 0, -1, 1), Interval(-lam, lam))


ABS = PenaltySpec(QuadCoeffs(0, 0, -1, 1))
RELU = PenaltySpec(QuadCoeffs(0, 0, 0, 1))
ELASTIC_NET = PenaltySpec(QuadCoeffs(1, 1, -1, 1))


def _quad_values(c: QuadCoeffs, x: np.ndarray) -> np.ndarray:
    # x = 0 goes to the right branch; both branches give 0 there
    neg = x < 0
    a = np.where(neg, c.a1, c.a2)
    b = np.where(neg, c.b1, c.b2)
    return (0.5 * a * x + b) * x


def f_values(spec: PenaltySpec, x: Any) -> np.ndarray:
    """Vectorized base penalty; ``inf`` off the interval."""
    x = np.asarray(x, dtype=float)
    out = _quad_values(spec.coeffs, x)
    if spec.constraint is not None:
        out = np.where((x >= spec.lo) & (x <= spec.hi), out, np.inf)
    return out


def eval_f(spec: PenaltySpec, x: float) -> float:
    return float(f_values(spec, x))


def subdiff_at_zero(spec: PenaltySpec) -> tuple[float, float]:
    """Endpoints ``(b1, b2)`` of the subdifferential at 0 (the interval does not change it)."""
    return spec.coeffs.b1, spec.coeffs.b2


def eval_l0(x: float) -> int:
    return 1 if x != 0 else 0


def _parse_bound(v: Any, name: str) -> float:
    if isinstance(v, str):
        if v in ("inf", "+inf"):
            return math.inf
        if v == "-inf":
            return -math.inf
        raise RejectedCoeffs(f"{name}: unrecognised token {v!r}")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise RejectedCoeffs(f"{name}: expected a number, got {v!r}")
    return float(v)


def spec_from_dict(doc: Any) -> PenaltySpec:
    """Parse ``{"a1":..,"a2":..,"b1":..,"b2":..,"interval":[lo,hi]|null}``.

    An all-zero coefficient set with an interval yields the pure indicator.
    """
    if not isinstance(doc, dict):
        raise RejectedCoeffs("penalty spec must be a JSON object")
    vals = {}
    for key in ("a1", "a2", "b1", "b2"):
        if key not in doc:
            raise RejectedCoeffs(f"missing field {key!r}")
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise RejectedCoeffs(f"{key}: expected a number, got {v!r}")
        vals[key] = float(v)
    unknown = set(doc) - {"a1", "a2", "b1", "b2", "interval"}
    if unknown:
        raise RejectedCoeffs(f"unknown fields: {sorted(unknown)}")
    raw = doc.get("interval")
    interval = None
    if raw is not None:
        if not isinstance(raw, (list, tuple)) or len(raw) != 2:
            raise RejectedCoeffs("interval must be [lo, hi] or null")
        interval = Interval(_parse_bound(raw[0], "interval[0]"), _parse_bound(raw[1], "interval[1]"))
    if all(v == 0.0 for v in vals.values()):
        if interval is None:
            raise RejectedCoeffs("b2 - b1 > 0 violated (b1=0.0, b2=0.0)")
        return indicator(interval)
    return PenaltySpec(QuadCoeffs(**vals), interval)


def _bound_token(v: float) -> Any:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return v


def spec_to_dict(spec: PenaltySpec) -> dict:
    c = spec.coeffs
    interval = None
    if spec.constraint is not None:
        interval = [_bound_token(spec.lo), _bound_token(spec.hi)]
    return {"a1": c.a1, "a2": c.a2, "b1": c.b1, "b2": c.b2, "interval": interval}


def load_spec(path: str) -> PenaltySpec:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RejectedCoeffs(f"malformed JSON: {exc}") from exc
    return spec_from_dict(doc)
