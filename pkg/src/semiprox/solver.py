"""Penalized least squares with a separable semiconvex penalty.

Minimizes

    (1 / 2n) ||y - X gamma||^2 + lambda * sum_j f_alpha(gamma_j)

by forward-backward splitting: a gradient step of size ``beta`` on the data
term followed by the coordinatewise prox of ``lambda * f_alpha``, which is the
prox of ``f_alpha`` with step ``lambda * beta``.  With ``beta <= 1/L`` every
iteration is a majorize-minimize step, so the objective never increases.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .moreau import falpha_values
from .penalty import ABS, PenaltySpec
from .prox import prox_select_values

__all__ = [
    "StepTooLarge",
    "NonFiniteIterate",
    "RegressionProblem",
    "SolveConfig",
    "SolveReport",
    "lipschitz_bound",
    "objective",
    "solve",
    "make_synthetic",
]

log = logging.getLogger(__name__)


class StepTooLarge(ValueError):
    pass


class NonFiniteIterate(ArithmeticError):
    pass


@dataclass
class RegressionProblem:
    X: np.ndarray
    y: np.ndarray
    penalty: Union[PenaltySpec, Sequence[PenaltySpec]] = ABS
    alpha: float = 1.0
    lambda_scale: float = 1.0

    def __post_init__(self) -> None:
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=float).ravel()
        n, p = self.X.shape
        if n < 1 or p < 1:
            raise ValueError("X must have at least one row and one column")
        if self.y.size != n:
            raise ValueError(f"y has {self.y.size} entries, X has {n} rows")
        if not (np.isfinite(self.X).all() and np.isfinite(self.y).all()):
            raise ValueError("X and y must be finite")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.lambda_scale >= 0:
            raise ValueError("lambda_scale must be nonnegative")
        if not isinstance(self.penalty, PenaltySpec) and len(self.penalty) != p:
            raise ValueError(f"{len(self.penalty)} penalties for {p} coefficients")

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape

    def penalty_groups(self) -> list[tuple[PenaltySpec, np.ndarray]]:
        """Coordinates grouped by identical penalty spec."""
        p = self.X.shape[1]
        if isinstance(self.penalty, PenaltySpec):
            return [(self.penalty, np.arange(p))]
        groups: dict[PenaltySpec, list[int]] = {}
        for j, spec in enumerate(self.penalty):
            groups.setdefault(spec, []).append(j)
        return [(s, np.asarray(ix)) for s, ix in groups.items()]


@dataclass(frozen=True)
class SolveConfig:
    beta: float
    max_iter: int = 10000
    rel_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class SolveReport:
    gamma_hat: np.ndarray
    objective_trace: list[float]
    support: list[int]
    iterations: int
    converged: bool
    lipschitz: float = field(default=float("nan"), repr=False)

    def to_dict(self) -> dict:
        return {
            "gamma_hat": [float(v) for v in self.gamma_hat],
            "support": list(self.support),
            "iterations": self.iterations,
            "converged": self.converged,
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def lipschitz_bound(X: np.ndarray, n: int | None = None, max_iter: int = 10000, tol: float = 1e-10) -> float:
    """Upper estimate of ``||X^T X||_2 / n`` by power iteration.

    Iterates until the eigen-residual ``||A v - rho v||`` drops below
    ``tol * rho``; the returned value is ``rho`` padded by that residual.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n = X.shape[0] if n is None else n
    # iterate on the smaller Gram matrix; both share the top eigenvalue
    A = X.T @ X if X.shape[1] <= X.shape[0] else X @ X.T
    v = np.ones(A.shape[0]) / np.sqrt(A.shape[0])
    rho, resid = 0.0, np.inf
    for _ in range(max_iter):
        w = A @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        Av = A @ v
        rho = float(v @ Av)
        resid = float(np.linalg.norm(Av - rho * v))
        if resid <= tol * rho:
            break
    return (rho + resid) / n


def _penalty_value(problem: RegressionProblem, gamma: np.ndarray) -> float:
    total = 0.0
    for spec, ix in problem.penalty_groups():
        total += float(np.sum(falpha_values(spec, problem.alpha, gamma[ix])))
    return total


def objective(problem: RegressionProblem, gamma: np.ndarray) -> float:
    n = problem.X.shape[0]
    r = problem.y - problem.X @ gamma
    value = float(r @ r) / (2.0 * n)
    if problem.lambda_scale > 0:
        value += problem.lambda_scale * _penalty_value(problem, gamma)
    return value


def solve(problem: RegressionProblem, config: SolveConfig) -> SolveReport:
    """Forward-backward iterations from ``gamma = 0``.

    Set-valued prox steps take the element of smallest magnitude.  Stops when
    ``||gamma_new - gamma|| / max(1, ||gamma||) <= rel_tol`` or after ``max_iter``.
    """
    X, y = problem.X, problem.y
    n, p = X.shape
    lam, alpha, beta = problem.lambda_scale, problem.alpha, config.beta
    L = lipschitz_bound(X, n)
    if L > 0 and beta * L > 1.0 + 1e-12:
        raise StepTooLarge(f"beta={beta} exceeds 1/L={1.0 / L}")
    step = lam * beta
    if lam > 0 and not step < alpha:
        raise StepTooLarge(f"effective step lambda*beta={step} must be below alpha={alpha}")

    G = X.T @ X / n
    c = X.T @ y / n
    groups = problem.penalty_groups()
    gamma = np.zeros(p)
    trace = [objective(problem, gamma)]
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        z = gamma - beta * (G @ gamma - c)
        if lam > 0:
            new = np.empty(p)
            for spec, ix in groups:
                new[ix] = prox_select_values(spec, alpha, step, z[ix])
        else:
            new = z
        if not np.isfinite(new).all():
            raise NonFiniteIterate(f"non-finite iterate at iteration {it}")
        change = np.linalg.norm(new - gamma) / max(1.0, np.linalg.norm(gamma))
        gamma = new
        trace.append(objective(problem, gamma))
        if change <= config.rel_tol:
            converged = True
            break
    log.debug("solve: %d iterations, converged=%s", it, converged)
    support = [int(j) for j in np.flatnonzero(gamma != 0.0)]
    return SolveReport(gamma, trace, support, it, converged, lipschitz=L)


def make_synthetic(
    n: int,
    p: int,
    k_sparse: int,
    noise_sigma: float,
    seed: int,
    penalty: Union[PenaltySpec, Sequence[PenaltySpec]] = ABS,
    alpha: float = 1.0,
    lambda_scale: float = 1.0,
) -> tuple[RegressionProblem, np.ndarray]:
    """Gaussian design with unit-norm columns and a ``k_sparse``-sparse truth.

    Nonzero coefficients have magnitude in [1, 2] and random sign.  Returns the
    problem and the true coefficient vector; identical seeds give identical output.
    """
    if not 0 <= k_sparse <= p:
        raise ValueError("k_sparse must lie in [0, p]")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    X /= np.linalg.norm(X, axis=0)
    gamma = np.zeros(p)
    where = np.sort(rng.choice(p, size=k_sparse, replace=False))
    gamma[where] = rng.uniform(1.0, 2.0, size=k_sparse) * rng.choice([-1.0, 1.0], size=k_sparse)
    y = X @ gamma
    if noise_sigma > 0:
        y = y + noise_sigma * rng.standard_normal(n)
    return RegressionProblem(X, y, penalty, alpha, lambda_scale), gamma
