"""Built-in stochastic objectives and the audit of their assumption constants."""

from __future__ import annotations

import numpy as np

from .audit import AuditEntry, AuditReport, assumption_audit, default_grid
from .base import EMPIRICAL, EXACT, AssumptionConstants, AssumptionError, Problem
from .linreg import LinearRegression, linreg_gradient
from .logistic import LogisticRegression, logistic_gradient
from .median import GeometricMedian, geomedian_gradient

KINDS = {"linreg": LinearRegression, "median": GeometricMedian, "logistic": LogisticRegression}


def constants_for(problem: Problem, theta0=None) -> AssumptionConstants:
    """Assumption constants with provenance flags, including ``u0, v0`` for a deterministic start."""
    return problem.assumption_constants(theta0)


def suboptimality(problem: Problem, h, budget: int | None = None, rng=None) -> tuple[float, float]:
    """``(G(h) - G(theta), stderr)``; exact for linear regression, Monte-Carlo otherwise."""
    if budget is not None and budget < 1:
        raise ValueError("budget must be >= 1")
    value, se = problem.objective_gap(h, budget=budget, rng=rng)
    if value < -5.0 * se:
        raise AssertionError(f"suboptimality estimate {value} is more than 5 stderr below zero")
    return float(value), float(se)


def make_problem(kind: str, dim: int = 3, theta=None, scale: float = 1.0, noise: float = 1.0,
                 r_lambda0: float | None = None, **common) -> Problem:
    """Instantiate a built-in problem; ``scale`` is the design scale, spread or radius by kind."""
    if kind not in KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; choose from {sorted(KINDS)}")
    theta = None if theta is None else np.asarray(theta, dtype=float)
    if kind == "linreg":
        return LinearRegression(dim, theta, design_scale=scale, noise=noise, **common)
    if kind == "median":
        return GeometricMedian(dim, theta, spread=scale, r_lambda0=r_lambda0, **common)
    return LogisticRegression(dim, theta, radius=scale, r_lambda0=1.0 if r_lambda0 is None else r_lambda0,
                              **common)


__all__ = [
    "EMPIRICAL", "EXACT", "KINDS", "AssumptionConstants", "AssumptionError", "AuditEntry", "AuditReport",
    "GeometricMedian", "LinearRegression", "LogisticRegression", "Problem", "assumption_audit",
    "constants_for", "default_grid", "geomedian_gradient", "linreg_gradient", "logistic_gradient",
    "make_problem", "suboptimality",
]
