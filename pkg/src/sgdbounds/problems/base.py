"""Shared types for the problem zoo: assumption constants and the problem contract."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

EXACT = "exact"
EMPIRICAL = "empirical-with-margin"

_NONNEG = ("C1", "C2", "C1p", "C2p", "C_lambda0", "u0", "v0")
_POSITIVE = ("L_grad_G", "lambda_min", "lambda_0", "r_lambda0")


class AssumptionError(ValueError):
    """A problem instance cannot certify one of its structural assumptions."""


@dataclass(frozen=True)
class AssumptionConstants:
    """Constants of the moment, curvature and smoothness assumptions for one instance.

    ``r_lambda0`` may be ``math.inf``. ``L_Sigma`` and ``trace_term`` are
    optional; without them the Cramer-Rao type bounds are unavailable.
    ``provenance`` maps field names to ``"exact"`` or ``"empirical-with-margin"``.
    """

    C1: float
    C2: float
    C1p: float
    C2p: float
    L_grad_G: float
    lambda_min: float
    lambda_0: float
    r_lambda0: float
    C_lambda0: float
    u0: float
    v0: float
    L_Sigma: Optional[float] = None
    trace_term: Optional[float] = None
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in _NONNEG:
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise AssumptionError(f"{name} must be a finite nonnegative number, got {value!r}")
        for name in _POSITIVE:
            value = getattr(self, name)
            if not value > 0 or math.isnan(value):
                raise AssumptionError(f"{name} must be positive, got {value!r}")
            if name != "r_lambda0" and not math.isfinite(value):
                raise AssumptionError(f"{name} must be finite, got {value!r}")
        for name in ("L_Sigma", "trace_term"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 and math.isfinite(value)):
                raise AssumptionError(f"{name} must be absent or finite nonnegative, got {value!r}")
        # relative slack so that analytically equal eigenvalues survive rounding
        tol = 1e-12 * self.L_grad_G
        if self.lambda_min > self.L_grad_G + tol or self.lambda_0 > self.L_grad_G + tol:
            raise AssumptionError("eigenvalue ordering violated: need lambda_min, lambda_0 <= L_grad_G")

    @property
    def bounded_gradient(self) -> bool:
        return self.C2 == 0 and self.C2p == 0

    @property
    def has_lipschitz_variance(self) -> bool:
        return self.L_Sigma is not None and self.trace_term is not None

    @property
    def min_one_r2(self) -> float:
        return min(1.0, self.r_lambda0 ** 2)

    @property
    def L_delta(self) -> float:
        """Constant controlling the linearisation remainder by the objective gap."""
        inner = 2.0 * self.C_lambda0 / self.lambda_0
        outer = 0.0 if math.isinf(self.r_lambda0) else 2.0 * self.L_grad_G / (self.lambda_0 * self.r_lambda0)
        return max(inner, outer)

    def flag(self, name: str) -> str:
        return self.provenance.get(name, EXACT)

    def with_initial(self, u0: float, v0: float) -> "AssumptionConstants":
        return replace(self, u0=u0, v0=v0, provenance={**self.provenance, "u0": EXACT, "v0": EXACT})

    def as_rows(self):
        """``(name, value, provenance)`` triples in declaration order."""
        rows = []
        for f in fields(self):
            if f.name == "provenance":
                continue
            rows.append((f.name, getattr(self, f.name), self.flag(f.name)))
        return rows


def mc_mean(values: np.ndarray) -> tuple[float, float]:
    """Sample mean and its standard error along the first axis."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ValueError("need at least two samples for a standard error")
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / math.sqrt(n)
    return mean, se


class Problem:
    """Stochastic objective ``G(h) = E[g(X, h)]`` with a known minimiser.

    Subclasses provide single-observation methods (``sample``, ``loss``,
    ``gradient``) used by the reference path and tests, batched versions
    used by Monte-Carlo estimators, and a numba trajectory kernel id for
    the replicate runner.
    """

    kind = "abstract"
    kernel_id = -1
    # exact closed-form objective gap available for the runner
    has_closed_form_gap = False

    def __init__(self, dim: int, theta: np.ndarray, scale: float = 1.0, audit_seed: int = 20240607,
                 audit_budget: int = 200_000, safety: float = 2.0):
        if dim < 1:
            raise ValueError("dimension must be >= 1")
        theta = np.array(theta, dtype=float, ndmin=1)
        if theta.shape != (dim,):
            raise ValueError(f"optimum must have shape ({dim},), got {theta.shape}")
        if safety < 1:
            raise ValueError("safety factor must be >= 1")
        self.dim = dim
        self.theta = theta
        self.scale = float(scale)
        self.audit_seed = int(audit_seed)
        self.audit_budget = int(audit_budget)
        self.safety = float(safety)

    def dimension(self) -> int:
        return self.dim

    def optimum(self) -> np.ndarray:
        return self.theta.copy()

    def _check_h(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        if h.shape != (self.dim,):
            raise ValueError(f"point must have shape ({self.dim},), got {h.shape}")
        return h

    # -- single observations -------------------------------------------------
    def sample(self, rng: np.random.Generator):
        raise NotImplementedError

    def loss(self, obs, h) -> float:
        raise NotImplementedError

    def gradient(self, obs, h) -> np.ndarray:
        raise NotImplementedError

    # -- batches ---------------------------------------------------------------
    def sample_batch(self, rng: np.random.Generator, size: int):
        raise NotImplementedError

    def loss_batch(self, batch, h) -> np.ndarray:
        raise NotImplementedError

    def gradient_batch(self, batch, h) -> np.ndarray:
        raise NotImplementedError

    # -- population quantities ---------------------------------------------
    def objective_gap(self, h, budget: int | None = None, rng: np.random.Generator | None = None):
        """``G(h) - G(theta)`` as ``(value, stderr)``; Monte-Carlo unless overridden."""
        h = self._check_h(h)
        budget = budget or self.audit_budget
        rng = rng if rng is not None else np.random.default_rng(self.audit_seed)
        batch = self.sample_batch(rng, budget)
        diff = self.loss_batch(batch, h) - self.loss_batch(batch, self.theta)
        return mc_mean(diff)

    def mean_gradient(self, h, budget: int | None = None, rng: np.random.Generator | None = None):
        """``grad G(h)`` as ``(vector, stderr of its norm)``; common random numbers against theta."""
        h = self._check_h(h)
        budget = budget or self.audit_budget
        rng = rng if rng is not None else np.random.default_rng(self.audit_seed)
        batch = self.sample_batch(rng, budget)
        diff = self.gradient_batch(batch, h) - self.gradient_batch(batch, self.theta)
        mean, se = mc_mean(diff)
        return mean, float(np.sqrt(np.sum(se ** 2)))

    def gradient_moments(self, h, budget: int | None = None, rng: np.random.Generator | None = None):
        """Second and fourth moments of the gradient norm at ``h`` with standard errors."""
        h = self._check_h(h)
        budget = budget or self.audit_budget
        rng = rng if rng is not None else np.random.default_rng(self.audit_seed)
        batch = self.sample_batch(rng, budget)
        sq = np.sum(self.gradient_batch(batch, h) ** 2, axis=1)
        m2, se2 = mc_mean(sq)
        m4, se4 = mc_mean(sq ** 2)
        return float(m2), float(se2), float(m4), float(se4)

    def closed_form_gap(self, h) -> np.ndarray:
        """Exact ``G(h) - G(theta)`` for an array of points (last axis = d)."""
        raise NotImplementedError(f"{self.kind} has no closed-form objective gap")

    def gap_at(self, points, budget: int | None = None) -> np.ndarray:
        """Objective gap at each row of ``points``: exact when available, else Monte-Carlo."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if self.has_closed_form_gap:
            return np.asarray(self.closed_form_gap(points), dtype=float)
        rng_seed = self.audit_seed + 2
        return np.array([self.objective_gap(h, budget=budget, rng=np.random.default_rng(rng_seed))[0]
                         for h in points])

    def hessian_at_optimum(self) -> np.ndarray:
        raise NotImplementedError

    def assumption_constants(self, theta0=None) -> AssumptionConstants:
        raise NotImplementedError

    # -- runner plumbing ---------------------------------------------------
    def kernel_params(self) -> np.ndarray:
        raise NotImplementedError

    def initial_moments(self, theta0) -> tuple[float, float]:
        """``(u0, v0)`` for a deterministic start."""
        theta0 = self._check_h(np.asarray(theta0, dtype=float))
        v0 = float(np.sum((theta0 - self.theta) ** 2))
        if self.has_closed_form_gap:
            gap = float(self.closed_form_gap(theta0))
        else:
            gap, _ = self.objective_gap(theta0, budget=max(self.audit_budget, 10 ** 6))
            gap = max(float(gap), 0.0)
        return gap ** 2, v0

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "theta": self.theta.tolist(), "scale": self.scale}


def unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
