"""Replicated SGD runs and statistical comparison with the bound curves."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ._kernels import trajectory
from .algorithms import StepSchedule
from .bounds import BoundCurve
from .problems.base import Problem

MAX_HORIZON = 10 ** 7
DIVERGENCE_TOLERANCE = 0.01


class DivergenceError(RuntimeError):
    """Too many replicates produced non-finite iterates."""


@dataclass(frozen=True)
class ErrorCurves:
    """Per-checkpoint mean and variance of the three squared errors over replicates."""

    checkpoints: np.ndarray
    mean_sq_sgd: np.ndarray
    var_sq_sgd: np.ndarray
    mean_sq_avg: np.ndarray
    var_sq_avg: np.ndarray
    mean_sq_subopt: np.ndarray
    var_sq_subopt: np.ndarray
    R: int
    seed: int
    n_diverged: int = 0

    def __post_init__(self):
        if self.R < 2:
            raise ValueError("need at least two replicates")
        if np.any(np.diff(self.checkpoints) <= 0):
            raise ValueError("checkpoints must be strictly increasing")

    def mean(self, quantity: str) -> np.ndarray:
        return getattr(self, "mean_" + _column(quantity))

    def var(self, quantity: str) -> np.ndarray:
        return getattr(self, "var_" + _column(quantity))


def _column(quantity: str) -> str:
    cols = {"sq_sgd": "sq_sgd", "sq_subopt": "sq_subopt", "root_avg": "sq_avg", "sq_avg": "sq_avg"}
    if quantity not in cols:
        raise ValueError(f"unknown quantity {quantity!r}")
    return cols[quantity]


def geometric_checkpoints(n_max: int) -> np.ndarray:
    """``ceil(10^(k/4))`` for ``k = 0..28``, deduplicated and capped at ``n_max``."""
    pts = sorted({math.ceil(round(10 ** (k / 4), 9)) for k in range(29)})
    return np.array([p for p in pts if p <= n_max], dtype=np.int64)


def replicate_generator(master_seed: int, key) -> np.random.Generator:
    """Independent stream for one replicate, derived from the master seed and the replicate key."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(int(key),))
    return np.random.Generator(np.random.PCG64(ss))


def run_replicates(problem: Problem, schedule: StepSchedule, theta0, R: int, checkpoints=None,
                   master_seed: int = 0, threads: int = 1, n_max: int | None = None,
                   subopt_budget: int | None = None, replicate_keys=None) -> ErrorCurves:
    """Simulate ``R`` independent trajectories and pool their squared errors at each checkpoint.

    ``replicate_keys`` overrides the per-replicate stream keys (default ``0..R-1``).
    The result does not depend on ``threads``: every replicate writes its own
    rows and the reduction runs in replicate order afterwards.
    """
    if R < 2:
        raise ValueError("need at least two replicates")
    if checkpoints is None:
        if n_max is None:
            raise ValueError("give either checkpoints or n_max")
        checkpoints = geometric_checkpoints(n_max)
    cps = np.asarray(checkpoints, dtype=np.int64)
    if cps.ndim != 1 or cps.size == 0 or np.any(np.diff(cps) <= 0) or cps[0] < 0:
        raise ValueError("checkpoints must be a nonempty strictly increasing sequence of n >= 0")
    if cps[-1] > MAX_HORIZON:
        raise ValueError(f"horizon {cps[-1]} exceeds the per-replicate limit {MAX_HORIZON}")
    keys = list(range(R)) if replicate_keys is None else list(replicate_keys)
    if len(keys) != R:
        raise ValueError("replicate_keys must have length R")
    theta0 = np.asarray(theta0, dtype=float)
    if theta0.shape != (problem.dim,):
        raise ValueError(f"theta0 must have shape ({problem.dim},)")

    K, d = cps.size, problem.dim
    theta_at = np.empty((R, K, d))
    bar_at = np.empty((R, K, d))
    ok = np.empty(R, dtype=bool)
    params = np.asarray(problem.kernel_params(), dtype=float)
    theta_star = problem.theta.copy()

    def work(lo, hi):
        for i in range(lo, hi):
            ok[i] = trajectory(problem.kernel_id, params, theta_star, theta0, schedule.c_gamma, schedule.alpha,
                               cps, replicate_generator(master_seed, keys[i]), theta_at[i], bar_at[i])

    threads = max(1, int(threads))
    bounds = np.linspace(0, R, min(threads * 4, R) + 1).astype(int)
    if threads == 1:
        work(0, R)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, bounds[:-1], bounds[1:]))

    n_div = int(R - ok.sum())
    if n_div > DIVERGENCE_TOLERANCE * R:
        raise DivergenceError(f"{n_div} of {R} replicates diverged (limit {DIVERGENCE_TOLERANCE:.0%}); "
                              f"c_gamma={schedule.c_gamma}, alpha={schedule.alpha}, problem={problem.kind}")
    theta_at, bar_at = theta_at[ok], bar_at[ok]
    sq_sgd = np.sum((theta_at - theta_star) ** 2, axis=2)
    sq_avg = np.sum((bar_at - theta_star) ** 2, axis=2)
    gaps = problem.gap_at(theta_at.reshape(-1, d), budget=subopt_budget).reshape(sq_sgd.shape)
    sq_gap = gaps ** 2
    return ErrorCurves(
        checkpoints=cps,
        mean_sq_sgd=sq_sgd.mean(axis=0), var_sq_sgd=sq_sgd.var(axis=0, ddof=1),
        mean_sq_avg=sq_avg.mean(axis=0), var_sq_avg=sq_avg.var(axis=0, ddof=1),
        mean_sq_subopt=sq_gap.mean(axis=0), var_sq_subopt=sq_gap.var(axis=0, ddof=1),
        R=int(ok.sum()), seed=int(master_seed), n_diverged=n_div,
    )


@dataclass(frozen=True)
class DominanceReport:
    theorem: str
    quantity: str
    confidence: float
    z: float
    checkpoints: np.ndarray
    empirical: np.ndarray
    upper_cl: np.ndarray
    bound: np.ndarray
    passed_at: np.ndarray

    @property
    def passed(self) -> bool:
        return bool(np.all(self.passed_at))


def dominance_check(curves: ErrorCurves, bound: BoundCurve, quantity: str | None = None,
                    confidence: float = 0.99) -> DominanceReport:
    """One-sided test at each bound checkpoint that the empirical error lies below the bound.

    Squared-error bounds are compared with ``mean + z * stderr``; root bounds
    with the square root of that limit.
    """
    quantity = bound.quantity if quantity is None else quantity
    if quantity != bound.quantity:
        raise ValueError(f"quantity {quantity!r} does not match the bound's {bound.quantity!r}")
    if not 0.5 <= confidence < 1:
        raise ValueError("confidence must lie in [0.5, 1)")
    index = {int(n): i for i, n in enumerate(curves.checkpoints)}
    missing = [int(n) for n in bound.checkpoints if int(n) not in index]
    if missing:
        raise ValueError(f"bound checkpoints not present in the error curves: {missing}")
    sel = np.array([index[int(n)] for n in bound.checkpoints], dtype=int)
    z = float(stats.norm.ppf(confidence))
    mean = curves.mean(quantity)[sel]
    se = np.sqrt(curves.var(quantity)[sel] / curves.R)
    ucl = mean + z * se
    if quantity == "root_avg":
        mean, ucl = np.sqrt(mean), np.sqrt(ucl)
    return DominanceReport(bound.theorem, quantity, confidence, z, np.asarray(bound.checkpoints), mean, ucl,
                           np.asarray(bound.values, dtype=float), ucl <= bound.values)


def fit_rate(checkpoints, values, window=None) -> tuple[float, float]:
    """Least-squares slope of ``log(values)`` against ``log(n)`` and its standard error.

    ``window = (n_lo, n_hi)`` restricts the fit to checkpoints in that closed range.
    """
    n = np.asarray(checkpoints, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is not None:
        keep = (n >= window[0]) & (n <= window[1])
        n, v = n[keep], v[keep]
    if n.size < 4:
        raise ValueError("need at least four checkpoints in the window")
    if np.any(v <= 0) or np.any(n <= 0):
        raise ValueError("rate fit needs strictly positive values and checkpoints")
    res = stats.linregress(np.log(n), np.log(v))
    return float(res.slope), float(res.stderr)


def cramer_rao_ratio(curves: ErrorCurves, trace_term: float | None, checkpoint: int) -> float:
    """``n * mean |bar theta_n - theta|^2 / Tr(H^-1 Sigma H^-1)``."""
    if trace_term is None or not trace_term > 0:
        raise ValueError("trace term unavailable or not positive")
    hits = np.nonzero(curves.checkpoints == checkpoint)[0]
    if hits.size == 0:
        raise ValueError(f"checkpoint {checkpoint} not recorded")
    return float(checkpoint * curves.mean_sq_avg[hits[0]] / trace_term)
