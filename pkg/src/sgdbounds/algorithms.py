"""Plain stochastic gradient recursion, its running average and the step schedule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepSchedule:
    """Polynomially decaying steps ``gamma_n = c_gamma * n**(-alpha)``."""

    c_gamma: float
    alpha: float

    def __post_init__(self):
        if not (self.c_gamma > 0 and np.isfinite(self.c_gamma)):
            raise ValueError(f"c_gamma must be a positive finite number, got {self.c_gamma!r}")
        if not (0.5 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie strictly inside (1/2, 1), got {self.alpha!r}")


@dataclass(frozen=True)
class EstimatorState:
    theta: np.ndarray
    theta_bar: np.ndarray
    n: int = 0

    def __post_init__(self):
        if self.theta.ndim != 1 or self.theta.shape != self.theta_bar.shape or self.theta.size < 1:
            raise ValueError("theta and theta_bar must be 1-d vectors of the same dimension d >= 1")
        if self.n < 0:
            raise ValueError("iteration count must be nonnegative")

    @property
    def dim(self) -> int:
        return self.theta.size


def initial_state(theta0) -> EstimatorState:
    theta0 = np.array(theta0, dtype=float, ndmin=1)
    return EstimatorState(theta=theta0.copy(), theta_bar=theta0.copy(), n=0)


def step_size(schedule: StepSchedule, n: int) -> float:
    if n < 1:
        raise ValueError("step index starts at 1; gamma_0 is never used by the recursion")
    return schedule.c_gamma * float(n) ** (-schedule.alpha)


def averaged_update(prev_bar: np.ndarray, new_theta: np.ndarray, n: int) -> np.ndarray:
    """Running mean after appending ``new_theta`` (the iterate with index ``n + 1``)."""
    prev_bar = np.asarray(prev_bar, dtype=float)
    new_theta = np.asarray(new_theta, dtype=float)
    if prev_bar.shape != new_theta.shape:
        raise ValueError(f"dimension mismatch: {prev_bar.shape} vs {new_theta.shape}")
    return prev_bar + (new_theta - prev_bar) / (n + 2)


def sgd_step(state: EstimatorState, gradient_sample, schedule: StepSchedule) -> EstimatorState:
    """One stochastic gradient move.

    ``gradient_sample`` must have been evaluated at the current iterate
    ``state.theta``. Returns a new state; the input is left untouched.
    """
    g = np.asarray(gradient_sample, dtype=float)
    if g.shape != state.theta.shape:
        raise ValueError(f"gradient has shape {g.shape}, iterate has shape {state.theta.shape}")
    if not np.all(np.isfinite(g)):
        raise FloatingPointError("non-finite gradient sample (problem oracle failure)")
    theta = state.theta - step_size(schedule, state.n + 1) * g
    theta_bar = averaged_update(state.theta_bar, theta, state.n)
    return EstimatorState(theta=theta, theta_bar=theta_bar, n=state.n + 1)
