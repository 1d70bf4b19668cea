"""Compiled SGD trajectories for the built-in problems.

The kernels draw from a ``numpy.random.Generator`` in exactly the order used by
the problems' ``sample`` methods, so a compiled trajectory reproduces the
pure-Python reference loop on the same seed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LINREG, MEDIAN, LOGISTIC = 0, 1, 2


@njit(cache=True, nogil=True)
def _sigmoid(t):
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


@njit(cache=True, nogil=True, inline="always")
def _gradient(kind, params, theta_star, theta, rng, g, z):
    d = theta.shape[0]
    if kind == LINREG:
        s, noise = params[0], params[1]
        for j in range(d + 1):
            z[j] = rng.standard_normal()
        resid = 0.0
        for j in range(d):
            resid += s * z[j] * (theta[j] - theta_star[j])
        resid -= noise * z[d]
        for j in range(d):
            g[j] = resid * s * z[j]
    elif kind == MEDIAN:
        tau = params[0]
        norm2 = 0.0
        for j in range(d):
            diff = theta[j] - (theta_star[j] + tau * rng.standard_normal())
            g[j] = diff
            norm2 += diff * diff
        if norm2 > 0.0:
            inv = 1.0 / math.sqrt(norm2)
            for j in range(d):
                g[j] *= inv
        else:
            for j in range(d):
                g[j] = 0.0
    else:
        radius = params[0]
        norm2 = 0.0
        for j in range(d):
            z[j] = rng.standard_normal()
            norm2 += z[j] * z[j]
        u = rng.random()
        v = rng.random()
        scale = radius * u ** (1.0 / d) / math.sqrt(norm2)
        t_star = 0.0
        t = 0.0
        for j in range(d):
            z[j] *= scale
            t_star += z[j] * theta_star[j]
            t += z[j] * theta[j]
        y = 1.0 if v < _sigmoid(t_star) else -1.0
        w = -y * _sigmoid(-y * t)
        for j in range(d):
            g[j] = w * z[j]


@njit(cache=True, nogil=True)
def trajectory(kind, params, theta_star, theta0, c_gamma, alpha, checkpoints, rng, theta_out, bar_out):
    """Run SGD up to ``checkpoints[-1]`` recording iterates and averages at each checkpoint.

    Returns ``True`` if the trajectory stayed finite; on divergence the remaining
    rows of the outputs are filled with NaN.
    """
    d = theta0.shape[0]
    theta = theta0.copy()
    bar = theta0.copy()
    g = np.empty(d)
    z = np.empty(d + 1)
    k = 0
    while k < checkpoints.shape[0] and checkpoints[k] == 0:
        theta_out[k, :] = theta
        bar_out[k, :] = bar
        k += 1
    n_max = checkpoints[checkpoints.shape[0] - 1]
    for n in range(n_max):
        _gradient(kind, params, theta_star, theta, rng, g, z)
        gamma = c_gamma * float(n + 1) ** (-alpha)
        finite = True
        for j in range(d):
            theta[j] = theta[j] - gamma * g[j]
            bar[j] = bar[j] + (theta[j] - bar[j]) / (n + 2)
            if not math.isfinite(theta[j]):
                finite = False
        if not finite:
            theta_out[k:, :] = np.nan
            bar_out[k:, :] = np.nan
            return False
        if n + 1 == checkpoints[k]:
            theta_out[k, :] = theta
            bar_out[k, :] = bar
            k += 1
    return True
