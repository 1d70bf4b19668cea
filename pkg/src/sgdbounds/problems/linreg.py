"""Least squares with an isotropic Gaussian design and Gaussian noise."""

from __future__ import annotations

import math

import numpy as np

from .base import EXACT, AssumptionConstants, Problem


def linreg_gradient(observation, h) -> np.ndarray:
    """Gradient in ``h`` of ``(y - phi.h)**2 / 2``."""
    phi, y = observation
    phi = np.asarray(phi, dtype=float)
    h = np.asarray(h, dtype=float)
    if phi.shape != h.shape:
        raise ValueError(f"dimension mismatch: phi {phi.shape} vs h {h.shape}")
    return (phi @ h - y) * phi


class LinearRegression(Problem):
    """``y = phi.theta + eps`` with ``phi ~ N(0, s^2 I_d)`` and ``eps ~ N(0, noise^2)``.

    Every assumption constant has a closed form here, obtained from Gaussian
    moments of orders up to eight:

    * ``E|grad g|^2 = d noise^2 s^2 + 2 (d+2) s^2 V`` with ``V = G(h) - G(theta)``;
    * ``E|grad g|^4 = c + b V + a V^2`` with ``c = 3 noise^4 s^4 d (d+2)``,
      ``b = 12 noise^2 s^4 (d+2)(d+4)``, ``a = 12 s^4 (d+4)(d+6)``, and the middle
      term is absorbed through ``b V <= c + b^2 V^2 / (4c)``.
    """

    kind = "linreg"
    kernel_id = 0
    has_closed_form_gap = True

    def __init__(self, dim: int = 3, theta=None, design_scale: float = 1.0, noise: float = 1.0, **kw):
        if theta is None:
            theta = np.zeros(dim)
        if design_scale <= 0:
            raise ValueError("design scale must be positive")
        if noise < 0:
            raise ValueError("noise level must be nonnegative")
        super().__init__(dim, theta, **kw)
        self.s = float(design_scale)
        self.noise = float(noise)

    def sample(self, rng):
        z = rng.standard_normal(self.dim + 1)
        phi = self.s * z[: self.dim]
        return phi, float(phi @ self.theta + self.noise * z[self.dim])

    def loss(self, obs, h) -> float:
        phi, y = obs
        return 0.5 * (y - float(np.dot(phi, h))) ** 2

    def gradient(self, obs, h):
        return linreg_gradient(obs, h)

    def sample_batch(self, rng, size):
        z = rng.standard_normal((size, self.dim + 1))
        phi = self.s * z[:, : self.dim]
        return phi, phi @ self.theta + self.noise * z[:, self.dim]

    def loss_batch(self, batch, h):
        phi, y = batch
        return 0.5 * (y - phi @ h) ** 2

    def gradient_batch(self, batch, h):
        phi, y = batch
        return (phi @ h - y)[:, None] * phi

    def design_covariance(self) -> np.ndarray:
        return self.s ** 2 * np.eye(self.dim)

    def objective_gap(self, h, budget=None, rng=None):
        return float(self.closed_form_gap(self._check_h(h))), 0.0

    def closed_form_gap(self, h):
        e = np.asarray(h, dtype=float) - self.theta
        return 0.5 * self.s ** 2 * np.sum(e * e, axis=-1)

    def mean_gradient(self, h, budget=None, rng=None):
        h = self._check_h(h)
        return self.s ** 2 * (h - self.theta), 0.0

    def hessian_at_optimum(self):
        return self.design_covariance()

    def fourth_moment_coefficients(self) -> tuple[float, float, float]:
        """``(c, b, a)`` with ``E|grad g|^4 = c + b V + a V^2``."""
        d, s2, n2 = self.dim, self.s ** 2, self.noise ** 2
        c = 3.0 * n2 ** 2 * s2 ** 2 * d * (d + 2)
        b = 12.0 * n2 * s2 ** 2 * (d + 2) * (d + 4)
        a = 12.0 * s2 ** 2 * (d + 4) * (d + 6)
        return c, b, a

    def assumption_constants(self, theta0=None) -> AssumptionConstants:
        d, s2 = self.dim, self.s ** 2
        c, b, a = self.fourth_moment_coefficients()
        c1p = 2.0 * c
        c2p = a + (b * b / (4.0 * c) if c > 0 else 0.0)
        theta0 = np.zeros(d) if theta0 is None else theta0
        u0, v0 = self.initial_moments(theta0)
        names = ("C1", "C2", "C1p", "C2p", "L_grad_G", "lambda_min", "lambda_0", "r_lambda0",
                 "C_lambda0", "u0", "v0", "L_Sigma", "trace_term")
        return AssumptionConstants(
            C1=d * self.noise ** 2 * s2,
            C2=2.0 * (d + 2) * s2,
            C1p=c1p,
            C2p=c2p,
            L_grad_G=s2,
            lambda_min=s2,
            lambda_0=s2,
            r_lambda0=math.inf,
            C_lambda0=0.0,
            u0=u0,
            v0=v0,
            # Tr(H^-1 (Sigma(h) - Sigma(theta)) H^-1) = (d+2) |h - theta|^2
            L_Sigma=(d + 2) * s2 ** 2,
            trace_term=d * self.noise ** 2 / s2,
            provenance={name: EXACT for name in names},
        )

    def kernel_params(self):
        return np.array([self.s, self.noise])

    def describe(self):
        return {**super().describe(), "design_scale": self.s, "noise": self.noise}
