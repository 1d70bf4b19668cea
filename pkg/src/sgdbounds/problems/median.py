"""Geometric median of an isotropic Gaussian, ``g(x, h) = |x - h| - |x|``.

For ``X ~ N(mu, tau^2 I_d)`` the objective is radial around ``mu``. With
``a = |h - mu| / tau`` and ``kappa = E|Z| = sqrt(2) Gamma((d+1)/2) / Gamma(d/2)``:

    G(h) - G(mu) = tau * kappa * (1F1(-1/2; d/2; -a^2/2) - 1)

Its gradient has norm ``kappa a / d * 1F1(1/2; d/2 + 1; -a^2/2)``; the Hessian has a
radial eigenvalue ``kappa / (d tau) * (F1 - a^2 F2 / (d+2))`` and tangential
eigenvalues ``kappa / (d tau) * F1`` where ``F1 = 1F1(1/2; d/2+1; -a^2/2)`` and
``F2 = 1F1(3/2; d/2+2; -a^2/2)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, hyp1f1

from .base import EMPIRICAL, EXACT, AssumptionConstants, Problem


def geomedian_gradient(observation, h) -> np.ndarray:
    """Unit vector ``(h - x) / |h - x|``; the zero vector when ``h == x``."""
    x = np.asarray(observation, dtype=float)
    h = np.asarray(h, dtype=float)
    if x.shape != h.shape:
        raise ValueError(f"dimension mismatch: x {x.shape} vs h {h.shape}")
    diff = h - x
    norm = math.sqrt(float(diff @ diff))
    if norm == 0.0:
        # degenerate sample, probability zero for a continuous X
        return np.zeros_like(diff)
    return diff / norm


def _kappa(d: int) -> float:
    return math.sqrt(2.0) * math.exp(gammaln((d + 1) / 2.0) - gammaln(d / 2.0))


class GeometricMedian(Problem):
    kind = "median"
    kernel_id = 1
    has_closed_form_gap = True

    def __init__(self, dim: int = 3, theta=None, spread: float = 1.0, r_lambda0: float | None = None,
                 **kw):
        if theta is None:
            theta = np.zeros(dim)
        if spread <= 0:
            raise ValueError("spread must be positive")
        kw.setdefault("scale", spread)
        super().__init__(dim, theta, **kw)
        self.tau = float(spread)
        self.r_lambda0 = float(r_lambda0) if r_lambda0 is not None else self.tau
        if self.r_lambda0 <= 0:
            raise ValueError("r_lambda0 must be positive")
        self.kappa = _kappa(dim)

    # -- observations ------------------------------------------------------
    def sample(self, rng):
        return self.theta + self.tau * rng.standard_normal(self.dim)

    def loss(self, obs, h) -> float:
        return float(np.linalg.norm(obs - h) - np.linalg.norm(obs))

    def gradient(self, obs, h):
        return geomedian_gradient(obs, h)

    def sample_batch(self, rng, size):
        return self.theta + self.tau * rng.standard_normal((size, self.dim))

    def loss_batch(self, batch, h):
        return np.linalg.norm(batch - h, axis=1) - np.linalg.norm(batch, axis=1)

    def gradient_batch(self, batch, h):
        diff = h - batch
        norm = np.linalg.norm(diff, axis=1, keepdims=True)
        out = np.zeros_like(diff)
        np.divide(diff, norm, out=out, where=norm > 0)
        return out

    # -- analytic radial profile ------------------------------------------
    def _radius(self, h) -> np.ndarray:
        e = np.asarray(h, dtype=float) - self.theta
        return np.sqrt(np.sum(e * e, axis=-1)) / self.tau

    def closed_form_gap(self, h):
        a = self._radius(h)
        return self.tau * self.kappa * (hyp1f1(-0.5, self.dim / 2.0, -0.5 * a * a) - 1.0)

    def gradient_norm_profile(self, a):
        a = np.asarray(a, dtype=float)
        return self.kappa * a / self.dim * hyp1f1(0.5, self.dim / 2.0 + 1.0, -0.5 * a * a)

    def curvature_profile(self, a) -> tuple[np.ndarray, np.ndarray]:
        """Radial and tangential Hessian eigenvalues at normalised radius ``a``."""
        a = np.asarray(a, dtype=float)
        d = self.dim
        f1 = hyp1f1(0.5, d / 2.0 + 1.0, -0.5 * a * a)
        f2 = hyp1f1(1.5, d / 2.0 + 2.0, -0.5 * a * a)
        base = self.kappa / (d * self.tau)
        return base * (f1 - a * a * f2 / (d + 2.0)), base * f1

    def closed_form_gradient(self, h) -> np.ndarray:
        h = self._check_h(h)
        e = h - self.theta
        norm = float(np.linalg.norm(e))
        if norm == 0.0:
            return np.zeros(self.dim)
        return float(self.gradient_norm_profile(norm / self.tau)) * e / norm

    def hessian_at_optimum(self):
        return self.kappa / (self.dim * self.tau) * np.eye(self.dim)

    def assumption_constants(self, theta0=None) -> AssumptionConstants:
        d, tau = self.dim, self.tau
        lam = self.kappa / (d * tau)
        # search the radial profile on [0, r / tau]
        a = np.linspace(0.0, self.r_lambda0 / tau, 4001)
        radial, tangential = self.curvature_profile(a)
        curv = radial if d == 1 else np.minimum(radial, tangential)
        lambda0 = min(float(curv.min()) / self.safety, lam)
        if not lambda0 > 0:
            from .base import AssumptionError
            raise AssumptionError("local strong convexity could not be certified on the chosen radius")
        a_pos = a[1:]
        remainder = np.abs(self.gradient_norm_profile(a_pos) - self.kappa * a_pos / d)
        c_lambda0 = self.safety * float(np.max(remainder / (a_pos * a_pos * tau * tau)))
        theta0 = np.zeros(d) if theta0 is None else theta0
        u0, v0 = self.initial_moments(theta0)
        prov = {name: EXACT for name in ("C1", "C2", "C1p", "C2p", "L_grad_G", "lambda_min",
                                         "u0", "v0", "L_Sigma", "trace_term")}
        prov.update({"lambda_0": EMPIRICAL, "r_lambda0": EMPIRICAL, "C_lambda0": EMPIRICAL})
        return AssumptionConstants(
            C1=1.0, C2=0.0, C1p=1.0, C2p=0.0,
            # the Hessian norm peaks at the centre of a symmetric unimodal law
            L_grad_G=lam,
            lambda_min=lam,
            lambda_0=lambda0,
            r_lambda0=self.r_lambda0,
            C_lambda0=c_lambda0,
            u0=u0,
            v0=v0,
            # Sigma(h) = E[u u^T] with |u| = 1 and H isotropic: the trace form vanishes
            L_Sigma=0.0,
            trace_term=1.0 / (lam * lam),
            provenance=prov,
        )

    def kernel_params(self):
        return np.array([self.tau])

    def describe(self):
        return {**super().describe(), "spread": self.tau, "r_lambda0": self.r_lambda0}
