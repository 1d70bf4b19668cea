"""Well-specified logistic regression with a design uniform on a ball."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from .base import EMPIRICAL, EXACT, AssumptionConstants, AssumptionError, Problem, mc_mean

# max |s''| for the standard sigmoid, attained at t = +-log(2 + sqrt 3)
_SIGMOID_CURV = 1.0 / (6.0 * math.sqrt(3.0))


def logistic_gradient(observation, h) -> np.ndarray:
    """Gradient in ``h`` of ``log(1 + exp(-y phi.h))`` for a label ``y`` in {-1, +1}."""
    phi, y = observation
    phi = np.asarray(phi, dtype=float)
    h = np.asarray(h, dtype=float)
    if phi.shape != h.shape:
        raise ValueError(f"dimension mismatch: phi {phi.shape} vs h {h.shape}")
    return -y * expit(-y * float(phi @ h)) * phi


def _softplus_neg(t):
    """``log(1 + exp(-t))`` without overflow."""
    return np.logaddexp(0.0, -t)


def _dsigmoid(t):
    s = expit(t)
    return s * (1.0 - s)


class LogisticRegression(Problem):
    """``P(y = 1 | phi) = sigmoid(phi.theta)`` with ``phi`` uniform on the ball of radius ``B``.

    Population quantities are averaged over the label in closed form and over
    the design by Monte-Carlo, which keeps the estimators smooth in ``h``.
    Curvature constants come from certified lower bounds on ``s'`` over the ball.
    """

    kind = "logistic"
    kernel_id = 2
    has_closed_form_gap = False

    def __init__(self, dim: int = 3, theta=None, radius: float = 2.0, r_lambda0: float = 1.0, **kw):
        if theta is None:
            theta = np.zeros(dim)
        if radius <= 0:
            raise ValueError("design radius must be positive")
        if r_lambda0 <= 0:
            raise ValueError("r_lambda0 must be positive")
        super().__init__(dim, theta, **kw)
        self.B = float(radius)
        self.r_lambda0 = float(r_lambda0)

    # -- observations ------------------------------------------------------
    def _phi_from(self, z, u):
        norm = np.linalg.norm(z, axis=-1, keepdims=True)
        rad = self.B * np.power(u, 1.0 / self.dim)
        return z / norm * np.expand_dims(rad, -1)

    def sample(self, rng):
        z = rng.standard_normal(self.dim)
        u = rng.random()
        v = rng.random()
        phi = self._phi_from(z, np.float64(u))
        y = 1.0 if v < expit(float(phi @ self.theta)) else -1.0
        return phi, y

    def loss(self, obs, h) -> float:
        phi, y = obs
        return float(_softplus_neg(y * float(np.dot(phi, h))))

    def gradient(self, obs, h):
        return logistic_gradient(obs, h)

    def sample_designs(self, rng, size):
        z = rng.standard_normal((size, self.dim))
        return self._phi_from(z, rng.random(size))

    def sample_batch(self, rng, size):
        phi = self.sample_designs(rng, size)
        y = np.where(rng.random(size) < expit(phi @ self.theta), 1.0, -1.0)
        return phi, y

    def loss_batch(self, batch, h):
        phi, y = batch
        return _softplus_neg(y * (phi @ h))

    def gradient_batch(self, batch, h):
        phi, y = batch
        return (-y * expit(-y * (phi @ h)))[:, None] * phi

    # -- population quantities, label integrated out -------------------------
    def _designs(self, budget, rng):
        budget = budget or self.audit_budget
        rng = rng if rng is not None else np.random.default_rng(self.audit_seed)
        return self.sample_designs(rng, budget)

    def gap_from_designs(self, phi, h) -> np.ndarray:
        """Per-design conditional gap ``E[g(X,h) - g(X,theta) | phi]`` (a KL divergence, so >= 0)."""
        t, t0 = phi @ h, phi @ self.theta
        p = expit(t0)
        return p * (_softplus_neg(t) - _softplus_neg(t0)) + (1 - p) * (_softplus_neg(-t) - _softplus_neg(-t0))

    def objective_gap(self, h, budget=None, rng=None):
        h = self._check_h(h)
        mean, se = mc_mean(self.gap_from_designs(self._designs(budget, rng), h))
        return float(mean), float(se)

    def gap_at(self, points, budget=None):
        """Monte-Carlo gap at many points against one shared design sample (default 10^4 designs)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        phi = self.sample_designs(np.random.default_rng(self.audit_seed + 2), budget or 10 ** 4)
        out = np.empty(points.shape[0])
        step = max(1, 2 ** 22 // phi.shape[0])
        for lo in range(0, points.shape[0], step):
            h = points[lo:lo + step]
            t, t0 = phi @ h.T, (phi @ self.theta)[:, None]
            p = expit(t0)
            gap = p * (_softplus_neg(t) - _softplus_neg(t0)) + (1 - p) * (_softplus_neg(-t) - _softplus_neg(-t0))
            out[lo:lo + step] = gap.mean(axis=0)
        return out

    def mean_gradient(self, h, budget=None, rng=None):
        h = self._check_h(h)
        phi = self._designs(budget, rng)
        w = expit(phi @ h) - expit(phi @ self.theta)
        mean, se = mc_mean(w[:, None] * phi)
        return mean, float(np.sqrt(np.sum(se ** 2)))

    def hessian(self, h, budget=None, rng=None) -> np.ndarray:
        phi = self._designs(budget, rng)
        w = _dsigmoid(phi @ np.asarray(h, dtype=float))
        return (phi * w[:, None]).T @ phi / phi.shape[0]

    def gradient_covariance(self, h, budget=None, rng=None) -> np.ndarray:
        """``Sigma(h) = E[grad g grad g^T]`` with the label averaged exactly."""
        return self._sigma_from(self._designs(budget, rng), h)

    def _sigma_from(self, phi, h):
        t = phi @ np.asarray(h, dtype=float)
        p = expit(phi @ self.theta)
        w = p * expit(-t) ** 2 + (1 - p) * expit(t) ** 2
        return (phi * w[:, None]).T @ phi / phi.shape[0]

    def _at_origin(self) -> bool:
        return not np.any(self.theta)

    def hessian_at_optimum(self):
        if self._at_origin():
            return self.B ** 2 / (4.0 * (self.dim + 2)) * np.eye(self.dim)
        return self.hessian(self.theta, budget=max(self.audit_budget, 10 ** 6))

    def assumption_constants(self, theta0=None) -> AssumptionConstants:
        d, B = self.dim, self.B
        second = B * B / (d + 2)  # E[(phi.v)^2] for any unit v
        tnorm = float(np.linalg.norm(self.theta))
        # s' is decreasing in |t| and |phi.h| <= B |h|
        lam = float(_dsigmoid(B * tnorm)) * second
        lam0 = float(_dsigmoid(B * (tnorm + self.r_lambda0))) * second
        if not (lam > 0 and lam0 > 0):
            raise AssumptionError("Hessian positivity at the optimum cannot be certified (sigmoid saturated)")
        prov = {name: EXACT for name in ("C1", "C2", "C1p", "C2p", "L_grad_G", "lambda_min", "lambda_0",
                                         "r_lambda0", "C_lambda0", "u0", "v0")}
        theta0 = np.zeros(d) if theta0 is None else theta0
        u0, v0 = self.initial_moments(theta0)
        prov["u0"] = EMPIRICAL
        if self._at_origin():
            # Sigma(h) is even around 0, so its deviation is quadratic in |h|
            trace_term = 4.0 * d * (d + 2) / (B * B)
            l_sigma = self._lsigma_estimate(lam)
            prov.update(trace_term=EXACT, L_Sigma=EMPIRICAL)
        else:
            # the deviation of Sigma is linear near theta: no quadratic constant exists
            H = self.hessian_at_optimum()
            S = self.gradient_covariance(self.theta, budget=max(self.audit_budget, 10 ** 6))
            Hinv = np.linalg.inv(H)
            trace_term = self.safety * float(np.trace(Hinv @ S @ Hinv))
            l_sigma = None
            prov["trace_term"] = EMPIRICAL
        return AssumptionConstants(
            C1=B * B, C2=0.0, C1p=B ** 4, C2p=0.0,
            L_grad_G=B * B / 4.0,
            lambda_min=lam,
            lambda_0=lam0,
            r_lambda0=self.r_lambda0,
            C_lambda0=0.5 * _SIGMOID_CURV * B ** 3,
            u0=u0, v0=v0,
            L_Sigma=l_sigma,
            trace_term=trace_term,
            provenance=prov,
        )

    def _lsigma_estimate(self, lam: float) -> float:
        """Smallest ``L`` with ``Tr(H^-1 (Sigma(h) - Sigma(theta)) H^-1) <= L |h - theta|^2 / lam^2`` on a grid."""
        rng = np.random.default_rng(self.audit_seed + 1)
        phi = self.sample_designs(rng, self.audit_budget)
        Hinv = np.linalg.inv(self.hessian_at_optimum())
        S0 = self._sigma_from(phi, self.theta)
        dirs = rng.standard_normal((16, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        worst = 0.0
        for radius in np.linspace(0.1, 3.0, 12) * self.scale:
            for u in dirs:
                h = self.theta + radius * u
                S = self._sigma_from(phi, h)
                worst = max(worst, float(np.trace(Hinv @ (S - S0) @ Hinv)) / radius ** 2)
        return float(self.safety * worst * lam * lam)

    def kernel_params(self):
        return np.array([self.B])

    def describe(self):
        return {**super().describe(), "radius": self.B, "r_lambda0": self.r_lambda0}
