"""Monte-Carlo audit of the structural inequalities behind the bounds.

At every grid point ``h`` (with ``e = h - theta`` and ``V = G(h) - G(theta)``) the
audit checks

* ``majG``: ``V <= L |e|^2 / 2``
* ``minG``: ``V >= lambda_0 |e|^2 / 2`` inside the ball of radius ``r``,
  ``V >= lambda_0 r |e| / 2`` outside it
* ``A1_second``: ``E|grad g(X, h)|^2 <= C1 + C2 V``
* ``A1_fourth``: ``E|grad g(X, h)|^4 <= C1' + C2' V^2``
* ``delta``: ``|grad G(h) - H e| <= L_delta V``

Each check passes when ``lhs - rhs`` is within three combined standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .base import AssumptionConstants, Problem, unit_directions

CHECKS = ("majG", "minG", "A1_second", "A1_fourth", "delta")
SLACK_SE = 3.0


@dataclass(frozen=True)
class AuditEntry:
    check: str
    point: int
    radius: float
    lhs: float
    rhs: float
    stderr: float
    passed: bool

    @property
    def margin(self) -> float:
        """``rhs - lhs``; negative values are violations before the statistical slack."""
        return self.rhs - self.lhs


@dataclass
class AuditReport:
    problem: str
    budget: int
    entries: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def check_passed(self, check: str) -> bool:
        return all(e.passed for e in self.entries if e.check == check)

    def worst(self, check: str) -> AuditEntry:
        """Entry with the smallest raw margin for ``check``."""
        rows = [e for e in self.entries if e.check == check]
        if not rows:
            raise KeyError(check)
        return min(rows, key=lambda e: e.margin)

    def summary(self):
        """``(check, passed, worst margin)`` per check."""
        out = []
        for check in CHECKS:
            if any(e.check == check for e in self.entries):
                out.append((check, self.check_passed(check), self.worst(check).margin))
        return out


def default_grid(problem: Problem, count: int = 20, seed: int | None = None) -> np.ndarray:
    """``count`` points at radii spread over ``(0, 3 * scale]`` in seeded random directions."""
    rng = np.random.default_rng(problem.audit_seed if seed is None else seed)
    radii = np.linspace(0.15, 3.0, count) * problem.scale
    return problem.theta + radii[:, None] * unit_directions(rng, count, problem.dim)


def _entry(check, i, radius, lhs, rhs, se):
    tol = SLACK_SE * se + 1e-12 * max(abs(lhs), abs(rhs))
    return AuditEntry(check, i, radius, float(lhs), float(rhs), float(se), bool(lhs - rhs <= tol))


def assumption_audit(problem: Problem, constants: AssumptionConstants, grid=None,
                     budget: int = 10 ** 6) -> AuditReport:
    """Evaluate every check at every grid point using common random numbers per point."""
    grid = default_grid(problem) if grid is None else np.atleast_2d(np.asarray(grid, dtype=float))
    H = problem.hessian_at_optimum()
    L, lam0, r = constants.L_grad_G, constants.lambda_0, constants.r_lambda0
    l_delta = constants.L_delta
    report = AuditReport(problem=problem.kind, budget=budget)
    for i, h in enumerate(grid):
        e = h - problem.theta
        dist = float(np.linalg.norm(e))

        def stream():
            return np.random.default_rng([problem.audit_seed, i])

        if dist == 0.0:
            # at the optimum every quantity is deterministic
            V, seV = 0.0, 0.0
            gvec, seg = np.zeros(problem.dim), 0.0
        else:
            V, seV = problem.objective_gap(h, budget=budget, rng=stream())
            gvec, seg = problem.mean_gradient(h, budget=budget, rng=stream())
        m2, se2, m4, se4 = problem.gradient_moments(h, budget=budget, rng=stream())

        lower = 0.5 * lam0 * (dist * dist if dist <= r else r * dist)
        report.entries += [
            _entry("majG", i, dist, V, 0.5 * L * dist * dist, seV),
            _entry("minG", i, dist, lower, V, seV),
            _entry("A1_second", i, dist, m2, constants.C1 + constants.C2 * V,
                   math.hypot(se2, constants.C2 * seV)),
            _entry("A1_fourth", i, dist, m4, constants.C1p + constants.C2p * V * V,
                   math.hypot(se4, 2.0 * constants.C2p * abs(V) * seV)),
            _entry("delta", i, dist, float(np.linalg.norm(gvec - H @ e)), l_delta * V,
                   math.hypot(seg, l_delta * seV)),
        ]
    return report
