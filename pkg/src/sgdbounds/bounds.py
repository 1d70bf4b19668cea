"""Explicit non-asymptotic bounds for SGD and its running average.

Every bound is a finite sum of products of constants, powers of ``n`` and
stretched exponentials ``exp(-k n^(1-alpha))``. The prefactors can be
astronomically large (``exp`` of a few hundred) while the exponentials are
tiny, so each product is assembled in log space and only exponentiated at the
end. A bound value is ``+inf`` only when the true value exceeds the double range.

Notation used throughout: ``c = c_gamma``, ``beta = 1 - alpha``,
``K2 = 2 alpha / (2 alpha - 1)``, ``K3 = 3 alpha / (3 alpha - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaincc, gammaln

from .algorithms import StepSchedule
from .problems.base import EMPIRICAL, EXACT, AssumptionConstants

NINF = -math.inf
THRESHOLD_CAP = 10 ** 9
SERIES_REL_TOL = 1e-15
SERIES_MAX_TERMS = 1 << 22

THEOREMS = ("lemma1", "thm1", "lemma2", "thm2", "thm3", "thm4", "thm5", "thm6")
QUANTITY = {
    "lemma1": "sq_subopt", "lemma2": "sq_subopt",
    "thm1": "sq_sgd", "thm2": "sq_sgd",
    "thm3": "root_avg", "thm4": "root_avg", "thm5": "root_avg", "thm6": "root_avg",
}
BOUNDED_ONLY = {"lemma2", "thm2", "thm5", "thm6"}
NEEDS_A5 = {"thm4", "thm6"}


class PreconditionError(ValueError):
    """A bound was requested for constants that do not satisfy its hypotheses."""


class ThresholdError(RuntimeError):
    """A threshold index exceeds the search cap."""


# -- log-space helpers ---------------------------------------------------------
def _log(x: float) -> float:
    if x < 0 or math.isnan(x):
        raise ValueError(f"log of a negative or NaN quantity: {x!r}")
    return math.log(x) if x > 0 else NINF


def _lmul(*logs: float) -> float:
    """Log of a product; a zero factor wins even against an infinite one."""
    if any(v == NINF for v in logs):
        return NINF
    return math.fsum(logs)


def _lsum(*logs: float) -> float:
    """Log of a sum of nonnegative numbers given by their logs."""
    finite = [v for v in logs if v != NINF]
    if not finite:
        return NINF
    top = max(finite)
    if math.isinf(top):
        return math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in finite))


def _exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return math.inf


def _total(*logs: float) -> float:
    """Sum of the exponentiated terms, accurate to a few ulps."""
    return math.fsum(_exp(v) for v in logs)


# -- series -----------------------------------------------------------------------
def log_series_sum(c: float, alpha: float) -> float:
    """Log of a certified upper bound on ``sum_{n >= 0} exp(-c n^(1-alpha))``.

    Terms ``n = 0..N`` are summed in chunks until the last one is below
    ``1e-15`` of the running total (partial sum plus tail). The summand is
    convex in ``n``, so each later term is at most its integral over
    ``[n - 1/2, n + 1/2]`` and the remainder is bounded by
    ``int_{N+1/2}^inf exp(-c t^beta) dt = Gamma(1/beta) Q(1/beta, c (N+1/2)^beta) / (beta c^(1/beta))``
    with ``Q`` the regularized upper incomplete gamma function.
    """
    if not c > 0:
        raise ValueError(f"series diverges for c = {c!r} (need c > 0)")
    if not 0.5 < alpha < 1:
        raise ValueError("alpha must lie in (1/2, 1)")
    beta = 1.0 - alpha
    s = 1.0 / beta
    log_scale = -math.log(beta) - s * math.log(c) + gammaln(s)

    def log_tail(N):
        q = gammaincc(s, c * np.power(N + 0.5, beta))
        with np.errstate(divide="ignore"):
            return log_scale + np.log(q)

    # the stopping index only affects tightness: any N yields a valid upper bound
    partial = []
    start, chunk = 0, 1024
    while True:
        n = np.arange(start, start + chunk, dtype=float)
        terms = np.exp(-c * np.power(n, beta))
        partial.append(float(np.sum(terms)))
        N = float(start + chunk - 1)
        log_total = float(np.logaddexp(math.log(math.fsum(partial)), log_tail(N)))
        small = terms[-1] == 0.0 or math.log(terms[-1]) <= math.log(SERIES_REL_TOL) + log_total
        if small or start + chunk >= SERIES_MAX_TERMS:
            return log_total
        start += chunk
        chunk = min(chunk * 2, 1 << 20, SERIES_MAX_TERMS - start)


def series_upper_bound(c: float, alpha: float, scale: float = 1.0) -> float:
    """Certified upper bound on ``scale * sum_{n >= 0} exp(-c n^(1-alpha))``."""
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    if scale == 0:
        return 0.0
    value = scale * math.exp(log_series_sum(c, alpha))
    # absorb the rounding of the summation and of the final product
    return math.nextafter(value * (1.0 + 1e-13), math.inf)


# -- thresholds -----------------------------------------------------------------
def _first_true(pred, what: str) -> int:
    """Smallest ``n >= 0`` with ``pred(n)`` for a predicate that stays true once true."""
    if pred(0):
        return 0
    lo, hi = 0, 1
    while not pred(hi):
        lo = hi
        if hi >= THRESHOLD_CAP:
            raise ThresholdError(f"{what} exceeds the search cap {THRESHOLD_CAP}")
        hi = min(2 * hi, THRESHOLD_CAP)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _step(schedule: StepSchedule, n: int) -> float:
    return schedule.c_gamma * float(n) ** (-schedule.alpha)


def _first_order(constants: AssumptionConstants, schedule: StepSchedule):
    L, lam0, lam = constants.L_grad_G, constants.lambda_0, constants.lambda_min
    m = constants.min_one_r2
    a0 = lam0 * lam0 * m / L
    a1 = max(lam0 ** 4 / (4 * L * L), constants.C2 * (4 * L + 1))
    a2 = 0.5 * L * L * constants.C2p
    sigma2 = (constants.C1 ** 2 * (4 * L + 1) ** 2 * L / (12 * lam0 * lam0 * m)
              + schedule.c_gamma * L * L * constants.C1p / 2)
    b1 = 0.5 * L * max(constants.C2, lam * lam / (2 * L))
    return a0, a1, a2, sigma2, b1


def thresholds(constants: AssumptionConstants, schedule: StepSchedule) -> tuple[int, int, int, int]:
    """``(n0, n0', n1, n1')``: first indices where the step is small enough for each recursion."""
    a0, a1, a2, _, b1 = _first_order(constants, schedule)
    lam = constants.lambda_min
    n0 = _first_true(lambda n: a0 >= 2 * a1 * _step(schedule, n + 1) + 2 * a2 * _step(schedule, n + 1) ** 2,
                     f"n0 (a0={a0}, a1={a1}, a2={a2})")
    n0p = _first_true(lambda n: a0 * _step(schedule, n + 1) <= 1, f"n0' (a0={a0})")
    n1 = _first_true(lambda n: lam >= 2 * _step(schedule, n + 1) * b1, f"n1 (lambda_min={lam}, b1={b1})")
    n1p = _first_true(lambda n: lam * _step(schedule, n + 1) <= 1, f"n1' (lambda_min={lam})")
    return n0, n0p, n1, n1p


# -- derived constants --------------------------------------------------------
@dataclass(frozen=True)
class DerivedConstants:
    """Composite constants of the bound statements for one (constants, schedule) pair.

    Constants that can overflow are also stored as natural logs (``log_*``);
    the evaluators only use the logs.
    """

    a0: float
    a1: float
    a2: float
    sigma2: float
    L_delta: float
    b1: float
    c1: float
    A: float
    n0: int
    n0p: int
    c_n0p: float
    M0: float
    n1: int
    n1p: int
    A_prime: float
    A_inf: float
    B_inf: float
    D_inf: float
    A_inf_p: float
    B_inf_p: float
    D_inf_p: float
    log_c1: float
    log_A: float
    log_c_n0p: float
    log_A_prime: float
    log_A_inf: float
    log_B_inf: float
    log_D_inf: float
    log_A_inf_p: float
    log_B_inf_p: float
    log_D_inf_p: float
    constants: AssumptionConstants = field(repr=False)
    schedule: StepSchedule = field(repr=False)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def as_rows(self):
        """``(name, value)`` pairs for the public fields."""
        skip = {"constants", "schedule"}
        return [(name, getattr(self, name)) for name in self.__dataclass_fields__ if name not in skip]


def derive_constants(constants: AssumptionConstants, schedule: StepSchedule) -> DerivedConstants:
    c, alpha = schedule.c_gamma, schedule.alpha
    beta = 1.0 - alpha
    K2, K3 = 2 * alpha / (2 * alpha - 1), 3 * alpha / (3 * alpha - 1)
    lam, u0, v0, C1 = constants.lambda_min, constants.u0, constants.v0, constants.C1
    a0, a1, a2, sigma2, b1 = _first_order(constants, schedule)
    l_delta = constants.L_delta
    n0, n0p, n1, n1p = thresholds(constants, schedule)
    lg = _log
    l_ld2 = _lmul(2 * lg(l_delta))

    # Theorem 1 constants; c1 is built from u0, as in the Lemma 1 sequence it comes from
    E1 = 2 * a1 * c * c * K2 + 2 * a2 * c ** 3 * K3
    log_c1 = _lmul(E1, lg(u0 + sigma2 * c ** 3 * K3))
    inner = _lsum(
        lg(u0 * c),
        log_c1,
        _lmul(lg(4.0 / (a0 * beta)), log_c1, -0.25 * a0 * c),
        lg(2 ** (1 + 4 * alpha) * sigma2 * c ** 3 * K3 / a0),
    )
    log_A = _lmul(2 * b1 * c * c * K2,
                  _lsum(lg(v0), lg(K2 * c * c * C1), _lmul(lg(2.0), l_ld2, -lg(lam), inner)))

    # Lemma 2 / Theorem 2 constants; gamma_{n0'} falls back to gamma_1 when n0' = 0
    gamma_n0p = _step(schedule, max(n0p, 1))
    log_c_n0p = _lmul(lg(sigma2), _lsum(0.5 * a0 * c * (n0p + 1) ** beta + 3 * lg(gamma_n0p), lg(c ** 3 * K3)))
    M0 = max(2 ** (4 * alpha) / a0, c)
    log_A_prime = _lmul(
        lam * c * (n1p + 1) ** beta,
        _lsum(lg(C1 * c * c * K2), log_c_n0p, lg(c * u0),
              _lmul(lg(2.0 / (a0 * beta)), log_c_n0p, -0.5 * a0 * c),
              lg(sigma2 * c ** 3 * M0 * K3)),
    )

    S = lambda k: log_series_sum(k * c, alpha)  # noqa: E731
    log_A_inf = _lmul(0.5 * log_A, -lg(c), S(lam / 8))
    log_B_inf = _lmul(S(a0 / 8), a1 * c * c * K2 + a2 * c ** 3 * K3,
                      lg(math.sqrt(u0) + math.sqrt(sigma2) * c ** 1.5 * math.sqrt(K3)))
    log_D_inf = _lmul(0.5 * lg(2.0), 0.5 * log_c1, lg(l_delta), -lg(lam * c), S(a0 / 16))
    log_A_inf_p = _lmul(0.5 * log_A_prime, -lg(c), S(lam / 2))
    log_B_inf_p = _lmul(_lsum(0.5 * log_c_n0p, 0.5 * lg(u0)), S(a0 / 4))
    log_D_inf_p = _lmul(0.5 * log_c_n0p, lg(l_delta), -lg(lam * c), S(a0 / 8))

    return DerivedConstants(
        a0=a0, a1=a1, a2=a2, sigma2=sigma2, L_delta=l_delta, b1=b1,
        c1=_exp(log_c1), A=_exp(log_A), n0=n0, n0p=n0p, c_n0p=_exp(log_c_n0p), M0=M0,
        n1=n1, n1p=n1p, A_prime=_exp(log_A_prime),
        A_inf=_exp(log_A_inf), B_inf=_exp(log_B_inf), D_inf=_exp(log_D_inf),
        A_inf_p=_exp(log_A_inf_p), B_inf_p=_exp(log_B_inf_p), D_inf_p=_exp(log_D_inf_p),
        log_c1=log_c1, log_A=log_A, log_c_n0p=log_c_n0p, log_A_prime=log_A_prime,
        log_A_inf=log_A_inf, log_B_inf=log_B_inf, log_D_inf=log_D_inf,
        log_A_inf_p=log_A_inf_p, log_B_inf_p=log_B_inf_p, log_D_inf_p=log_D_inf_p,
        constants=constants, schedule=schedule,
    )


# -- evaluators ---------------------------------------------------------------
def _setup(derived: DerivedConstants, schedule: Optional[StepSchedule], constants=None):
    if schedule is not None and schedule != derived.schedule:
        raise ValueError("schedule differs from the one the derived constants were built with")
    return derived.schedule, (derived.constants if constants is None else constants)


def _require_bounded(k: AssumptionConstants, name: str):
    if k.C2 != 0 or k.C2p != 0:
        raise PreconditionError(f"{name} requires C2 = C2' = 0 (got C2={k.C2}, C2'={k.C2p})")


def _require_a5(k: AssumptionConstants, name: str):
    if not k.has_lipschitz_variance:
        raise PreconditionError(f"{name} requires L_Sigma and trace_term (assumption A5)")


def _check_n(n, minimum: int) -> int:
    if int(n) != n or n < minimum:
        raise ValueError(f"n must be an integer >= {minimum}, got {n!r}")
    return int(n)


def lemma1_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None,
                 u0: float | None = None) -> float:
    """Bound on ``E[(G(theta_n) - G(theta))^2]`` for the general case."""
    n = _check_n(n, 1)
    s, k = _setup(derived, schedule)
    c, alpha = s.c_gamma, s.alpha
    u0 = k.u0 if u0 is None else u0
    K2, K3 = 2 * alpha / (2 * alpha - 1), 3 * alpha / (3 * alpha - 1)
    E1 = 2 * derived.a1 * c * c * K2 + 2 * derived.a2 * c ** 3 * K3
    nb = float(n) ** (1 - alpha)
    return _total(
        _lmul(-0.25 * c * derived.a0 * nb, E1, _log(u0 + derived.sigma2 * c ** 3 * K3)),
        _lmul(_log(2 ** (1 + 4 * alpha) * derived.sigma2 * c * c / derived.a0), -2 * alpha * math.log(n)),
    )


def theorem1_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None) -> float:
    """Bound on ``E|theta_n - theta|^2`` for the general case."""
    n = _check_n(n, 1)
    s, k = _setup(derived, schedule)
    c, alpha = s.c_gamma, s.alpha
    lam, ld = k.lambda_min, derived.L_delta
    nb, ln = float(n) ** (1 - alpha), math.log(n)
    return _total(
        _lmul(derived.log_A, -0.25 * lam * c * nb),
        _lmul(derived.log_c1, _log(2.0 / lam ** 2), 2 * _log(ld), -0.125 * derived.a0 * c * nb),
        _lmul(_log(2 ** (2 + 8 * alpha) * derived.sigma2 * c * c / (derived.a0 * lam * lam)), 2 * _log(ld),
              -2 * alpha * ln),
        _lmul(_log(2 ** (1 + alpha) * k.C1 * c / lam), -alpha * ln),
    )


def lemma2_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None) -> float:
    """Bound on ``E[(G(theta_n) - G(theta))^2]`` when the gradient moments are bounded."""
    n = _check_n(n, 1)
    s, k = _setup(derived, schedule)
    _require_bounded(k, "lemma2")
    c, alpha = s.c_gamma, s.alpha
    nb = float(n) ** (1 - alpha)
    return _total(
        _lmul(derived.log_c_n0p, -0.5 * derived.a0 * c * nb),
        _lmul(_log(derived.sigma2 * derived.M0 * c * c), -2 * alpha * math.log(n)),
    )


def theorem2_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None) -> float:
    """Bound on ``E|theta_n - theta|^2`` when the gradient moments are bounded."""
    n = _check_n(n, 1)
    s, k = _setup(derived, schedule)
    _require_bounded(k, "thm2")
    c, alpha = s.c_gamma, s.alpha
    lam, ld = k.lambda_min, derived.L_delta
    nb, ln = float(n) ** (1 - alpha), math.log(n)
    return _total(
        _lmul(derived.log_A_prime, -lam * c * nb),
        _lmul(derived.log_c_n0p, 2 * _log(ld), -2 * math.log(lam), -0.25 * derived.a0 * c * nb),
        _lmul(2 * _log(ld), _log(c * c * derived.sigma2 * derived.M0 / lam ** 2), -2 * alpha * ln),
        _lmul(_log(2 ** alpha * k.C1 * c / lam), -alpha * ln),
    )


def theorem3_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None,
                   constants: AssumptionConstants | None = None) -> float:
    """Bound on ``sqrt(E|bar theta_n - theta|^2)`` for the general case."""
    n = _check_n(n, 0)
    s, k = _setup(derived, schedule, constants)
    c, alpha = s.c_gamma, s.alpha
    beta = 1 - alpha
    lam, ld, a0, sig = k.lambda_min, derived.L_delta, derived.a0, derived.sigma
    lm, nb = math.log(n + 1), float(n) ** beta
    llam = math.log(lam)
    terms = (
        _lmul(0.5 * _log(k.C1), -0.5 * lm),
        _lmul(_log(ld * 2 ** (0.5 + 2 * alpha) * sig * c / (math.sqrt(a0) * beta)), -alpha * lm),
        _lmul(_log(2 ** ((1 + alpha) / 2) * 5 * math.sqrt(k.C1) / math.sqrt(c * lam)), -(1 - alpha / 2) * lm),
        _lmul(_log(math.sqrt(k.C2) * 2 ** (0.25 + alpha) * math.sqrt(sig * c) / (a0 ** 0.25 * math.sqrt(beta))),
              -(0.5 + alpha / 2) * lm),
        _lmul(_log(2 ** (1 + 4 * alpha) * sig * ld / (math.sqrt(a0) * lam)), _log(lm), -lm),
        _lmul(_lsum(derived.log_A_inf, derived.log_D_inf, _lmul(_log(ld), derived.log_B_inf),
                    _lmul(0.5 * _log(k.C2), 0.5 * derived.log_B_inf),
                    _lmul(-0.5 * math.log(c), 0.5 * _log(k.v0))), -lm),
        _lmul(0.5 * derived.log_A, -math.log(c), -0.125 * lam * c * nb, -beta * lm),
        _lmul(0.5 * math.log(2.0), 0.5 * derived.log_c1, _log(ld), -math.log(c * lam),
              -a0 * c * nb / 16, -beta * lm),
    )
    return _total(*(_lmul(t, -llam) for t in terms))


def theorem4_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None,
                   constants: AssumptionConstants | None = None) -> float:
    """Bound on ``sqrt(E|bar theta_n - theta|^2)`` with the Cramer-Rao leading term."""
    n = _check_n(n, 0)
    s, k = _setup(derived, schedule, constants)
    _require_a5(k, "thm4")
    c, alpha = s.c_gamma, s.alpha
    beta = 1 - alpha
    lam, ld, a0, sig = k.lambda_min, derived.L_delta, derived.a0, derived.sigma
    lsig = 0.5 * _log(k.L_Sigma)
    lm, nb, llam = math.log(n + 1), float(n) ** beta, math.log(lam)
    lc = math.log(c)
    rest = _lsum(
        derived.log_A_inf, derived.log_D_inf, _lmul(_log(ld), derived.log_B_inf),
        _lmul(_log(math.sqrt(k.L_Sigma) + c ** -0.5), 0.5 * _log(k.v0)),
        _lmul(lsig, lc, derived.log_A_inf),
        _lmul(lsig, lc, derived.log_D_inf),
        _lmul(lsig, _log(2 ** (1 + 4 * alpha) * sig * c * ld * math.sqrt(2 * alpha)
                         / (math.sqrt(a0) * lam * math.sqrt(2 * alpha - 1)))),
    )
    return _total(
        _lmul(0.5 * _log(k.trace_term), -0.5 * lm),
        _lmul(_log(ld * 2 ** (0.5 + 2 * alpha) * sig * c / (math.sqrt(a0) * beta)), -llam, -alpha * lm),
        _lmul(_log(2 ** ((1 + alpha) / 2) * 5 * math.sqrt(k.C1) / math.sqrt(c)), -1.5 * llam,
              -(1 - alpha / 2) * lm),
        _lmul(lsig, _log(2 ** (0.5 + alpha / 2) * math.sqrt(k.C1 * c) / math.sqrt(beta)), -1.5 * llam,
              -(0.5 + alpha / 2) * lm),
        _lmul(_log(2 ** (1 + 4 * alpha) * sig * ld / math.sqrt(a0)), -2 * llam, _log(lm), -lm),
        _lmul(rest, -llam, -lm),
        _lmul(0.5 * derived.log_A, -lc, -0.125 * lam * c * nb, -llam, -beta * lm),
        _lmul(0.5 * math.log(2.0), 0.5 * derived.log_c1, _log(ld), -lc, -a0 * c * nb / 16, -2 * llam,
              -beta * lm),
    )


def theorem5_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None,
                   constants: AssumptionConstants | None = None) -> float:
    """Bound on ``sqrt(E|bar theta_n - theta|^2)`` when the gradient moments are bounded."""
    n = _check_n(n, 0)
    s, k = _setup(derived, schedule, constants)
    _require_bounded(k, "thm5")
    c, alpha = s.c_gamma, s.alpha
    beta = 1 - alpha
    lam, ld, a0, sig, M0 = k.lambda_min, derived.L_delta, derived.a0, derived.sigma, derived.M0
    lm, nb, llam = math.log(n + 1), float(n) ** beta, math.log(lam)
    l_main = _log(sig * ld * math.sqrt(M0) / lam)
    terms = (
        _lmul(0.5 * _log(k.C1), -0.5 * lm),
        _lmul(_log(ld * sig * c * math.sqrt(M0) / beta), -alpha * lm),
        _lmul(_log(2 ** (alpha / 2) * 5 * math.sqrt(k.C1) / math.sqrt(c * lam)), -(1 - alpha / 2) * lm),
        # taken with a single 1/(n+1), the larger of the two readings of this term
        _lmul(l_main, _log(lm), -lm),
        _lmul(_lsum(l_main, derived.log_A_inf_p, derived.log_D_inf_p, _lmul(_log(ld), derived.log_B_inf_p)),
              -lm),
        _lmul(0.5 * derived.log_A_prime, -math.log(c), -0.5 * lam * c * nb, -beta * lm),
        _lmul(0.5 * derived.log_c_n0p, _log(ld), -math.log(c * lam), -0.125 * a0 * c * nb, -beta * lm),
    )
    return _total(*(_lmul(t, -llam) for t in terms))


def theorem6_bound(n: int, derived: DerivedConstants, schedule: StepSchedule | None = None,
                   constants: AssumptionConstants | None = None) -> float:
    """Bound on ``sqrt(E|bar theta_n - theta|^2)`` with the Cramer-Rao term, bounded case."""
    n = _check_n(n, 0)
    s, k = _setup(derived, schedule, constants)
    _require_bounded(k, "thm6")
    _require_a5(k, "thm6")
    c, alpha = s.c_gamma, s.alpha
    beta = 1 - alpha
    K2 = 2 * alpha / (2 * alpha - 1)
    lam, ld, a0, sig, M0 = k.lambda_min, derived.L_delta, derived.a0, derived.sigma, derived.M0
    lsig = 0.5 * _log(k.L_Sigma)
    lm, nb, llam, lc = math.log(n + 1), float(n) ** beta, math.log(lam), math.log(c)
    rest = _lsum(
        _log((sig + math.sqrt(k.L_Sigma) * c * math.sqrt(K2)) * ld * math.sqrt(M0) / lam),
        derived.log_A_inf_p, derived.log_D_inf_p, _lmul(_log(ld), derived.log_B_inf_p),
        _lmul(lsig, 0.5 * _log(k.v0)),
        _lmul(lsig, lc, derived.log_A_inf_p),
        _lmul(lsig, lc, derived.log_D_inf_p),
    )
    return _total(
        _lmul(0.5 * _log(k.trace_term), -0.5 * lm),
        _lmul(_log(ld * sig * c * math.sqrt(M0) / beta), -llam, -alpha * lm),
        _lmul(_log(2 ** (alpha / 2) * 5 * math.sqrt(k.C1) / math.sqrt(c)), -1.5 * llam, -(1 - alpha / 2) * lm),
        _lmul(lsig, _log(2 ** (alpha / 2) * math.sqrt(k.C1) / math.sqrt(beta)), -1.5 * llam,
              -(0.5 + alpha / 2) * lm),
        _lmul(_log(sig * ld * math.sqrt(M0)), -2 * llam, _log(lm), -lm),
        _lmul(rest, -lm, -llam),
        # the step scale sits in this exponent, as in the constant A' it comes from
        _lmul(0.5 * derived.log_A_prime, -lc, -0.5 * lam * c * nb, -llam, -beta * lm),
        _lmul(0.5 * derived.log_c_n0p, _log(ld), -lc, -0.125 * a0 * c * nb, -2 * llam, -beta * lm),
    )


EVALUATORS = {
    "lemma1": lemma1_bound, "thm1": theorem1_bound, "lemma2": lemma2_bound, "thm2": theorem2_bound,
    "thm3": theorem3_bound, "thm4": theorem4_bound, "thm5": theorem5_bound, "thm6": theorem6_bound,
}


# -- curves ---------------------------------------------------------------------
@dataclass(frozen=True)
class BoundCurve:
    theorem: str
    checkpoints: np.ndarray
    values: np.ndarray
    quantity: str
    provenance: dict = field(default_factory=dict)

    @property
    def flag(self) -> str:
        """``exact`` when every constant behind the curve is exact."""
        return EMPIRICAL if EMPIRICAL in self.provenance.values() else EXACT

    def scaled(self, factor: float) -> "BoundCurve":
        return BoundCurve(self.theorem, self.checkpoints, self.values * factor, self.quantity, self.provenance)


def check_applicable(theorem: str, constants: AssumptionConstants) -> None:
    if theorem not in EVALUATORS:
        raise ValueError(f"unknown theorem {theorem!r}; choose from {THEOREMS}")
    if theorem in BOUNDED_ONLY:
        _require_bounded(constants, theorem)
    if theorem in NEEDS_A5:
        _require_a5(constants, theorem)


def bound_curve(theorem: str, checkpoints, constants: AssumptionConstants, schedule: StepSchedule,
                derived: DerivedConstants | None = None) -> BoundCurve:
    check_applicable(theorem, constants)
    if derived is None:
        derived = derive_constants(constants, schedule)
    fn = EVALUATORS[theorem]
    ns = np.asarray(checkpoints, dtype=np.int64)
    values = np.array([fn(int(n), derived, schedule) for n in ns], dtype=float)
    return BoundCurve(theorem, ns, values, QUANTITY[theorem], dict(constants.provenance))
