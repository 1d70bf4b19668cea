import math

import numpy as np
import pytest

from sgdbounds._kernels import trajectory
from sgdbounds.algorithms import StepSchedule, initial_state, sgd_step
from sgdbounds.problems import (
    AssumptionConstants,
    AssumptionError,
    GeometricMedian,
    LinearRegression,
    LogisticRegression,
    assumption_audit,
    constants_for,
    default_grid,
    geomedian_gradient,
    linreg_gradient,
    logistic_gradient,
    make_problem,
    suboptimality,
)
from sgdbounds.problems.base import EMPIRICAL, EXACT
from sgdbounds.verify import replicate_generator


def central_difference(f, h):
    out = np.empty_like(h)
    for i in range(h.size):
        step = 1e-5 * max(1.0, abs(h[i]))
        up, down = h.copy(), h.copy()
        up[i] += step
        down[i] -= step
        out[i] = (f(up) - f(down)) / (2 * step)
    return out


def assert_fd(grad, loss, h):
    fd = central_difference(loss, h)
    assert np.linalg.norm(fd - grad) <= 1e-6 * np.linalg.norm(grad)


# -- gradients ------------------------------------------------------------------------
def test_linreg_gradient_examples():
    np.testing.assert_array_equal(linreg_gradient((np.array([1.0, 0.0]), 1.0), np.zeros(2)), [-1.0, 0.0])
    theta = np.array([0.3, -1.2, 2.0])
    phi = np.array([1.5, 0.2, -0.7])
    np.testing.assert_array_equal(linreg_gradient((phi, float(phi @ theta)), theta), np.zeros(3))
    with pytest.raises(ValueError):
        linreg_gradient((np.ones(2), 0.0), np.ones(3))


def test_logistic_gradient_examples():
    phi = np.array([0.4, -1.0, 0.9])
    for y in (-1.0, 1.0):
        np.testing.assert_allclose(logistic_gradient((phi, y), np.zeros(3)), -y * phi / 2, rtol=0, atol=0)
    h = phi * 1e4
    assert np.linalg.norm(logistic_gradient((phi, 1.0), h)) < 1e-300


@pytest.mark.parametrize("t", [-700.0, -300.0, 300.0, 700.0])
def test_logistic_stability(t):
    phi = np.array([1.0, 0.0])
    h = np.array([t, 0.0])
    p = LogisticRegression(2)
    for y in (-1.0, 1.0):
        g = logistic_gradient((phi, y), h)
        assert np.all(np.isfinite(g)) and np.linalg.norm(g) <= 1.0
        assert math.isfinite(p.loss((phi, y), h))
    np.testing.assert_allclose(logistic_gradient((phi, 1.0), np.array([-700.0, 0.0])), -phi)


def test_geomedian_gradient_examples():
    np.testing.assert_allclose(geomedian_gradient(np.zeros(2), np.array([3.0, 4.0])), [0.6, 0.8], rtol=1e-15)
    x = np.array([1.0, 2.0])
    np.testing.assert_array_equal(geomedian_gradient(x, x.copy()), np.zeros(2))


@pytest.mark.parametrize("problem", [LinearRegression(4), LogisticRegression(4, theta=[0.5, -0.2, 0.1, 0.3]),
                                     GeometricMedian(4)], ids=lambda p: p.kind)
def test_gradients_match_finite_differences(problem):
    rng = np.random.default_rng(123)
    for _ in range(100):
        obs = problem.sample(rng)
        h = problem.theta + rng.normal(scale=2.0, size=problem.dim)
        g = problem.gradient(obs, h)
        assert_fd(g, lambda v: problem.loss(obs, v), h)


def test_gradient_norms():
    rng = np.random.default_rng(0)
    med = GeometricMedian(5)
    logi = LogisticRegression(3, radius=2.0)
    for _ in range(500):
        h = rng.normal(scale=3.0, size=5)
        assert abs(np.linalg.norm(med.gradient(med.sample(rng), h)) - 1.0) <= 1e-12
        k = rng.normal(scale=5.0, size=3)
        assert np.linalg.norm(logi.gradient(logi.sample(rng), k)) <= 2.0


def test_batch_gradients_agree_with_single():
    rng = np.random.default_rng(4)
    for p in (LinearRegression(3), LogisticRegression(3), GeometricMedian(3)):
        batch = p.sample_batch(rng, 20)
        h = rng.normal(size=3)
        rows = batch if p.kind == "median" else list(zip(*batch))
        single = np.array([p.gradient(obs, h) for obs in rows])
        np.testing.assert_allclose(p.gradient_batch(batch, h), single, rtol=1e-13, atol=1e-15)


# -- suboptimality --------------------------------------------------------------------
def test_linreg_suboptimality_exact():
    p = LinearRegression(2)
    assert suboptimality(p, p.theta + np.array([1.0, 1.0])) == (1.0, 0.0)
    assert suboptimality(p, p.theta) == (0.0, 0.0)
    q = LinearRegression(3, design_scale=1.5, theta=[1.0, 2.0, 3.0])
    e = np.array([0.3, -0.4, 1.0])
    assert suboptimality(q, q.theta + e)[0] == pytest.approx(0.5 * 1.5 ** 2 * e @ e, rel=1e-15)


@pytest.mark.parametrize("problem", [LogisticRegression(3, theta=[0.5, 0.0, -0.5]), GeometricMedian(3)],
                         ids=lambda p: p.kind)
def test_estimated_suboptimality_at_optimum(problem):
    value, se = suboptimality(problem, problem.theta, budget=10 ** 5, rng=np.random.default_rng(8))
    assert abs(value) <= 3 * se + 1e-15


def test_median_suboptimality_brute_force():
    p = GeometricMedian(2)
    h = np.array([1.0, 0.0])
    value, se = suboptimality(p, h, budget=10 ** 6, rng=np.random.default_rng(1))
    rng = np.random.default_rng(2)
    total, total_sq, count = 0.0, 0.0, 0
    for _ in range(10):
        x = rng.standard_normal((10 ** 6, 2))
        diff = np.linalg.norm(x - h, axis=1) - np.linalg.norm(x, axis=1)
        total += diff.sum()
        total_sq += (diff ** 2).sum()
        count += diff.size
    mean = total / count
    brute_se = math.sqrt((total_sq / count - mean ** 2) / count)
    assert abs(value - mean) <= 3 * math.hypot(se, brute_se)
    assert p.closed_form_gap(h) == pytest.approx(mean, abs=3 * brute_se)


def test_suboptimality_flags_negative_estimates():
    class Broken(GeometricMedian):
        def objective_gap(self, h, budget=None, rng=None):
            return -1.0, 0.01

    with pytest.raises(AssertionError, match="stderr"):
        suboptimality(Broken(2), np.ones(2))
    with pytest.raises(ValueError):
        suboptimality(GeometricMedian(2), np.ones(2), budget=0)


def test_median_gap_closed_form_matches_monte_carlo():
    p = GeometricMedian(3, spread=1.7)
    rng = np.random.default_rng(3)
    for r in (0.2, 1.0, 3.0):
        h = p.theta + r * np.array([0.6, 0.0, 0.8])
        value, se = p.objective_gap(h, budget=4 * 10 ** 5, rng=rng)
        assert abs(float(p.closed_form_gap(h)) - value) <= 4 * se


# -- constants -------------------------------------------------------------------------
def test_median_constants():
    p = GeometricMedian(3)
    k = constants_for(p)
    assert (k.C1, k.C2, k.C1p, k.C2p) == (1.0, 0.0, 1.0, 0.0)
    assert k.flag("C1") == EXACT and k.flag("lambda_0") == EMPIRICAL
    assert k.lambda_0 <= k.lambda_min <= k.L_grad_G
    x = p.sample_batch(np.random.default_rng(0), 10 ** 6)
    norms = np.linalg.norm(p.gradient_batch(x, np.array([0.3, -0.1, 0.2])), axis=1)
    assert abs(norms.max() - 1.0) < 1e-12


def test_logistic_constants():
    p = LogisticRegression(3, radius=2.0)
    k = constants_for(p)
    assert (k.C1, k.C1p, k.C2, k.C2p, k.L_grad_G) == (4.0, 16.0, 0.0, 0.0, 1.0)
    phi, _ = p.sample_batch(np.random.default_rng(0), 10 ** 6)
    assert np.linalg.norm(phi, axis=1).max() <= 2.0
    t = np.linspace(-30, 30, 100001)
    s = 1 / (1 + np.exp(-t))
    assert (s * (1 - s)).max() <= 0.25


def test_linreg_constants():
    k = constants_for(LinearRegression(1, design_scale=1.0, noise=1.0))
    assert k.C1 >= 1.0
    assert k.r_lambda0 == math.inf and k.C_lambda0 == 0.0
    assert k.lambda_0 == k.lambda_min == k.L_grad_G == 1.0
    assert k.L_Sigma is not None and k.L_delta == 0.0
    assert k.trace_term == pytest.approx(1.0)
    s2 = LinearRegression(3, design_scale=2.0)
    assert constants_for(s2).lambda_min == 4.0


def test_bounded_models_pair_moment_constants():
    for p in (GeometricMedian(2), LogisticRegression(2)):
        k = constants_for(p)
        assert (k.C2 == 0) == (k.C2p == 0)


def test_initial_moments():
    p = LinearRegression(3)
    theta0 = p.theta + np.array([2.0, 0.0, 0.0])
    k = constants_for(p, theta0)
    assert k.v0 == 4.0 and k.u0 == 4.0


def test_L_delta_formula():
    k = AssumptionConstants(C1=1, C2=0, C1p=1, C2p=0, L_grad_G=2.0, lambda_min=1.0, lambda_0=0.5,
                            r_lambda0=0.25, C_lambda0=0.1, u0=0, v0=0)
    assert k.L_delta == max(2 * 0.1 / 0.5, 2 * 2.0 / (0.5 * 0.25))


def test_constants_validation():
    base = dict(C1=1, C2=0, C1p=1, C2p=0, L_grad_G=1.0, lambda_min=1.0, lambda_0=1.0, r_lambda0=1.0,
                C_lambda0=0.0, u0=0.0, v0=0.0)
    AssumptionConstants(**base)
    for bad in ({"lambda_min": 2.0}, {"lambda_0": 1.5}, {"C1": -1.0}, {"r_lambda0": 0.0},
                {"L_grad_G": math.inf, "lambda_min": 1.0}, {"u0": math.nan}):
        with pytest.raises(AssumptionError):
            AssumptionConstants(**{**base, **bad})
    assert AssumptionConstants(**{**base, "r_lambda0": math.inf}).min_one_r2 == 1.0


def test_make_problem():
    assert make_problem("linreg", dim=2, scale=2.0).s == 2.0
    assert make_problem("median", dim=2, scale=0.5).tau == 0.5
    assert make_problem("logistic", dim=2, scale=3.0).B == 3.0
    with pytest.raises(ValueError):
        make_problem("svm")


# -- audits ------------------------------------------------------------------------
def test_linreg_majg_is_an_equality():
    p = LinearRegression(3)
    k = constants_for(p)
    report = assumption_audit(p, k, budget=2000)
    for e in report.entries:
        if e.check in ("majG", "minG"):
            assert e.margin == pytest.approx(0.0, abs=1e-12 * max(1.0, e.rhs))
    assert report.passed


@pytest.mark.parametrize("problem", [LinearRegression(2), GeometricMedian(2), LogisticRegression(2)],
                         ids=lambda p: p.kind)
def test_audit_at_optimum_has_zero_margins(problem):
    k = constants_for(problem)
    report = assumption_audit(problem, k, grid=[problem.theta], budget=2000)
    assert report.passed
    for check in ("majG", "minG", "delta"):
        assert report.worst(check).margin == 0.0


def test_median_audit_two_dimensional():
    p = GeometricMedian(2)
    grid = default_grid(p, count=20)
    assert np.linalg.norm(grid - p.theta, axis=1).max() <= 3.0 + 1e-12
    report = assumption_audit(p, constants_for(p), grid=grid, budget=10 ** 6)
    assert report.passed, report.summary()


def test_audit_detects_wrong_constants():
    p = GeometricMedian(2)
    k = constants_for(p)
    from dataclasses import replace

    too_flat = replace(k, L_grad_G=0.05, lambda_min=0.05, lambda_0=0.05)
    report = assumption_audit(p, too_flat, budget=20000)
    assert not report.check_passed("majG")


# -- kernel ------------------------------------------------------------------------
@pytest.mark.parametrize("problem", [LinearRegression(3, theta=[1.0, -1.0, 0.5]), GeometricMedian(2, theta=[1.0, 2.0]),
                                     LogisticRegression(3, theta=[0.5, -0.3, 0.2])], ids=lambda p: p.kind)
def test_kernel_matches_reference_loop(problem):
    s = StepSchedule(0.7, 0.75)
    theta0 = problem.theta + 1.0
    checkpoints = np.array([0, 1, 5, 50, 300], dtype=np.int64)
    theta_out = np.empty((checkpoints.size, problem.dim))
    bar_out = np.empty_like(theta_out)
    ok = trajectory(problem.kernel_id, np.asarray(problem.kernel_params(), dtype=float), problem.theta, theta0,
                    s.c_gamma, s.alpha, checkpoints, replicate_generator(7, 3), theta_out, bar_out)
    assert ok

    rng = replicate_generator(7, 3)
    state = initial_state(theta0)
    want_theta, want_bar = [], []
    for n in range(checkpoints[-1] + 1):
        if n in checkpoints:
            want_theta.append(state.theta)
            want_bar.append(state.theta_bar)
        state = sgd_step(state, problem.gradient(problem.sample(rng), state.theta), s)
    np.testing.assert_allclose(theta_out, want_theta, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(bar_out, want_bar, rtol=1e-12, atol=1e-12)
