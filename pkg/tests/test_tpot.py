import math
import warnings

import numpy as np
import pytest
from scipy import stats

from conftest import make_exc
from trunctail import baselines
from trunctail.distributions import ParentModel, TruncationSpec, sample_truncated
from trunctail.tpot import (
    DomainError,
    NoFiniteEndpointError,
    TailFit,
    endpoint_estimator,
    exceedances,
    fit_sample,
    fit_truncated_mle,
    likelihood_equations,
    log_likelihood,
    odds_estimator,
    quantile_parent_reconstructed,
    quantile_truncated,
    score,
    tail_probability,
)


def _naive_loglik(xi, tau, e):
    # the printed formula, evaluated literally
    m = e.size - 1
    a = (1 + tau * e[0]) ** (-1 / xi)
    return m * math.log(tau) - m * math.log(xi) - (1 + 1 / xi) * np.sum(np.log(1 + tau * e[1:])) - m * math.log(1 - a)


def _naive_score(xi, tau, e):
    # analytic derivatives of the printed formula, no small-shape care
    m = e.size - 1
    a = (1 + tau * e[0]) ** (-1 / xi)
    log1 = math.log(1 + tau * e[0])
    d_xi = -m / xi + np.sum(np.log(1 + tau * e[1:])) / xi**2 + m * a * log1 / (xi**2 * (1 - a))
    d_tau = m / tau - (1 + 1 / xi) * np.sum(e[1:] / (1 + tau * e[1:])) - m * e[0] * a / (xi * (1 + tau * e[0]) * (1 - a))
    return d_xi, d_tau


def _truncated_pareto_sample(seed, n=500, level=0.99):
    return sample_truncated(ParentModel.pareto(), TruncationSpec.at_level(level), n, seed)


# ---- exceedances ----


def test_exceedances_example():
    exc = exceedances(np.array([1.0, 2.0, 4.0, 5.0, 8.0, 10.0]), 3)
    np.testing.assert_array_equal(exc.values, [6.0, 4.0, 1.0])
    assert exc.threshold == 4.0
    assert (exc.k, exc.n) == (3, 6)


def test_exceedances_at_largest_k():
    x = np.sort(np.random.default_rng(0).exponential(size=50))
    exc = exceedances(x, 49)
    assert exc.e1 == x[-1] - x[0]


def test_exceedances_errors():
    x = np.arange(10.0)
    for k in (1, 10, 11):
        with pytest.raises(ValueError):
            exceedances(x, k)
    with pytest.raises(ValueError):
        exceedances(x[::-1], 3)


def test_tied_top_rejected_before_fitting():
    exc = exceedances(np.array([1.0, 2.0, 3.0, 3.0, 3.0]), 2)
    np.testing.assert_array_equal(exc.values, [0.0, 0.0])
    with pytest.raises(ValueError, match="tied"):
        fit_truncated_mle(exc)


# ---- likelihood ----


def test_log_likelihood_hand_value():
    # -2 log 2 - log(3/4) = -log 3
    exc = make_exc([3.0, 1.0], n=10)
    assert log_likelihood(1.0, 1.0, exc) == pytest.approx(-math.log(3.0), abs=1e-14)
    assert log_likelihood(1.0, 1.0, exc) == pytest.approx(-1.098612, abs=1e-6)


def test_log_likelihood_scaling():
    rng = np.random.default_rng(3)
    e = np.concatenate([[5.0], rng.uniform(0, 4, 20)])
    exc, scaled = make_exc(e, 100), make_exc(3.5 * e, 100)
    for xi, tau in [(0.5, 0.7), (-0.1, -0.02), (2.0, 4.0)]:
        lhs = log_likelihood(xi, tau / 3.5, scaled)
        assert lhs == pytest.approx(log_likelihood(xi, tau, exc) - 20 * math.log(3.5), rel=1e-12)


def test_log_likelihood_no_truncation_limit():
    rng = np.random.default_rng(5)
    rest = rng.pareto(2.0, 30)
    exc = make_exc(np.concatenate([[1e12], rest]), 100)
    xi, sigma = 0.5, 1.3
    classical = stats.genpareto.logpdf(exc.rest, c=xi, scale=sigma).sum()
    assert log_likelihood(xi, xi / sigma, exc) == pytest.approx(classical, rel=1e-12)


def test_log_likelihood_domain():
    exc = make_exc([3.0, 1.0, 0.5], n=10)
    with pytest.raises(DomainError):
        log_likelihood(1.0, -1.0, exc)
    with pytest.raises(DomainError):
        log_likelihood(-0.5, -0.5, exc)  # 1 + tau E_1 < 0
    assert log_likelihood(-0.5, -0.5, exc, penalty=True) == -math.inf


def _random_points(rng, count):
    pts = []
    while len(pts) < count:
        xi = rng.uniform(-0.45, 2.5)
        if abs(xi) < 1e-3:
            continue
        sigma = rng.uniform(0.2, 5.0)
        k = int(rng.integers(5, 60))
        top = sigma / -xi if xi < 0 else 10 * sigma
        e = rng.uniform(0.0, 0.95 * top, k)
        e[-1] = 0.0
        pts.append((xi, xi / sigma, make_exc(e, 4 * k)))
    return pts


def test_score_matches_central_differences():
    h = 1e-6
    worst = 0.0
    for xi, tau, exc in _random_points(np.random.default_rng(2017), 100):
        d_xi, d_tau = score(xi, tau, exc)
        m = exc.k - 1
        fd_xi = (log_likelihood(xi + h, tau, exc) - log_likelihood(xi - h, tau, exc)) / (2 * h) / m
        fd_tau = (log_likelihood(xi, tau + h, exc) - log_likelihood(xi, tau - h, exc)) / (2 * h) / m
        for a, b in ((d_xi, fd_xi), (d_tau, fd_tau)):
            worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
    assert worst <= 1e-5


def test_small_shape_branch_matches_printed_formula():
    xi = 1e-5
    rng = np.random.default_rng(8)
    for _ in range(20):
        sigma = rng.uniform(0.5, 3.0)
        e = rng.exponential(sigma, 40)
        exc = make_exc(e, 200)
        tau = xi / sigma
        assert log_likelihood(xi, tau, exc) == pytest.approx(_naive_loglik(xi, tau, exc.values), abs=1e-6)
        d_xi, d_tau = _naive_score(xi, tau, exc.values)
        s_xi, s_tau = score(xi, tau, exc)
        m = exc.k - 1
        assert s_xi == pytest.approx(d_xi / m, abs=1e-6)
        # tau is tiny here; compare on the sigma scale where both are O(1)
        assert s_tau * tau == pytest.approx(d_tau * tau / m, abs=1e-6)


def test_likelihood_equations_vanish_with_score():
    x = _truncated_pareto_sample(11)
    fit = fit_sample(x, 200)
    assert fit.converged
    eq1, eq2 = likelihood_equations(fit.xi, fit.tau, fit.exceedances)
    assert abs(eq1) < 1e-8 and abs(eq2) < 1e-8


# ---- fitting ----


def test_fit_is_stationary_and_self_consistent():
    for seed in range(5):
        x = _truncated_pareto_sample(seed)
        fit = fit_sample(x, 300)
        assert fit.converged
        assert max(abs(v) for v in fit.score()) <= 1e-8
        again = fit_truncated_mle(fit.exceedances, start=(fit.xi, fit.sigma))
        assert again.xi == pytest.approx(fit.xi, abs=1e-10)
        assert again.tau == pytest.approx(fit.tau, abs=1e-10 * max(1.0, abs(fit.tau)))


def test_fit_beats_grid_search():
    x = _truncated_pareto_sample(99)
    fit = fit_sample(x, 150)
    exc = fit.exceedances
    best = -math.inf
    for xi in np.linspace(-0.45, 3.0, 120):
        if abs(xi) < 1e-9:
            continue
        for log_sigma in np.linspace(np.log(exc.e1) - 6, np.log(exc.e1) + 3, 120):
            best = max(best, log_likelihood(xi, xi / np.exp(log_sigma), exc, penalty=True))
    assert fit.loglik >= best - 1e-9


def test_fit_feasibility():
    x = _truncated_pareto_sample(4)
    fit = fit_sample(x, 100)
    assert fit.sigma >= 1e-10
    assert np.all(1 + fit.tau * fit.exceedances.values >= 1e-10)
    assert fit.candidates and fit.candidates[0].loglik * (fit.k - 1) == pytest.approx(fit.loglik)


# ---- estimators on a constructed fit ----


def test_odds_examples(worked_fit):
    assert worked_fit.tail_ratio == pytest.approx(0.2, rel=1e-14)
    assert odds_estimator(worked_fit) == pytest.approx(0.0125, rel=1e-12)
    # tail ratio exactly 1/k, then below it
    exc = make_exc([9.0, 1.0, 0.0] + [0.5] * 7, n=100)
    assert odds_estimator(TailFit.from_parameters(1.0, exc, tau=1.0)) == 0.0
    exc = make_exc([19.0, 1.0, 0.0] + [0.5] * 7, n=100)
    assert odds_estimator(TailFit.from_parameters(1.0, exc, tau=1.0)) == 0.0


def test_quantile_truncated_examples(worked_fit):
    assert quantile_truncated(worked_fit, 0.01) == pytest.approx(9.0, rel=1e-12)
    assert quantile_truncated(worked_fit, 0.1) == pytest.approx(worked_fit.threshold, rel=1e-14)
    with pytest.raises(ValueError):
        quantile_truncated(worked_fit, 1.0)


def test_endpoint_example(worked_fit):
    assert endpoint_estimator(worked_fit) == pytest.approx(13.0, rel=1e-12)
    assert quantile_truncated(worked_fit, 0.0) == pytest.approx(13.0, rel=1e-12)


def test_tail_probability_examples(worked_fit):
    d = odds_estimator(worked_fit)
    assert tail_probability(worked_fit, 9.0) == pytest.approx(0.00775, rel=1e-10)
    assert tail_probability(worked_fit, 5.0) == pytest.approx((1 + d) * 0.1 - d, rel=1e-12)
    # beyond the endpoint: raw negative value, or 0 when clipped
    assert tail_probability(worked_fit, 20.0) < 0
    assert tail_probability(worked_fit, 20.0, clip=True) == 0.0
    with pytest.raises(ValueError):
        tail_probability(worked_fit, 4.0)


def test_parent_quantile_example(worked_fit):
    # p = 0.01 lies just inside D/(1+D) = 0.0123 here, hence the warning
    with pytest.warns(UserWarning):
        q = quantile_parent_reconstructed(worked_fit, 0.01)
    assert q == pytest.approx(5 + 10 + 1 / 9, rel=1e-12)
    assert q == pytest.approx(15.1111, abs=1e-4)


def test_parent_quantile_warns_inside_truncated_mass(worked_fit):
    with pytest.warns(UserWarning, match="truncated mass"):
        quantile_parent_reconstructed(worked_fit, 0.005)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        quantile_parent_reconstructed(worked_fit, 0.05)


def test_no_finite_endpoint():
    exc = make_exc([19.0, 1.0, 0.0] + [0.5] * 7, n=100)
    fit = TailFit.from_parameters(1.0, exc, tau=1.0)
    with pytest.raises(NoFiniteEndpointError):
        endpoint_estimator(fit)


def _fits(count=25):
    out = []
    for seed in range(count):
        level = (0.975, 0.99, 1.0)[seed % 3]
        model = (ParentModel.pareto(), ParentModel.exponential(), ParentModel.gpd(-0.2))[seed % 3 - 1]
        x = sample_truncated(model, TruncationSpec.at_level(level), 500, [31, seed])
        out.append(fit_sample(x, 50 + 10 * seed))
    return out


@pytest.fixture(scope="module")
def sample_fits():
    return _fits()


def test_endpoint_identity_and_dominance(sample_fits):
    for fit in sample_fits:
        if odds_estimator(fit) > 0:
            t_hat = endpoint_estimator(fit)
            assert quantile_truncated(fit, 0.0) == pytest.approx(t_hat, rel=1e-10)
            if fit.converged:
                assert t_hat >= fit.threshold + fit.exceedances.e1 * (1 - 1e-12)


def test_inversion_residual(sample_fits):
    for fit in sample_fits:
        d, r = odds_estimator(fit), fit.k / fit.n
        for p in (0.001, 0.01, 0.05):
            q = quantile_truncated(fit, p, d)
            expected = -(d + p) * d * (1 - r) / (d + r)
            assert tail_probability(fit, q, d) - p == pytest.approx(expected, abs=1e-12)


def test_clamp_equivalence(sample_fits):
    for fit in sample_fits:
        assert (odds_estimator(fit) > 0) == (fit.test_statistic > 1)


def test_reduction_to_classical_pot(sample_fits):
    for fit in sample_fits:
        p = np.array([0.001, 0.01, 0.05])
        classical = baselines.gpd_pot_quantile(fit.xi, fit.sigma, fit.threshold, fit.k, fit.n, p)
        np.testing.assert_allclose(quantile_truncated(fit, p, odds=0.0), classical, rtol=1e-12)
        np.testing.assert_allclose(quantile_parent_reconstructed(fit, p, odds=0.0), classical, rtol=1e-12)
        c = fit.threshold + np.array([0.0, 0.5, 1.0]) * fit.exceedances.e1
        np.testing.assert_allclose(
            tail_probability(fit, c, odds=0.0),
            baselines.gpd_pot_tail_probability(fit.xi, fit.sigma, fit.threshold, fit.k, fit.n, c),
            rtol=1e-12,
        )


def test_parent_quantile_dominates_truncated(sample_fits):
    for fit in sample_fits:
        p = np.linspace(0.001, 0.2, 30)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            qy = quantile_parent_reconstructed(fit, p)
        assert np.all(qy >= quantile_truncated(fit, p) - 1e-12 * np.abs(qy))


def test_location_equivariance():
    x = _truncated_pareto_sample(21)
    base = fit_sample(x, 200)
    moved = fit_sample(x + 1000.0, 200)
    assert moved.xi == pytest.approx(base.xi, abs=1e-7)
    assert moved.tau == pytest.approx(base.tau, rel=1e-6)
    assert odds_estimator(moved) == pytest.approx(odds_estimator(base), rel=1e-6, abs=1e-12)
    assert moved.test_statistic == pytest.approx(base.test_statistic, rel=1e-6)
    assert quantile_truncated(moved, 0.01) - 1000.0 == pytest.approx(quantile_truncated(base, 0.01), rel=1e-6)
