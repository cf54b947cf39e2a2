import math

import numpy as np
import pytest

from trunctail import baselines, gof, sweep, tpot
from trunctail.distributions import ParentModel, TruncationSpec, sample_truncated


@pytest.fixture(scope="module")
def sample():
    return sample_truncated(ParentModel.pareto(), TruncationSpec.at_level(0.99), 300, 77)


def test_rows_match_single_k_operations(sample):
    rows = sweep.k_sweep(sample, 40, 60, p_list=(0.01,), c_list=(20.0,), methods=sweep.METHODS, warm_start=False)
    assert [r["k"] for r in rows] == list(range(40, 61))
    for row in rows[::5]:
        k = row["k"]
        fit = tpot.fit_sample(sample, k)
        assert row["xi"] == pytest.approx(fit.xi, abs=1e-9)
        d = tpot.odds_estimator(fit)
        assert row["odds"] == pytest.approx(d, rel=1e-8, abs=1e-14)
        assert row["qT@0.01"] == pytest.approx(tpot.quantile_truncated(fit, 0.01), rel=1e-8)
        assert row["statistic"] == pytest.approx(fit.test_statistic, rel=1e-8)
        assert row["reject@0.05"] == gof.truncation_test(fit, 0.05).reject
        assert row["prob@20"] == pytest.approx(tpot.tail_probability(fit, 20.0), rel=1e-7, abs=1e-14)
        tp = baselines.trunc_pareto_fit(sample, k)
        assert row["xi_trpareto"] == tp.xi
        assert row["xi_moment"] == baselines.moment_estimator(sample, k).xi
        assert row["q_mle@0.01"] == pytest.approx(baselines.classical_gpd_mle(fit.exceedances).quantile(0.01), rel=1e-8)


def test_warm_start_agrees_with_cold(sample):
    warm = sweep.k_sweep(sample, 30, 50)
    cold = sweep.k_sweep(sample, 30, 50, warm_start=False)
    for a, b in zip(warm, cold):
        assert a["loglik"] == pytest.approx(b["loglik"], rel=1e-9)


def test_default_range(sample):
    rows = sweep.k_sweep(sample[:40])
    assert rows[0]["k"] == 10 and rows[-1]["k"] == 39


def test_endpoint_is_infinite_without_truncation_signal(sample):
    for row in sweep.k_sweep(sample, 20, 80):
        if row["odds"] == 0:
            assert row["endpoint"] == math.inf
        else:
            assert math.isfinite(row["endpoint"])


def test_bad_ranges(sample):
    with pytest.raises(ValueError):
        sweep.k_sweep(sample, 5, 400)
    with pytest.raises(ValueError):
        sweep.k_sweep(sample, 50, 40)
    with pytest.raises(ValueError):
        sweep.k_sweep(sample, methods=("nope",))


def test_tied_top_gives_unconverged_row():
    x = np.concatenate([np.linspace(1, 2, 30), [5.0] * 12])
    rows = sweep.k_sweep(x, 9, 11)
    assert all(r["converged"] is False for r in rows)
