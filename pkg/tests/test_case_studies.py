"""Reference case-study numbers, checked only when the datasets are supplied.

Point the environment variables below at delimited text files holding one
numeric column (use ``<VAR>_COLUMN`` to pick a column by name or index):

  TRUNCTAIL_GRONINGEN  earthquake magnitudes (n = 200, Richter scale)
  TRUNCTAIL_DIAMONDS   diamond sizes in carats
  TRUNCTAIL_MOLENBEEK  river peak flows in m^3/s (n = 426)
"""

import os
import warnings

import numpy as np
import pytest

from trunctail import baselines, cli, dataio, gof, tpot

# Range of k over which the Groningen estimates are read off.
GRONINGEN_STABLE_K = range(40, 101)


def _dataset(var):
    path = os.environ.get(var)
    if not path:
        pytest.skip(f"{var} not set")
    col = os.environ.get(f"{var}_COLUMN")
    if col is not None and col.isdigit():
        col = int(col)
    return dataio.load_csv(path, column=col)


def test_groningen_endpoint_and_odds():
    x = _dataset("TRUNCTAIL_GRONINGEN").sorted()
    endpoints, odds = [], []
    for k in GRONINGEN_STABLE_K:
        fit = tpot.fit_sample(x, k)
        d = tpot.odds_estimator(fit)
        odds.append(d)
        if d > 0:
            endpoints.append(tpot.endpoint_estimator(fit))
    assert abs(np.median(endpoints) - 3.75) <= 0.1
    assert 0.01 <= np.median(odds) <= 0.02


def test_groningen_endpoint_via_energy():
    m = _dataset("TRUNCTAIL_GRONINGEN").sorted()
    energy = dataio.magnitude_to_energy(m)
    ends = []
    for k in GRONINGEN_STABLE_K:
        fit = baselines.trunc_pareto_fit(energy, k)
        if fit.converged and fit.odds > 0:
            ends.append(dataio.energy_to_magnitude(fit.endpoint()))
    assert abs(np.median(ends) - 3.75) <= 0.1


def test_groningen_sweep_row_count(capsys):
    path = os.environ.get("TRUNCTAIL_GRONINGEN") or pytest.skip("TRUNCTAIL_GRONINGEN not set")
    code = cli.main(["fit", path, "--k-range", "10:199", "--format", "csv"])
    assert code == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 191


def test_diamonds_shape_and_parent_quantile():
    x = _dataset("TRUNCTAIL_DIAMONDS").sorted()
    fit = tpot.fit_sample(x, 250)
    assert abs(fit.xi - 0.5) <= 0.05
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert abs(tpot.quantile_parent_reconstructed(fit, 0.01) - 120) <= 5


def test_diamonds_truncation_rejected():
    x = _dataset("TRUNCTAIL_DIAMONDS").sorted()
    assert gof.truncation_test(tpot.fit_sample(x, 110), 0.05).reject


def test_molenbeek_parent_quantile():
    x = _dataset("TRUNCTAIL_MOLENBEEK").sorted()
    assert x.size == 426
    fit = tpot.fit_sample(x, 100)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert abs(tpot.quantile_parent_reconstructed(fit, 0.03) - 6.5) <= 0.2
