"""Evaluate every estimator over a range of k (the usual diagnostic plots against k)."""

from __future__ import annotations

import warnings

import numpy as np

from . import baselines, gof, tpot
from ._solver import SolverOptions

METHODS = ("tpot", "trpareto", "mle", "moment")
DEFAULT_K_MIN = 10


def _safe(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, ZeroDivisionError, FloatingPointError):
        return np.nan


def _col(prefix: str, value: float) -> str:
    return f"{prefix}@{value:g}"


def tpot_row(fit: tpot.TailFit, p_list=(), c_list=(), clip: bool = False) -> dict:
    """All truncated-POT estimates derived from one fit, as a flat row."""
    odds = tpot.odds_estimator(fit)
    test05 = gof.truncation_test(fit, 0.05)
    row = {
        "k": fit.k,
        "n": fit.n,
        "threshold": fit.threshold,
        "xi": fit.xi,
        "tau": fit.tau,
        "sigma": fit.sigma,
        "loglik": fit.loglik,
        "converged": bool(fit.converged),
        "odds": odds,
        "endpoint": _safe(tpot.endpoint_estimator, fit) if odds > 0 else np.inf,
        "statistic": test05.statistic,
        "p_value": test05.p_value,
        "reject@0.05": test05.reject,
        "reject@0.01": gof.truncation_test(fit, 0.01).reject,
    }
    for p in p_list:
        row[_col("qT", p)] = _safe(tpot.quantile_truncated, fit, p, odds)
        row[_col("qY", p)] = _safe(_parent_quiet, fit, p, odds)
    for c in c_list:
        row[_col("prob", c)] = _safe(tpot.tail_probability, fit, c, odds, clip)
    return row


def _parent_quiet(fit, p, odds):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return tpot.quantile_parent_reconstructed(fit, p, odds)


def baseline_row(sample_sorted, k: int, methods, p_list=(), exc=None) -> dict:
    """Baseline estimates at ``k`` for the requested methods (NaN on failure)."""
    row = {}
    if "trpareto" in methods:
        fit = _safe(baselines.trunc_pareto_fit, sample_sorted, k)
        ok = isinstance(fit, baselines.BaselineFit) and fit.converged
        row["xi_trpareto"] = fit.xi if ok else np.nan
        row["odds_trpareto"] = fit.odds if ok else np.nan
        row["endpoint_trpareto"] = (_safe(fit.endpoint) if fit.odds > 0 else np.inf) if ok else np.nan
        for p in p_list:
            row[_col("qT_trpareto", p)] = _safe(fit.quantile, p) if ok else np.nan
            row[_col("qY_trpareto", p)] = _safe(fit.parent_quantile, p) if ok else np.nan
    if "mle" in methods:
        exc = exc or tpot.exceedances(sample_sorted, k)
        fit = _safe(baselines.classical_gpd_mle, exc)
        ok = isinstance(fit, baselines.BaselineFit)
        row["xi_mle"] = fit.xi if ok else np.nan
        row["sigma_mle"] = fit.sigma if ok else np.nan
        row["converged_mle"] = bool(fit.converged) if ok else False
        for p in p_list:
            row[_col("q_mle", p)] = _safe(fit.quantile, p) if ok else np.nan
    if "moment" in methods:
        fit = _safe(baselines.moment_estimator, sample_sorted, k)
        ok = isinstance(fit, baselines.BaselineFit)
        row["xi_moment"] = fit.xi if ok else np.nan
        for p in p_list:
            row[_col("q_moment", p)] = _safe(fit.quantile, p) if ok else np.nan
    return row


def k_sweep(
    sample,
    k_min: int | None = None,
    k_max: int | None = None,
    p_list=(),
    c_list=(),
    methods=("tpot",),
    warm_start: bool = True,
    clip: bool = False,
    options: SolverOptions | None = None,
) -> list[dict]:
    """One row per k in ``[k_min, k_max]`` (defaults 10 and n-1), ordered by k.

    Non-converged fits stay in the table with ``converged = False``; a k
    where the truncated fit cannot even start (e.g. tied top values) gets a
    row of NaNs.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    k_min = max(2, min(DEFAULT_K_MIN, n - 1)) if k_min is None else int(k_min)
    k_max = n - 1 if k_max is None else int(k_max)
    if not 2 <= k_min <= k_max <= n - 1:
        raise ValueError(f"need 2 <= k_min <= k_max <= n-1 = {n - 1}, got [{k_min}, {k_max}]")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")

    rows = []
    previous = None
    for k in range(k_min, k_max + 1):
        exc = tpot.exceedances(x, k)
        row = {"k": k, "n": n, "threshold": exc.threshold}
        if "tpot" in methods:
            try:
                fit = tpot.fit_truncated_mle(exc, options, start=previous if warm_start else None)
            except ValueError:
                row.update(converged=False)
            else:
                row.update(tpot_row(fit, p_list, c_list, clip))
                if fit.converged:
                    previous = (fit.xi, fit.sigma)
        row.update(baseline_row(x, k, [m for m in methods if m != "tpot"], p_list, exc))
        rows.append(row)
    return rows
