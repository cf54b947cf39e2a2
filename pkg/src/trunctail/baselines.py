"""Comparison estimators: truncated Pareto, classical GPD maximum likelihood, moment.

All sample-based functions accept unsorted data and sort internally.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import _solver
from ._shape import expm1_ratio, log1p_ratio
from .tpot import ExceedanceSet, NoFiniteEndpointError

# The classical GPD likelihood is bounded only for xi > -1.
CLASSICAL_OPTIONS = _solver.SolverOptions(xi_bounds=(-1.0, 10.0))


class Method(str, enum.Enum):
    TRUNC_PARETO = "trpareto"
    CLASSICAL_MLE = "mle"
    MOMENT = "moment"


@dataclass(frozen=True)
class BaselineFit:
    """Result of a baseline estimator.

    Only the auxiliary fields belonging to ``method`` are filled in, the rest
    stay NaN: ``sigma`` for the classical MLE; ``odds``, ``ratio`` (R_kn) and
    ``hill`` for the truncated Pareto fit; ``m1``, ``m2`` for the moment
    estimator.
    """

    method: Method
    xi: float
    k: int
    n: int
    threshold: float
    converged: bool = True
    sigma: float = np.nan
    odds: float = np.nan
    ratio: float = np.nan
    hill: float = np.nan
    m1: float = np.nan
    m2: float = np.nan
    shift: float = 0.0

    def quantile(self, p):
        """Estimated ``Q(1 - p)`` under this method."""
        p = np.asarray(p, dtype=float)
        if self.method is Method.TRUNC_PARETO:
            with np.errstate(divide="ignore"):
                out = self.threshold * np.exp(
                    self.xi * (np.log(self.odds + self.k / self.n) - np.log(self.odds + p))
                )
        elif self.method is Method.CLASSICAL_MLE:
            out = gpd_pot_quantile(self.xi, self.sigma, self.threshold, self.k, self.n, p)
        else:
            x = self.threshold + self.shift
            out = x + x * self.m1 * (1.0 - self.xi) * expm1_ratio(self.xi, np.log(self.k / (self.n * p))) - self.shift
        return out if np.ndim(out) else float(out)

    def parent_quantile(self, p):
        """Parent-quantile reconstruction ``Q_Y(1 - p)``; truncated Pareto only."""
        if self.method is not Method.TRUNC_PARETO:
            raise ValueError("parent reconstruction is only defined for the truncated Pareto fit")
        p = np.asarray(p, dtype=float)
        out = self.threshold * np.exp(self.xi * (np.log(self.odds + self.k / self.n) - np.log(p * (1.0 + self.odds))))
        return out if np.ndim(out) else float(out)

    def endpoint(self) -> float:
        """Truncation point estimate ``Q(1)``; truncated Pareto only."""
        if self.method is not Method.TRUNC_PARETO:
            raise ValueError("endpoint is only defined for the truncated Pareto fit")
        if not self.odds > 0:
            raise NoFiniteEndpointError(f"no finite endpoint detected at k={self.k}")
        return float(self.quantile(0.0))


def _top(sample, k):
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if not 2 <= k <= n - 1:
        raise ValueError(f"k must satisfy 2 <= k <= n-1 = {n - 1}, got {k}")
    return x, n, x[n - k - 1], x[n - k :][::-1]


def hill(sample, k: int) -> float:
    """Hill statistic ``(1/k) sum_j log X_{n-j+1,n} - log X_{n-k,n}``."""
    _, _, threshold, top = _top(sample, k)
    if not threshold > 0:
        raise ValueError("Hill statistic needs the top k+1 observations to be positive")
    return float(np.mean(np.log(top)) - np.log(threshold))


def trunc_pareto_equation(xi, hill_value: float, ratio: float) -> float:
    """``xi + R^(1/xi) log R / (1 - R^(1/xi)) - H``; zero at the truncated Pareto estimate."""
    log_r = np.log(ratio)
    a = np.exp(log_r / xi)
    return xi + a * log_r / (-np.expm1(log_r / xi)) - hill_value


def trunc_pareto_odds(xi: float, ratio: float, k: int, n: int) -> float:
    """Truncation odds of the truncated Pareto fit, clamped at zero."""
    a = ratio ** (1.0 / xi)
    return max(0.0, (k / n) * (a - 1.0 / k) / (1.0 - a))


def trunc_pareto_fit(sample, k: int, bracket=(1e-6, 20.0)) -> BaselineFit:
    """Truncated Pareto tail fit at ``k``.

    The shape solves the Hill-type equation on ``bracket``; without a sign
    change there the fit is returned with ``converged=False`` and NaN shape.
    """
    x, n, threshold, top = _top(sample, k)
    if not threshold > 0:
        raise ValueError("truncated Pareto fit needs positive tail data")
    h = float(np.mean(np.log(top)) - np.log(threshold))
    ratio = float(threshold / x[-1])
    if ratio >= 1.0:
        raise ValueError("R_kn = X_{n-k,n}/X_{n,n} equals 1: the top of the sample is tied")
    lo, hi = bracket
    f_lo = trunc_pareto_equation(lo, h, ratio)
    f_hi = trunc_pareto_equation(hi, h, ratio)
    if not f_lo * f_hi < 0:
        return BaselineFit(Method.TRUNC_PARETO, np.nan, k, n, threshold, converged=False, ratio=ratio, hill=h)
    xi = optimize.brentq(trunc_pareto_equation, lo, hi, args=(h, ratio), xtol=1e-15, rtol=4 * np.finfo(float).eps)
    odds = trunc_pareto_odds(xi, ratio, k, n)
    return BaselineFit(Method.TRUNC_PARETO, float(xi), k, n, threshold, odds=odds, ratio=ratio, hill=h)


def gpd_pot_quantile(xi, sigma, threshold, k, n, p):
    """Classical POT quantile ``X_{n-k,n} + sigma ((k/(n p))^xi - 1) / xi``."""
    p = np.asarray(p, dtype=float)
    out = threshold + sigma * expm1_ratio(xi, np.log(k / (n * p)))
    return out if np.ndim(out) else float(out)


def gpd_pot_tail_probability(xi, sigma, threshold, k, n, c):
    """Classical POT tail probability ``(k/n) (1 + xi (c - X_{n-k,n}) / sigma)^(-1/xi)``."""
    x = (np.asarray(c, dtype=float) - threshold) / sigma
    out = (k / n) * np.exp(-log1p_ratio(xi, x))
    return out if np.ndim(out) else float(out)


def classical_gpd_mle(exc: ExceedanceSet, options: _solver.SolverOptions | None = None) -> BaselineFit:
    """GPD maximum likelihood on all k exceedances, without a truncation term."""
    opts = options or CLASSICAL_OPTIONS
    if not exc.e1 > 0:
        raise ValueError("largest exceedance is zero: the top of the sample is tied with the threshold")
    kernel = _solver._Kernel(exc.e1, exc.values, truncated=False, floor=opts.floor)
    xi_m, sig_m = _solver.moment_start(exc.values)
    starts = [
        _solver.feasible_start(xi_m, sig_m, exc.e1, opts),
        _solver.feasible_start(0.1, float(np.mean(exc.values)), exc.e1, opts),
    ]
    candidates = _solver.maximize(kernel, starts, opts, float(np.log(exc.e1)))
    if not candidates:
        raise ValueError("no feasible starting point for the classical GPD fit")
    best = candidates[0]
    return BaselineFit(
        Method.CLASSICAL_MLE, best.xi, exc.k, exc.n, exc.threshold, converged=best.converged, sigma=best.sigma
    )


def moment_estimator(sample, k: int, shift: float = 0.0) -> BaselineFit:
    """Moment estimator from the log-spacings over ``X_{n-k,n}``.

    Needs a positive threshold.  ``shift`` is added to the data before
    computing (and removed again from quantiles) for samples that are not
    positive; the caller has to opt in to it.
    """
    _, n, threshold, top = _top(sample, k)
    x_t = threshold + shift
    if not x_t > 0:
        raise ValueError("moment estimator needs a positive threshold X_{n-k,n} (pass shift to opt in)")
    logs = np.log((top + shift) / x_t)
    m1 = float(np.mean(logs))
    m2 = float(np.mean(logs * logs))
    if not m2 > 0:
        raise ValueError("all log-spacings are zero; moment estimator undefined")
    if m1 * m1 >= m2:
        raise ValueError("log-spacings are all equal; moment estimator undefined")
    xi = m1 + 1.0 - 0.5 / (1.0 - m1 * m1 / m2)
    return BaselineFit(Method.MOMENT, float(xi), k, n, float(threshold), m1=m1, m2=m2, shift=float(shift))
