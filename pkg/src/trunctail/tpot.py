"""Truncated peaks-over-threshold model: pseudo maximum likelihood and estimators.

The k largest observations are turned into exceedances over the random
threshold ``X_{n-k,n}``.  The largest exceedance plays the role of the
truncation distance, so the fitted model is a GPD truncated at ``E_{1,k}``.
From the fitted ``(xi, tau)``, with ``tau = xi / sigma``, one obtains the
truncation odds, extreme quantiles of the truncated and of the parent
distribution, the truncation point and tail probabilities.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _solver
from ._shape import expm1_ratio, log1p_ratio
from ._solver import SolverOptions


class DomainError(ValueError):
    """Parameters outside the feasible region of the likelihood."""


class NoFiniteEndpointError(ValueError):
    """The fit shows no rough truncation, so the endpoint estimate is infinite."""


@dataclass(frozen=True)
class ExceedanceSet:
    """Exceedances ``E_{j,k} = X_{n-j+1,n} - X_{n-k,n}`` for ``j = 1..k``.

    ``values[0]`` is the largest exceedance ``E_{1,k}``.
    """

    values: np.ndarray = field(repr=False)
    k: int
    n: int
    threshold: float

    @property
    def e1(self) -> float:
        return float(self.values[0])

    @property
    def rest(self) -> np.ndarray:
        """``E_{2,k}, ..., E_{k,k}``."""
        return self.values[1:]

    @property
    def fraction(self) -> float:
        """``k / n``."""
        return self.k / self.n


def exceedances(sample, k: int) -> ExceedanceSet:
    """Exceedances over ``X_{n-k,n}`` from an ascending-sorted sample."""
    x = np.asarray(sample, dtype=float)
    n = x.size
    if not 2 <= k <= n - 1:
        raise ValueError(f"k must satisfy 2 <= k <= n-1 = {n - 1}, got {k}")
    if np.any(np.diff(x) < 0):
        raise ValueError("sample must be sorted in ascending order")
    threshold = float(x[n - k - 1])
    values = x[n - 1 : n - k - 1 : -1] - threshold
    return ExceedanceSet(values=values, k=int(k), n=int(n), threshold=threshold)


def _check_tau(xi: float, tau: float) -> float:
    if tau == 0 or xi == 0 or not xi / tau > 0:
        raise DomainError(f"sigma = xi/tau must be positive (xi={xi}, tau={tau})")
    return xi / tau


def log_likelihood_sigma(xi: float, sigma: float, exc: ExceedanceSet, penalty: bool = False) -> float:
    """Pseudo log-likelihood in the ``(xi, sigma)`` parametrization.

    Unlike :func:`log_likelihood` this is defined at ``xi = 0``, where it is the
    truncated exponential likelihood.  Infeasible points raise
    :class:`DomainError`, or give ``-inf`` when ``penalty`` is set.
    """
    bad = None
    if not sigma > 0:
        bad = f"sigma must be positive, got {sigma}"
    elif not exc.e1 > 0:
        bad = "largest exceedance is zero (ties at the top of the sample)"
    elif not 1.0 + xi * exc.values.max() / sigma > 0:
        bad = f"1 + xi*E/sigma must be positive (xi={xi}, sigma={sigma})"
    if bad:
        if penalty:
            return -np.inf
        raise DomainError(bad)
    m = exc.k - 1
    g = log1p_ratio(xi, exc.rest / sigma)
    g1 = log1p_ratio(xi, exc.e1 / sigma)
    return float(-m * np.log(sigma) - (1.0 + xi) * np.sum(g) - m * np.log(-np.expm1(-g1)))


def log_likelihood(xi: float, tau: float, exc: ExceedanceSet, penalty: bool = False) -> float:
    """Pseudo log-likelihood ``log L_{k,n}(xi, tau)`` of the truncated GPD.

    ``(k-1) log tau - (k-1) log xi - (1 + 1/xi) sum_{j>=2} log(1 + tau E_j)
    - (k-1) log(1 - (1 + tau E_1)^(-1/xi))``.
    """
    try:
        sigma = _check_tau(xi, tau)
    except DomainError:
        if penalty:
            return -np.inf
        raise
    return log_likelihood_sigma(xi, sigma, exc, penalty=penalty)


def score(xi: float, tau: float, exc: ExceedanceSet) -> tuple[float, float]:
    """The partial derivatives of ``log L / (k-1)`` with respect to ``xi`` and ``tau``."""
    sigma = _check_tau(xi, tau)
    if not exc.e1 > 0 or not 1.0 + tau * exc.values.max() > 0:
        raise DomainError(f"infeasible point (xi={xi}, tau={tau})")
    u = exc.rest / sigma
    u1 = exc.e1 / sigma
    g = log1p_ratio(xi, u)
    g1 = log1p_ratio(xi, u1)
    r1 = 1.0 / np.expm1(g1)  # A / (1 - A) with A = (1 + tau E_1)^(-1/xi)
    d_xi = (-1.0 + g.mean() + g1 * r1) / xi
    d_tau = (sigma / xi) * (1.0 - (1.0 + xi) * np.mean(u / (1.0 + xi * u)) - r1 * u1 / (1.0 + xi * u1))
    return float(d_xi), float(d_tau)


def likelihood_equations(xi: float, tau: float, exc: ExceedanceSet) -> tuple[float, float]:
    """Residuals (left minus right side) of the two likelihood equations."""
    sigma = _check_tau(xi, tau)
    w = tau * exc.rest
    w1 = tau * exc.e1
    a = np.exp(-log1p_ratio(xi, exc.e1 / sigma))
    log1 = np.log1p(w1)
    eq1 = np.mean(np.log1p(w)) + a * log1 / (-np.expm1(-log1p_ratio(xi, exc.e1 / sigma))) - xi
    eq2 = np.mean(1.0 / (1.0 + w)) - (1.0 - a / (1.0 + w1)) / ((1.0 + xi) * (1.0 - a))
    return float(eq1), float(eq2)


@dataclass(frozen=True)
class TailFit:
    """Fitted truncated-GPD tail with its threshold context.

    ``candidates`` holds every local maximizer found from the different
    starts, best first.
    """

    xi: float
    sigma: float
    loglik: float
    converged: bool
    iterations: int
    exceedances: ExceedanceSet
    on_boundary: bool = False
    candidates: tuple = field(default=(), repr=False)

    @classmethod
    def from_parameters(cls, xi: float, exc: ExceedanceSet, *, tau=None, sigma=None) -> "TailFit":
        """Wrap given parameters as a fit (for evaluating the estimators directly)."""
        if (tau is None) == (sigma is None):
            raise ValueError("give exactly one of tau or sigma")
        if sigma is None:
            sigma = _check_tau(xi, tau)
        ll = log_likelihood_sigma(xi, sigma, exc, penalty=True) if exc.e1 > 0 else np.nan
        return cls(xi=float(xi), sigma=float(sigma), loglik=ll, converged=True, iterations=0, exceedances=exc)

    @property
    def tau(self) -> float:
        return self.xi / self.sigma

    @property
    def k(self) -> int:
        return self.exceedances.k

    @property
    def n(self) -> int:
        return self.exceedances.n

    @property
    def threshold(self) -> float:
        return self.exceedances.threshold

    @property
    def tail_ratio(self) -> float:
        """``(1 + tau E_{1,k})^(-1/xi)``: fitted GPD survival at the largest exceedance."""
        return float(np.exp(-log1p_ratio(self.xi, self.exceedances.e1 / self.sigma)))

    @property
    def test_statistic(self) -> float:
        """``T_{k,n} = k (1 + tau E_{1,k})^(-1/xi)``."""
        return self.k * self.tail_ratio

    def score(self) -> tuple[float, float]:
        return score(self.xi, self.tau, self.exceedances)


def _classical_kernel(exc: ExceedanceSet) -> _solver._Kernel:
    return _solver._Kernel(exc.e1, exc.values, truncated=False)


def fit_truncated_mle(exc: ExceedanceSet, options: SolverOptions | None = None, start=None) -> TailFit:
    """Pseudo maximum likelihood fit of the truncated GPD to the exceedances.

    Starts: the classical GPD fit, a moment fit, and ``start`` (an
    ``(xi, sigma)`` pair, e.g. the solution at the neighbouring k).  The
    maximizer with the highest likelihood is returned.
    """
    opts = options or SolverOptions()
    if not np.all(np.isfinite(exc.values)):
        raise ValueError("exceedances must be finite")
    if not exc.e1 > 0:
        raise ValueError("largest exceedance is zero: the top of the sample is tied with the threshold")
    kernel = _solver._Kernel(exc.e1, exc.rest, truncated=True, floor=opts.floor)
    s_ref = float(np.log(exc.e1))

    starts = []
    if start is not None:
        starts.append(_solver.feasible_start(start[0], start[1], exc.e1, opts))
    xi_m, sig_m = _solver.moment_start(exc.values)
    starts.append(_solver.feasible_start(xi_m, sig_m, exc.e1, opts))
    classical = _solver.maximize(
        _classical_kernel(exc),
        [_solver.feasible_start(xi_m, sig_m, exc.e1, SolverOptions(xi_bounds=(-1.0, 10.0)))],
        SolverOptions(xi_bounds=(-1.0, 10.0), max_newton=10),
        s_ref,
    )
    if classical:
        starts.append(_solver.feasible_start(classical[0].xi, classical[0].sigma, exc.e1, opts))
    if start is None:
        starts.append(_solver.feasible_start(0.5, float(np.mean(exc.values)), exc.e1, opts))

    unique = []
    for s in starts:
        if all(abs(s[0] - t[0]) > 1e-3 or abs(s[1] - t[1]) > 1e-3 for t in unique):
            unique.append(s)
    candidates = _solver.maximize(kernel, unique, opts, s_ref)
    if not candidates:
        raise ValueError("no feasible starting point for the truncated fit")
    best = candidates[0]
    return TailFit(
        xi=best.xi,
        sigma=best.sigma,
        loglik=best.loglik * (exc.k - 1),
        converged=best.converged,
        iterations=best.iterations,
        exceedances=exc,
        on_boundary=best.on_boundary,
        candidates=tuple(candidates),
    )


def fit_sample(sample, k: int, options: SolverOptions | None = None, start=None) -> TailFit:
    """Sort ``sample`` and fit the truncated model to its top ``k`` exceedances."""
    return fit_truncated_mle(exceedances(np.sort(np.asarray(sample, dtype=float)), k), options, start)


def odds_estimator(fit: TailFit) -> float:
    """Truncation odds ``D_T``, clamped at zero when no rough truncation shows."""
    a = fit.tail_ratio
    k, n = fit.k, fit.n
    return max(0.0, (k / n) * (a - 1.0 / k) / (1.0 - a))


def _odds(fit, odds):
    return odds_estimator(fit) if odds is None else float(odds)


def _pot_quantile(fit: TailFit, log_ratio) -> np.ndarray:
    # X_{n-k,n} + (1/tau) (r^xi - 1) = X_{n-k,n} + sigma (r^xi - 1)/xi
    return fit.threshold + fit.sigma * expm1_ratio(fit.xi, log_ratio)


def quantile_truncated(fit: TailFit, p, odds: float | None = None):
    """Estimate ``Q_T(1 - p)`` of the truncated distribution, ``0 <= p < 1``.

    ``odds`` defaults to :func:`odds_estimator`; with ``odds = 0`` this is the
    classical POT quantile.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p >= 1)):
        raise ValueError("p must lie in [0, 1)")
    d = _odds(fit, odds)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(d + fit.k / fit.n) - np.log(d + p)
    out = _pot_quantile(fit, log_ratio)
    return out if np.ndim(out) else float(out)


def endpoint_estimator(fit: TailFit) -> float:
    """Estimate the truncation point ``T``.

    Raises :class:`NoFiniteEndpointError` when ``T_{k,n} <= 1`` (odds clamped
    to zero).
    """
    a = fit.tail_ratio
    k = fit.k
    if not a - 1.0 / k > 0:
        raise NoFiniteEndpointError(f"no finite endpoint detected at k={k} (T_kn={k * a:.4g} <= 1)")
    return float(_pot_quantile(fit, np.log1p(-1.0 / k) - np.log(a - 1.0 / k)))


def tail_probability(fit: TailFit, c, odds: float | None = None, clip: bool = False):
    """Estimate ``P(X > c)`` for ``c >= X_{n-k,n}``.

    Values beyond the fitted endpoint come out negative; ``clip`` floors them
    at zero.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < fit.threshold):
        raise ValueError(f"c must not lie below the threshold {fit.threshold}")
    x = (c - fit.threshold) / fit.sigma
    if np.any(1.0 + fit.xi * x <= 0):
        raise ValueError("c lies beyond the support of the fitted GPD")
    d = _odds(fit, odds)
    out = (1.0 + d) * (fit.k / fit.n) * np.exp(-log1p_ratio(fit.xi, x)) - d
    if clip:
        out = np.maximum(out, 0.0)
    return out if np.ndim(out) else float(out)


def quantile_parent_reconstructed(fit: TailFit, p, odds: float | None = None):
    """Reconstruct the parent quantile ``Q_Y(1 - p)``, ``0 < p < 1``.

    Levels ``p <= D/(1+D)`` lie inside the truncated-away mass; a warning is
    issued there since the reconstruction is not supported by the data.
    """
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("p must lie in (0, 1)")
    d = _odds(fit, odds)
    if np.any(p <= d / (1.0 + d)):
        warnings.warn(
            f"p <= D/(1+D) = {d / (1 + d):.4g}: reconstruction lies in the truncated mass",
            stacklevel=2,
        )
    log_ratio = np.log(d + fit.k / fit.n) - np.log(p * (d + 1.0))
    out = _pot_quantile(fit, log_ratio)
    return out if np.ndim(out) else float(out)
