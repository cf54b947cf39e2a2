"""Likelihood kernels in the (xi, log sigma) chart and the shared maximizer.

Both the truncated-GPD pseudo likelihood and the classical GPD likelihood are
maximized the same way: Nelder-Mead from several starts, then a damped Newton
polish on the analytic gradient with a finite-difference Hessian.  All
log-likelihoods here are divided by the number of terms so tolerances do not
depend on k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from ._shape import log1p_ratio, log1p_ratio_dxi

FLOOR = 1e-10


@dataclass(frozen=True)
class SolverOptions:
    """Knobs for :func:`maximize`.

    ``xi_bounds`` is the admissible shape interval; a maximizer within
    ``boundary_tol`` of either end is reported as not converged.
    """

    xi_bounds: tuple[float, float] = (-0.49, 10.0)
    floor: float = FLOOR
    gtol: float = 1e-10
    max_newton: int = 60
    nm_maxiter: int = 1500
    nm_xatol: float = 1e-7
    nm_fatol: float = 1e-12
    boundary_tol: float = 1e-6
    log_sigma_span: float = 30.0


@dataclass
class Candidate:
    xi: float
    log_sigma: float
    loglik: float
    grad: np.ndarray
    converged: bool
    iterations: int
    on_boundary: bool = False
    start: tuple = field(default=(np.nan, np.nan))

    @property
    def sigma(self) -> float:
        return float(np.exp(self.log_sigma))


class _Kernel:
    """Normalized log-likelihood and gradient in (xi, s = log sigma)."""

    def __init__(self, e1: float, rest: np.ndarray, truncated: bool, floor: float = FLOOR):
        self.e1 = float(e1)
        self.rest = np.asarray(rest, dtype=float)
        self.truncated = truncated
        self.floor = floor
        self.m = self.rest.size

    def feasible(self, xi, s) -> bool:
        sigma = np.exp(s)
        if not (np.isfinite(sigma) and sigma >= self.floor):
            return False
        emax = max(self.e1, self.rest.max(initial=0.0))
        return 1.0 + xi * emax / sigma >= self.floor

    def loglik(self, xi, s) -> float:
        if not self.feasible(xi, s):
            return -np.inf
        sigma = np.exp(s)
        g = log1p_ratio(xi, self.rest / sigma)
        value = -s - (1.0 + xi) * g.mean()
        if self.truncated:
            g1 = log1p_ratio(xi, self.e1 / sigma)
            value -= np.log(-np.expm1(-g1))
        return float(value)

    def grad(self, xi, s) -> np.ndarray:
        sigma = np.exp(s)
        u = self.rest / sigma
        z = xi * u
        g = log1p_ratio(xi, u)
        dxi = -g.mean() - (1.0 + xi) * log1p_ratio_dxi(xi, u).mean()
        ds = -1.0 + (1.0 + xi) * (u / (1.0 + z)).mean()
        if self.truncated:
            u1 = self.e1 / sigma
            g1 = log1p_ratio(xi, u1)
            r1 = 1.0 / np.expm1(g1)
            dxi -= r1 * log1p_ratio_dxi(xi, u1)
            ds += r1 * u1 / (1.0 + xi * u1)
        return np.array([dxi, ds])


def _hessian(kernel: _Kernel, x: np.ndarray) -> np.ndarray:
    h = 1e-6 * (1.0 + np.abs(x))
    H = np.empty((2, 2))
    for i in range(2):
        step = np.zeros(2)
        step[i] = h[i]
        H[:, i] = (kernel.grad(*(x + step)) - kernel.grad(*(x - step))) / (2.0 * h[i])
    return 0.5 * (H + H.T)


def _inside(x, lo, hi, s_lo, s_hi) -> bool:
    return lo < x[0] <= hi and s_lo <= x[1] <= s_hi


def _polish(kernel, x, opts, s_lo, s_hi):
    lo, hi = opts.xi_bounds
    f = kernel.loglik(*x)
    g = kernel.grad(*x)
    for it in range(1, opts.max_newton + 1):
        if np.max(np.abs(g)) <= opts.gtol:
            return x, f, g, True, it - 1
        H = _hessian(kernel, x)
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = g
        if not np.all(np.isfinite(step)) or step @ g <= 0:
            # not an ascent direction: fall back to a scaled gradient step
            step = g / max(1.0, np.max(np.abs(np.diag(H))))
        t = 1.0
        gnorm = np.max(np.abs(g))
        while t > 1e-12:
            xn = x + t * step
            if _inside(xn, lo, hi, s_lo, s_hi):
                fn = kernel.loglik(*xn)
                if np.isfinite(fn):
                    gn = kernel.grad(*xn)
                    if fn >= f - 1e-13 * (1.0 + abs(f)) or np.max(np.abs(gn)) < gnorm:
                        break
            t *= 0.5
        else:
            return x, f, g, False, it
        x, f, g = xn, fn, gn
    return x, f, g, bool(np.max(np.abs(g)) <= opts.gtol), opts.max_newton


def maximize(kernel: _Kernel, starts, opts: SolverOptions, s_ref: float):
    """Maximize ``kernel.loglik``; return all candidates, best first.

    ``s_ref`` anchors the admissible ``log sigma`` window
    ``s_ref +/- opts.log_sigma_span``.
    """
    lo, hi = opts.xi_bounds
    s_lo = max(np.log(opts.floor), s_ref - opts.log_sigma_span)
    s_hi = s_ref + opts.log_sigma_span

    def objective(x):
        if not _inside(x, lo, hi, s_lo, s_hi):
            return np.inf
        return -kernel.loglik(*x)

    candidates = []
    for start in starts:
        x0 = np.array(start, dtype=float)
        if not np.isfinite(objective(x0)):
            continue
        res = optimize.minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "xatol": opts.nm_xatol,
                "fatol": opts.nm_fatol,
                "maxiter": opts.nm_maxiter,
                "initial_simplex": np.array([x0, x0 + [0.1, 0.0], x0 + [0.0, 0.2]]),
            },
        )
        x, f, g, ok, its = _polish(kernel, np.asarray(res.x, dtype=float), opts, s_lo, s_hi)
        on_boundary = (
            x[0] - lo < opts.boundary_tol
            or hi - x[0] < opts.boundary_tol
            or x[1] - s_lo < 1e-6
            or s_hi - x[1] < 1e-6
        )
        candidates.append(
            Candidate(
                xi=float(x[0]),
                log_sigma=float(x[1]),
                loglik=float(f),
                grad=g,
                converged=ok and not on_boundary,
                iterations=int(res.nit) + its,
                on_boundary=bool(on_boundary),
                start=tuple(float(v) for v in x0),
            )
        )
    candidates.sort(key=lambda c: (-c.loglik if np.isfinite(c.loglik) else np.inf))
    return candidates


def moment_start(exc_values: np.ndarray) -> tuple[float, float]:
    """GPD method-of-moments (xi, sigma) from exceedances; used only as a start."""
    mean = float(np.mean(exc_values))
    var = float(np.var(exc_values))
    if not (mean > 0 and var > 0):
        return 0.0, max(mean, 1.0)
    ratio = mean * mean / var
    return 0.5 * (1.0 - ratio), 0.5 * mean * (1.0 + ratio)


def feasible_start(xi: float, sigma: float, e1: float, opts: SolverOptions) -> tuple[float, float]:
    """Clip a start into the shape box and make ``1 + xi*E1/sigma`` positive."""
    lo, hi = opts.xi_bounds
    xi = float(np.clip(xi, lo + 0.02, min(hi, 5.0)))
    sigma = max(float(sigma), 1e-8 * max(e1, 1.0))
    if xi < 0:
        sigma = max(sigma, -xi * e1 * 1.05)
    return xi, float(np.log(sigma))
