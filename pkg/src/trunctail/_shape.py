"""Shape-parameter helpers that stay accurate as the extreme value index goes to 0.

Everything of the form ``(1 + xi*x)**(-1/xi)`` or ``((r**xi) - 1)/xi`` is routed
through these two functions so that the exponential (xi = 0) limit is reached
continuously instead of through a hard switch.
"""

import numpy as np

# |xi * x| below this uses the power series; the truncation error is ~z**5.
SERIES_CUTOFF = 1e-4


def log1p_ratio(xi, x):
    """Return ``log(1 + xi*x) / xi``, equal to ``x`` at ``xi = 0``."""
    x = np.asarray(x, dtype=float)
    z = xi * x
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = np.log1p(z) / xi
        series = x * (1.0 - z / 2.0 + z * z / 3.0 - z ** 3 / 4.0 + z ** 4 / 5.0)
    out = np.where(small, series, direct)
    return out if np.ndim(out) else float(out)


def log1p_ratio_dxi(xi, x):
    """Derivative of :func:`log1p_ratio` with respect to ``xi`` at fixed ``x``."""
    x = np.asarray(x, dtype=float)
    z = xi * x
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = (x / (1.0 + z) - np.log1p(z) / xi) / xi
        series = x * x * (-0.5 + 2.0 * z / 3.0 - 0.75 * z * z + 0.8 * z ** 3 - 5.0 * z ** 4 / 6.0)
    out = np.where(small, series, direct)
    return out if np.ndim(out) else float(out)


def expm1_ratio(xi, log_r):
    """Return ``(r**xi - 1) / xi`` given ``log r``; equals ``log r`` at ``xi = 0``."""
    log_r = np.asarray(log_r, dtype=float)
    z = xi * log_r
    small = np.abs(z) < SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = np.expm1(z) / xi
        series = log_r * (1.0 + z / 2.0 + z * z / 6.0 + z ** 3 / 24.0 + z ** 4 / 120.0)
    out = np.where(small, series, direct)
    return out if np.ndim(out) else float(out)
