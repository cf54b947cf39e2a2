"""Goodness-of-fit test of light (or no) truncation against rough truncation.

Under the null the statistic ``T_kn = k (1 + tau E_{1,k})^(-1/xi)`` is
approximately standard exponential, so its P-value is ``exp(-T_kn)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tpot import TailFit

DEFAULT_LEVEL = 0.05
REPORTED_LEVELS = (0.01, 0.05)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    level: float
    reject: bool

    __test__ = False  # keep pytest from collecting this class


def p_value(statistic):
    return np.exp(-np.asarray(statistic, dtype=float))


def truncation_test(fit: TailFit, level: float = DEFAULT_LEVEL) -> TestResult:
    """Reject light truncation at ``level`` when ``T_kn > log(1/level)``."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    t = fit.test_statistic
    return TestResult(statistic=t, p_value=float(np.exp(-t)), level=level, reject=bool(t > -np.log(level)))
