"""Parent distributions, right truncation and seeded inverse-transform sampling.

Four parent families are supported: the standard Pareto, the standard
exponential, the standard lognormal and the generalized Pareto distribution
(GPD).  A truncated variable ``X = Y | Y < T`` has quantile function
``Q_T(p) = Q_Y(p * F_Y(T))``, which is also how samples are drawn.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._shape import expm1_ratio, log1p_ratio


class InfiniteEndpointError(ValueError):
    """Raised when ``Q_Y(1)`` is requested for a family with an infinite endpoint."""


class Family(str, enum.Enum):
    PARETO = "pareto"
    EXPONENTIAL = "exponential"
    LOGNORMAL = "lognormal"
    GPD = "gpd"


@dataclass(frozen=True)
class ParentModel:
    """An untruncated parent distribution ``Y``.

    ``xi`` and ``sigma`` are only used by the GPD family, whose right tail
    function is ``(1 + xi*y/sigma)**(-1/xi)``.
    """

    family: Family
    xi: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.family is Family.GPD and not self.sigma > 0:
            raise ValueError(f"GPD scale must be positive, got {self.sigma}")

    @classmethod
    def pareto(cls) -> "ParentModel":
        return cls(Family.PARETO)

    @classmethod
    def exponential(cls) -> "ParentModel":
        return cls(Family.EXPONENTIAL)

    @classmethod
    def lognormal(cls) -> "ParentModel":
        return cls(Family.LOGNORMAL)

    @classmethod
    def gpd(cls, xi: float, sigma: float = 1.0) -> "ParentModel":
        return cls(Family.GPD, float(xi), float(sigma))

    @classmethod
    def from_name(cls, name: str) -> "ParentModel":
        """Parse ``pareto``, ``exponential``, ``lognormal`` or ``gpd(xi,sigma)``."""
        text = name.strip().lower().replace(" ", "")
        if text.startswith("gpd"):
            inner = text[3:].strip("()")
            parts = [float(v) for v in inner.split(",") if v]
            if len(parts) == 1:
                parts.append(1.0)
            if len(parts) != 2:
                raise ValueError(f"cannot parse GPD parameters from {name!r}")
            return cls.gpd(*parts)
        return cls(Family(text))

    @property
    def name(self) -> str:
        if self.family is Family.GPD:
            return f"gpd({self.xi:g},{self.sigma:g})"
        return self.family.value

    @property
    def extreme_value_index(self) -> float:
        """The true tail index of the parent (0 for exponential and lognormal)."""
        return {
            Family.PARETO: 1.0,
            Family.EXPONENTIAL: 0.0,
            Family.LOGNORMAL: 0.0,
            Family.GPD: self.xi,
        }[self.family]

    @property
    def upper_endpoint(self) -> float:
        if self.family is Family.GPD and self.xi < 0:
            return -self.sigma / self.xi
        return np.inf

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.family is Family.PARETO:
                out = np.where(y > 1.0, -np.expm1(-np.log(np.maximum(y, 1.0))), 0.0)
            elif self.family is Family.EXPONENTIAL:
                out = np.where(y > 0.0, -np.expm1(-np.maximum(y, 0.0)), 0.0)
            elif self.family is Family.LOGNORMAL:
                out = np.where(y > 0.0, special.ndtr(np.log(np.maximum(y, 1e-300))), 0.0)
            else:
                x = np.clip(y, 0.0, self.upper_endpoint) / self.sigma
                out = -np.expm1(-log1p_ratio(self.xi, x))
                out = np.where(y >= self.upper_endpoint, 1.0, np.where(y > 0.0, out, 0.0))
        return out if np.ndim(out) else float(out)

    def sf(self, y):
        return 1.0 - self.cdf(y)

    def _quantile(self, p):
        # No domain checks; p = 0 maps to the lower endpoint.
        p = np.asarray(p, dtype=float)
        with np.errstate(divide="ignore"):
            neg_log_sf = -np.log1p(-p)
            if self.family is Family.PARETO:
                out = np.exp(neg_log_sf)
            elif self.family is Family.EXPONENTIAL:
                out = neg_log_sf
            elif self.family is Family.LOGNORMAL:
                out = np.exp(special.ndtri(p))
            else:
                out = self.sigma * expm1_ratio(self.xi, neg_log_sf)
                out = np.where(p >= 1.0, self.upper_endpoint, out)
        return out

    def quantile(self, p):
        return parent_quantile(self, p)


@dataclass(frozen=True)
class TruncationSpec:
    """Where the parent is cut off: a probability level ``q_T`` or a point ``T``.

    ``q_T = 1`` means no truncation.
    """

    level: float | None = 1.0
    point: float | None = None

    def __post_init__(self):
        if (self.level is None) == (self.point is None):
            raise ValueError("give exactly one of level or point")
        if self.level is not None and not 0.0 < self.level <= 1.0:
            raise ValueError(f"truncation level must lie in (0, 1], got {self.level}")

    @classmethod
    def at_level(cls, q: float) -> "TruncationSpec":
        return cls(level=float(q))

    @classmethod
    def at_point(cls, t: float) -> "TruncationSpec":
        return cls(level=None, point=float(t))

    @classmethod
    def none(cls) -> "TruncationSpec":
        return cls(level=1.0)

    def prob(self, model: ParentModel) -> float:
        """``F_Y(T)``, the parent probability retained below the truncation point."""
        if self.level is not None:
            return self.level
        lower = float(model._quantile(0.0))
        if not self.point > lower:
            raise ValueError(f"truncation point {self.point} is not above the lower endpoint {lower}")
        return float(model.cdf(self.point))

    def endpoint(self, model: ParentModel) -> float:
        """The truncation point ``T`` (infinite when there is no truncation)."""
        if self.point is not None:
            return min(self.point, model.upper_endpoint)
        if self.level == 1.0:
            return model.upper_endpoint
        return float(model._quantile(self.level))

    def odds(self, model: ParentModel) -> float:
        """``D_T = (1 - F_Y(T)) / F_Y(T)``."""
        q = self.prob(model)
        return (1.0 - q) / q


def _check_probability(p, allow_zero=False):
    p = np.asarray(p, dtype=float)
    low_ok = p >= 0.0 if allow_zero else p > 0.0
    if not np.all(low_ok & (p <= 1.0)):
        raise ValueError(f"probability outside {'[0' if allow_zero else '(0'}, 1]: {p}")
    return p


def parent_quantile(model: ParentModel, p):
    """Quantile ``Q_Y(p)`` of the parent, for ``0 < p <= 1``.

    ``p = 1`` is only allowed when the upper endpoint is finite (GPD with
    negative shape).
    """
    p = _check_probability(p)
    if np.any(p == 1.0) and not np.isfinite(model.upper_endpoint):
        raise InfiniteEndpointError(f"{model.name} has an infinite upper endpoint; Q_Y(1) is undefined")
    out = model._quantile(p)
    return out if np.ndim(out) else float(out)


def truncated_quantile(model: ParentModel, trunc: TruncationSpec, p):
    """Quantile ``Q_T(p) = Q_Y(p * F_Y(T))`` of the truncated variable."""
    p = _check_probability(p)
    return parent_quantile(model, p * trunc.prob(model))


def truncated_cdf(model: ParentModel, trunc: TruncationSpec, x):
    """Distribution function ``F_T(x) = F_Y(x) / F_Y(T)`` for ``x < T``."""
    out = np.minimum(np.asarray(model.cdf(x)) / trunc.prob(model), 1.0)
    return out if np.ndim(out) else float(out)


def make_rng(seed) -> np.random.Generator:
    """Philox (counter-based, 64-bit) generator from an int or a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def sample_truncated(model: ParentModel, trunc: TruncationSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` values of ``X = Y | Y < T`` by inverse transform; sorted ascending.

    Identical seeds give bit-identical output.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    u = make_rng(seed).random(n)
    return np.sort(model._quantile(u * trunc.prob(model)))


def truncated_gpd_rtf(xi: float, kappa: float, x):
    """Right tail function of a GPD with unit scale truncated at ``kappa``.

    ``[(1+xi*x)**(-1/xi) - (1+xi*kappa)**(-1/xi)] / [1 - (1+xi*kappa)**(-1/xi)]``
    on ``0 <= x <= kappa``.
    """
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not 1.0 + xi * kappa > 0:
        raise ValueError(f"1 + xi*kappa must be positive (xi={xi}, kappa={kappa})")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > kappa)):
        raise ValueError(f"x must lie in [0, kappa={kappa}]")
    tail_kappa = np.exp(-log1p_ratio(xi, kappa))
    out = (np.exp(-log1p_ratio(xi, x)) - tail_kappa) / -np.expm1(-log1p_ratio(xi, kappa))
    out = np.clip(out, 0.0, 1.0)
    return out if np.ndim(out) else float(out)
