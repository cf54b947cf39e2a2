"""Monte Carlo study of the truncation test and the tail estimators.

For each parent family and truncation level, ``replications`` samples of size
``n`` are drawn by inverse transform, every estimator is evaluated on a shared
k grid, and per-k summaries are collected: P-value mean and quartiles, mean
and RMSE of each shape estimate, and the mean and MSE of the ratio of each
quantile estimate to the true ``Q_T(1-p)``.

Replication ``r`` of cell ``(family, level)`` always uses the same random
stream, derived from the base seed, the family name, the level and ``r``.
"""

from __future__ import annotations

import csv
import json
import math
import re
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import baselines, dataio, tpot
from .distributions import ParentModel, TruncationSpec, sample_truncated, truncated_quantile

ESTIMATORS = ("tpot", "trpareto", "mle", "moment")

DEFAULT_FAMILIES = (
    ParentModel.pareto(),
    ParentModel.lognormal(),
    ParentModel.exponential(),
    ParentModel.gpd(-0.2, 1.0),
)


@dataclass(frozen=True)
class StudyConfig:
    """Study layout.  The defaults give the full 1000 x 500 design."""

    families: tuple = DEFAULT_FAMILIES
    levels: tuple = (0.975, 0.99, 1.0)
    replications: int = 1000
    n: int = 500
    k_grid: tuple = tuple(range(20, 500, 20))
    p_targets: tuple = (0.01, 0.005)
    seed: int = 2017
    estimators: tuple = ESTIMATORS
    workers: int = 1

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("need at least 2 replications")
        if not all(0.0 < q <= 1.0 for q in self.levels):
            raise ValueError("truncation levels must lie in (0, 1]")
        if not all(2 <= k <= self.n - 1 for k in self.k_grid):
            raise ValueError(f"every k must satisfy 2 <= k <= n-1 = {self.n - 1}")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ValueError(f"unknown estimators: {sorted(unknown)}")
        object.__setattr__(self, "k_grid", tuple(sorted(int(k) for k in self.k_grid)))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["families"] = [m.name for m in self.families]
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        d = dict(d)
        d["families"] = tuple(ParentModel.from_name(f) for f in d["families"])
        for key in ("levels", "k_grid", "p_targets", "estimators"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


def replication_seed(base_seed: int, model: ParentModel, level: float, rep: int) -> np.random.SeedSequence:
    family_code = zlib.crc32(model.name.encode())
    level_code = int(round(level * 1_000_000))
    return np.random.SeedSequence([int(base_seed), family_code, level_code, int(rep)])


@dataclass(frozen=True)
class Summary:
    count: int
    failures: int
    mean: float
    median: float
    q1: float
    q3: float
    rmse: float = math.nan


def aggregate(values, target: float | None = None) -> Summary:
    """Mean, quartiles and RMSE about ``target`` of the finite entries of ``values``.

    Quartiles use linear interpolation between order statistics (type 7);
    sums use ``math.fsum`` so the result does not depend on input order.
    """
    v = np.asarray(values, dtype=float).ravel()
    finite = v[np.isfinite(v)]
    if finite.size == 0:
        raise ValueError("aggregate needs at least one finite value")
    m = finite.size
    q1, med, q3 = np.percentile(finite, [25, 50, 75], method="linear")
    rmse = math.nan
    if target is not None:
        rmse = math.sqrt(math.fsum((finite - target) ** 2) / m)
    return Summary(
        count=int(m),
        failures=int(v.size - m),
        mean=math.fsum(finite) / m,
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        rmse=rmse,
    )


def _replicate(args):
    model, level, n, k_grid, p_targets, estimators, seed = args
    x = sample_truncated(model, TruncationSpec.at_level(level), n, seed)
    nk = len(k_grid)
    out = {"p_value": np.full(nk, np.nan)}
    for est in estimators:
        out[f"xi.{est}"] = np.full(nk, np.nan)
        for p in p_targets:
            out[f"q.{est}@{p:g}"] = np.full(nk, np.nan)

    previous = None
    for i, k in enumerate(k_grid):
        exc = tpot.exceedances(x, k)
        if "tpot" in estimators:
            try:
                fit = tpot.fit_truncated_mle(exc, start=previous)
            except ValueError:
                fit = None
            if fit is not None and fit.converged:
                previous = (fit.xi, fit.sigma)
                out["p_value"][i] = math.exp(-fit.test_statistic)
                out["xi.tpot"][i] = fit.xi
                odds = tpot.odds_estimator(fit)
                for p in p_targets:
                    out[f"q.tpot@{p:g}"][i] = tpot.quantile_truncated(fit, p, odds)
        for est in estimators:
            if est == "tpot":
                continue
            try:
                if est == "trpareto":
                    b = baselines.trunc_pareto_fit(x, k)
                elif est == "mle":
                    b = baselines.classical_gpd_mle(exc)
                else:
                    b = baselines.moment_estimator(x, k)
            except (ValueError, ZeroDivisionError):
                continue
            if not b.converged:
                continue
            out[f"xi.{est}"][i] = b.xi
            for p in p_targets:
                out[f"q.{est}@{p:g}"][i] = b.quantile(p)
    return out


@dataclass
class StudyResult:
    """Per-cell summaries keyed by ``(family name, level, k)``.

    Each cell maps statistic names such as ``p_value.median``,
    ``xi.tpot.rmse`` or ``ratio.mle@0.01.mse`` to numbers.
    """

    config: StudyConfig
    cells: dict = field(default_factory=dict)

    def cell(self, family, level: float, k: int) -> dict:
        name = family.name if isinstance(family, ParentModel) else ParentModel.from_name(family).name
        return self.cells[(name, float(level), int(k))]

    def records(self) -> list[dict]:
        """Long format: one record per cell and statistic."""
        rows = []
        for (family, level, k), stats in self.cells.items():
            for stat, value in stats.items():
                rows.append({"family": family, "level": level, "k": k, "statistic": stat, "value": value})
        return rows

    def to_json(self) -> str:
        cells = [{"family": f, "level": q, "k": k, "stats": s} for (f, q, k), s in self.cells.items()]
        return dataio.dumps({"config": self.config.to_dict(), "cells": cells})

    @classmethod
    def from_json(cls, text: str) -> "StudyResult":
        d = json.loads(text)
        cells = {(c["family"], float(c["level"]), int(c["k"])): c["stats"] for c in d["cells"]}
        return cls(StudyConfig.from_dict(d["config"]), cells)

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, str)
        fh = open(path_or_file, "w", newline="") if own else path_or_file
        try:
            writer = csv.writer(fh)
            writer.writerow(["family", "level", "k", "statistic", "value"])
            for r in self.records():
                writer.writerow([r["family"], dataio.format_number(r["level"]), r["k"], r["statistic"], dataio.format_number(r["value"])])
        finally:
            if own:
                fh.close()


def _summarize(stacked: dict, k_grid, true_xi: float, true_q: dict, estimators, p_targets) -> dict:
    cells = {}
    for i, k in enumerate(k_grid):
        stats = {}
        col = stacked["p_value"][:, i]
        if np.isfinite(col).any():
            s = aggregate(col)
            stats.update(
                {"p_value.mean": s.mean, "p_value.median": s.median, "p_value.q1": s.q1, "p_value.q3": s.q3}
            )
        stats["p_value.failures"] = int(np.sum(~np.isfinite(col)))
        for est in estimators:
            col = stacked[f"xi.{est}"][:, i]
            stats[f"xi.{est}.failures"] = int(np.sum(~np.isfinite(col)))
            if np.isfinite(col).any():
                s = aggregate(col, true_xi)
                stats[f"xi.{est}.mean"] = s.mean
                stats[f"xi.{est}.rmse"] = s.rmse
            for p in p_targets:
                ratio = stacked[f"q.{est}@{p:g}"][:, i] / true_q[p]
                if np.isfinite(ratio).any():
                    s = aggregate(ratio, 1.0)
                    stats[f"ratio.{est}@{p:g}.mean"] = s.mean
                    stats[f"ratio.{est}@{p:g}.mse"] = s.rmse**2
        cells[k] = stats
    return cells


def run_cell(config: StudyConfig, model: ParentModel, level: float) -> dict:
    """Simulate one (family, level) cell; returns ``{k: stats}``."""
    jobs = [
        (model, level, config.n, config.k_grid, config.p_targets, config.estimators,
         replication_seed(config.seed, model, level, r))
        for r in range(config.replications)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            reps = list(pool.map(_replicate, jobs, chunksize=8))
    else:
        reps = [_replicate(j) for j in jobs]
    stacked = {key: np.vstack([r[key] for r in reps]) for key in reps[0]}
    trunc = TruncationSpec.at_level(level)
    true_q = {p: float(truncated_quantile(model, trunc, 1.0 - p)) for p in config.p_targets}
    return _summarize(stacked, config.k_grid, model.extreme_value_index, true_q, config.estimators, config.p_targets)


def run_study(config: StudyConfig) -> StudyResult:
    """Run every (family, level) cell of ``config``."""
    result = StudyResult(config)
    for model in config.families:
        for level in config.levels:
            for k, stats in run_cell(config, model, level).items():
                result.cells[(model.name, float(level), int(k))] = stats
    return result


def _split_list(text: str) -> list[str]:
    # commas and semicolons separate items, except inside parentheses
    return [t.strip() for t in re.split(r"[;,\s]+(?![^(]*\))", text.strip()) if t.strip()]


def _parse_k(text: str) -> tuple:
    ks = []
    for item in _split_list(text):
        if ":" in item:
            parts = [int(v) for v in item.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            ks.extend(range(start, stop + 1, step))
        else:
            ks.append(int(item))
    return tuple(ks)


def parse_config(text: str) -> StudyConfig:
    """Parse the flat ``key = value`` study configuration format.

    Keys: ``families``, ``levels``, ``replications``, ``n``, ``k``
    (``start:stop:step`` ranges are inclusive), ``p``, ``seed``,
    ``estimators``, ``workers``.  ``#`` starts a comment.
    """
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key == "families":
            kwargs["families"] = tuple(ParentModel.from_name(f) for f in _split_list(value))
        elif key == "levels":
            kwargs["levels"] = tuple(float(v) for v in _split_list(value))
        elif key in ("replications", "n", "seed", "workers"):
            kwargs[key] = int(value)
        elif key in ("k", "k_grid"):
            kwargs["k_grid"] = _parse_k(value)
        elif key in ("p", "p_targets"):
            kwargs["p_targets"] = tuple(float(v) for v in _split_list(value))
        elif key == "estimators":
            kwargs["estimators"] = tuple(_split_list(value))
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    return StudyConfig(**kwargs)


def load_config(path) -> StudyConfig:
    with open(path) as fh:
        return parse_config(fh.read())
