"""Data ingestion, QQ-plot data, magnitude/energy conversion and serialization.

Floats are written in their shortest round-trip form (at most 17 significant
digits), so CSV and JSON output of the same result parse back to the same
floats.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import tpot


class DataError(ValueError):
    """Input data that cannot be used (missing file or column, bad cells)."""


@dataclass(frozen=True)
class Dataset:
    values: np.ndarray = field(repr=False)
    label: str = ""
    unit: str | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise DataError("dataset is empty")
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise DataError(f"non-finite values at positions {bad[:10].tolist()}")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def sorted(self) -> np.ndarray:
        return np.sort(self.values)


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def load_csv(path, column=None, delimiter: str = ",", label: str | None = None, unit: str | None = None) -> Dataset:
    """Read one numeric column of a delimited text file.

    ``column`` is a header name or a 0-based index; by default the first
    column whose first data cell is numeric.  A first row is taken as a
    header when any of its cells is not a number.  Blank lines are skipped.
    Errors name the 1-based line of the offending cell.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh, delimiter=delimiter), 1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path} contains no data")

    header = None
    if any(_parse_float(c) is None for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"{path} has a header but no data rows")

    if column is None:
        first = rows[0][1]
        numeric = [j for j, c in enumerate(first) if _parse_float(c) is not None]
        if not numeric:
            raise DataError(f"line {rows[0][0]}: no numeric column found")
        idx = numeric[0]
    elif isinstance(column, int) or (isinstance(column, str) and column.isdigit() and (header is None or column not in header)):
        idx = int(column)
    else:
        if header is None or column not in header:
            raise DataError(f"column {column!r} not found (header: {header})")
        idx = header.index(column)

    values = []
    for lineno, row in rows:
        if idx >= len(row):
            raise DataError(f"line {lineno}: column {idx} missing")
        v = _parse_float(row[idx])
        if v is None:
            raise DataError(f"line {lineno}: non-numeric value {row[idx]!r}")
        if not math.isfinite(v):
            raise DataError(f"line {lineno}: non-finite value {row[idx]!r}")
        values.append(v)

    if label is None:
        label = header[idx] if header else path.stem
    return Dataset(np.array(values), label=label, unit=unit)


class QQKind(str, enum.Enum):
    EXPONENTIAL = "exponential"
    PARETO = "pareto"


@dataclass(frozen=True)
class QQPlotData:
    """Plot-ready QQ points; ``model`` holds the fitted overlay when requested."""

    kind: QQKind
    points: np.ndarray
    model: np.ndarray | None = None
    k: int | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "points": self.points.tolist(),
            "model": None if self.model is None else self.model.tolist(),
        }


def qq_data(data, kind="exponential", fit: tpot.TailFit | None = None) -> QQPlotData:
    """Exponential QQ points ``(x_{n-j+1,n}, log(j/n))`` or their log-log version.

    With ``fit`` the model curve ``(Q_T(1-j/n), log(j/n))``, ``j = 1..k``, is
    added (x on the log scale for the Pareto kind).
    """
    kind = QQKind(kind)
    x = np.sort(np.asarray(data.values if isinstance(data, Dataset) else data, dtype=float))[::-1]
    n = x.size
    if n == 0:
        raise DataError("no data for a QQ plot")
    y = np.log(np.arange(1, n + 1) / n)
    if kind is QQKind.PARETO:
        if np.any(x <= 0):
            raise DataError("a Pareto (log-log) QQ plot needs positive data")
        x = np.log(x)
    model = None
    k = None
    if fit is not None:
        k = fit.k
        j = np.arange(1, k + 1)
        q = np.asarray(tpot.quantile_truncated(fit, j / fit.n))
        if kind is QQKind.PARETO:
            with np.errstate(invalid="ignore", divide="ignore"):
                q = np.log(q)
        model = np.column_stack([q, np.log(j / fit.n)])
    return QQPlotData(kind, np.column_stack([x, y]), model, k)


def energy_to_magnitude(energy):
    """``M = log10(E/2)/1.5 + 1`` with ``E`` in MJ."""
    e = np.asarray(energy, dtype=float)
    if np.any(e <= 0):
        raise DataError("energy must be positive")
    out = np.log10(e / 2.0) / 1.5 + 1.0
    return out if np.ndim(out) else float(out)


def magnitude_to_energy(magnitude):
    """``E = 2 * 10**(1.5 (M - 1))`` MJ."""
    out = 2.0 * np.power(10.0, 1.5 * (np.asarray(magnitude, dtype=float) - 1.0))
    return out if np.ndim(out) else float(out)


def magnitude_energy(value, to: str):
    """Convert towards ``to`` = ``"energy"`` or ``"magnitude"``."""
    if to == "energy":
        return magnitude_to_energy(value)
    if to == "magnitude":
        return energy_to_magnitude(value)
    raise ValueError(f"unknown direction {to!r}")


# ---- serialization -------------------------------------------------------


def format_number(v) -> str:
    """Text form used in CSV output; ``nan``/``inf`` spelled as Python does."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def _numpy_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def dumps(obj) -> str:
    """JSON text with round-trip floats (NaN/Infinity allowed); numpy values are unwrapped."""
    return json.dumps(obj, default=_numpy_default)


def loads(text: str):
    return json.loads(text)


def columns_of(rows) -> list[str]:
    """Union of the row keys, in order of first appearance."""
    cols = {}
    for r in rows:
        for key in r:
            cols.setdefault(key, None)
    return list(cols)


def write_csv(rows, fh, columns=None) -> None:
    columns = columns or columns_of(rows)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([format_number(r.get(c, math.nan)) for c in columns])


def read_csv_rows(fh) -> list[dict]:
    """Parse a table written by :func:`write_csv`; numeric cells become floats."""
    out = []
    for r in csv.DictReader(fh):
        row = {}
        for key, text in r.items():
            if text in ("true", "false"):
                row[key] = text == "true"
            else:
                v = _parse_float(text)
                row[key] = text if v is None else v
        out.append(row)
    return out


def fit_record(fit: tpot.TailFit) -> dict:
    """Flat record of a truncated fit (no exceedance data)."""
    return {
        "k": fit.k,
        "n": fit.n,
        "threshold": fit.threshold,
        "xi": fit.xi,
        "sigma": fit.sigma,
        "tau": fit.tau,
        "loglik": fit.loglik,
        "converged": bool(fit.converged),
        "iterations": int(fit.iterations),
        "on_boundary": bool(fit.on_boundary),
    }
