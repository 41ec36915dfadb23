"""Result tables, run manifests and comparison with a Tracy-Widom reference table.

CSV: header row, comma separated, ``.`` decimal point, LF line endings.
JSONL: one UTF-8 JSON object per line. Floats are written with 17
significant digits in both formats, which round-trips float64 exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__

CONVENTIONS = {
    "bracket": "[x] is the integer part floor(x)",
    "origin": "the weight of the start corner of every rectangle is omitted",
    "geometric_pmf": "P(X = k) = (1 - q) q^k, k = 0, 1, 2, ...",
    "exponential_rounding": "-ln(u) rounded to the nearest multiple of 2^-32",
}


class FormatError(ValueError):
    pass


def format_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    if v is None:
        return ""
    return str(v)


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return json.dumps(v, ensure_ascii=False)


def _columns(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]]) -> List[str]:
    if columns is not None:
        return list(columns)
    if not rows:
        return []
    cols = list(rows[0].keys())
    for r in rows[1:]:
        if list(r.keys()) != cols:
            raise FormatError("rows do not share a schema")
    return cols


def write_results(rows: Sequence[Mapping[str, Any]], fmt: str, path,
                  columns: Optional[Sequence[str]] = None) -> Path:
    """Write ``rows`` (dicts sharing one schema) as ``csv`` or ``jsonl``."""
    rows = list(rows)
    cols = _columns(rows, columns)
    path = Path(path)
    fmt = fmt.lower()
    if fmt == "csv":
        lines = [",".join(cols)] if cols else []
        for r in rows:
            lines.append(",".join(_cell(r[c]) for c in cols))
        text = "".join(line + "\n" for line in lines)
    elif fmt == "jsonl":
        text = "".join(
            "{" + ", ".join(f"{json.dumps(c)}: {_json_value(r[c])}" for c in cols) + "}\n"
            for r in rows)
    else:
        raise FormatError(f"unknown format {fmt!r}; expected csv or jsonl")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def _parse(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_results(path, fmt: Optional[str] = None) -> List[Dict[str, Any]]:
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "csv":
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                return []
            return [dict(zip(header, map(_parse, rec))) for rec in reader]
        if fmt == "jsonl":
            return [json.loads(line) for line in fh if line.strip()]
    raise FormatError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# manifests


@dataclass
class RunManifest:
    command: List[str]
    base_seed: int
    gamma: float
    distribution: str
    budgets: Dict[str, Any]
    outputs: List[str] = field(default_factory=list)
    scaling: Optional[Dict[str, Any]] = None
    notes: List[str] = field(default_factory=list)
    tool_version: str = __version__
    conventions: Dict[str, str] = field(default_factory=lambda: dict(CONVENTIONS))
    timestamp: str = field(
        default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def write(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(**data)


def manifest_path(output) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


# --------------------------------------------------------------------------
# Tracy-Widom reference tables


@dataclass(frozen=True)
class ReferenceTable:
    x: np.ndarray
    F2: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        f = np.asarray(self.F2, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.shape[0] < 2:
            raise FormatError("a reference table needs at least two (x, F2) rows")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(f)):
            raise FormatError("reference table contains non-finite values")
        if np.any(np.diff(x) <= 0):
            raise FormatError("reference table x column must be strictly increasing")
        if np.any(np.diff(f) < 0):
            raise FormatError("reference table F2 column must be nondecreasing")
        if f[0] < 0 or f[-1] > 1:
            raise FormatError("reference table F2 values must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "F2", f)

    def cdf(self, values):
        """Linear interpolation; 0 below and 1 above the table."""
        values = np.asarray(values, dtype=float)
        out = np.interp(values, self.x, self.F2)
        return np.where(values < self.x[0], 0.0, np.where(values > self.x[-1], 1.0, out))

    def quantile(self, p):
        """Inverse of the interpolated CDF on its increasing part."""
        p = np.asarray(p, dtype=float)
        keep = np.concatenate([[True], np.diff(self.F2) > 0])
        return np.interp(p, self.F2[keep], self.x[keep])


def load_reference_table(path) -> ReferenceTable:
    """Read a two-column CSV ``x,F2`` (header required)."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["x", "F2"]:
            raise FormatError(f"{path}: expected header 'x,F2', got {','.join(header)!r}")
        xs, fs = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                xs.append(float(rec[0]))
                fs.append(float(rec[1]))
            except (ValueError, IndexError):
                raise FormatError(f"{path}:{lineno}: cannot parse row {rec!r}") from None
    return ReferenceTable(np.array(xs), np.array(fs))


@dataclass
class Comparison:
    ks_statistic: float
    p_value: float
    samples: int
    below_table: int
    above_table: int
    rows: List[Dict[str, float]]

    @property
    def covered(self) -> bool:
        return self.below_table == 0 and self.above_table == 0


def compare_to_reference(samples, table: ReferenceTable, grid_points: int = 200) -> Comparison:
    """KS distance between the empirical CDF of ``samples`` and the interpolated table."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] < 100:
        raise ValueError("compare_to_reference needs at least 100 samples")
    below = int(np.count_nonzero(samples < table.x[0]))
    above = int(np.count_nonzero(samples > table.x[-1]))
    if below or above:
        warnings.warn(f"{below} samples below and {above} above the reference table range; "
                      "the reference CDF is clamped to 0/1 there", RuntimeWarning, stacklevel=2)
    res = stats.kstest(samples, table.cdf)
    xs = np.linspace(min(table.x[0], samples.min()), max(table.x[-1], samples.max()), grid_points)
    ordered = np.sort(samples)
    emp = np.searchsorted(ordered, xs, side="right") / ordered.shape[0]
    ref = table.cdf(xs)
    rows = [{"x": float(a), "empirical": float(e), "reference": float(r)}
            for a, e, r in zip(xs, emp, ref)]
    return Comparison(float(res.statistic), float(res.pvalue), int(samples.shape[0]), below,
                      above, rows)

