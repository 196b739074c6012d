"""Probe series as CSV: one header row, one row per increment, full double precision."""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Mapping, Union

from ..scenarios.postprocess import ProbeSeries
from .atomic import write_atomic

__all__ = ["format_float", "series_table", "write_csv", "read_csv"]


def format_float(v: float) -> str:
    """Shortest text that parses back to the same double."""
    return repr(float(v))


def series_table(series: Mapping[str, ProbeSeries]):
    """``(header, rows)`` over the shared sampling times of ``series``."""
    names = list(series)
    if not names:
        return ["t"], []
    times = list(series[names[0]].times)
    for n in names:
        if list(series[n].times) != times:
            raise ValueError(f"probe {n!r} has {len(series[n].times)} samples at different times than {names[0]!r}")
    rows = [[t] + [series[n].values[i] for n in names] for i, t in enumerate(times)]
    return ["t"] + names, rows


def write_csv(series: Union[Mapping[str, ProbeSeries], tuple], path) -> Path:
    """Write probe series (or a ``(header, rows)`` pair); NaN or infinite values are refused."""
    header, rows = series if isinstance(series, tuple) else series_table(series)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"increment {i}: {len(row)} values for {len(header)} columns")
        for name, v in zip(header, row):
            if not math.isfinite(float(v)):
                raise ValueError(f"increment {i}: {name} is {v!r}; refusing to write non-finite values")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return write_atomic(path, buf.getvalue())


def read_csv(path) -> tuple:
    """Inverse of :func:`write_csv`: ``(header, rows)`` with float values."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, rows


