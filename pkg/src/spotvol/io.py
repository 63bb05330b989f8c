"""CSV readers and writers for observations, simulated paths and tick files.

Floats are written with 17 significant digits so a write/read cycle returns the
same doubles.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Union

import numpy as np

from .core import DataError, ObservationSeries
from .simulate import SimPath

__all__ = [
    "grid_times",
    "write_observations",
    "read_observations",
    "write_path",
    "read_ticks",
    "write_ticks",
]

PathLike = Union[str, Path]
_FMT = "%.17g"


def grid_times(n: int, horizon: float) -> np.ndarray:
    """``i * horizon / n`` for ``i = 0..n``, with the last point exactly ``horizon``."""
    return np.arange(n + 1) / n * horizon


def write_observations(obs: ObservationSeries, path: PathLike) -> None:
    data = np.column_stack([grid_times(obs.n, obs.horizon), obs.values])
    np.savetxt(path, data, delimiter=",", header="time,value", comments="", fmt=_FMT)


def write_path(sim: SimPath, path: PathLike) -> None:
    data = np.column_stack([grid_times(sim.n, sim.horizon), sim.clean_logprice, sim.noisy, sim.spot_var])
    np.savetxt(path, data, delimiter=",", header="time,clean,noisy,spot_var", comments="", fmt=_FMT)


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: column {column!r} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise DataError(f"line {line}: column {column!r} is not finite: {text!r}")
    return value


def read_observations(path: PathLike, column: str = "value") -> ObservationSeries:
    """Read an equally spaced series.

    Expects a ``time`` column plus ``column``; a simulated-path file is accepted
    too, in which case its ``noisy`` column is used. The horizon is the last time.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if "time" not in header:
            raise DataError(f"line 1: header needs a 'time' column, got {header}")
        if column not in header and column == "value" and "noisy" in header:
            column = "noisy"
        if column not in header:
            raise DataError(f"line 1: header needs a {column!r} column, got {header}")
        ti, vi = header.index("time"), header.index(column)
        times, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            times.append(_parse_float(row[ti], lineno, "time"))
            values.append(_parse_float(row[vi], lineno, column))
    if len(values) < 3:
        raise DataError(f"{path}: need at least 3 observations, got {len(values)}")
    t = np.asarray(times)
    if t[0] != 0.0:
        raise DataError(f"line 2: first time must be 0, got {t[0]!r}")
    n = t.size - 1
    expected = grid_times(n, t[-1])
    bad = np.nonzero(~np.isclose(t, expected, rtol=1e-9, atol=1e-12 * abs(t[-1])))[0]
    if bad.size:
        raise DataError(f"line {bad[0] + 2}: times are not equally spaced")
    return ObservationSeries(np.asarray(values), float(t[-1]))


def read_ticks(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``timestamp_ns,price`` file into integer timestamps and prices."""
    stamps, prices = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header != ["timestamp_ns", "price"]:
            raise DataError(f"line 1: expected header 'timestamp_ns,price', got {','.join(header)}")
        last = None
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise DataError(f"line {lineno}: expected 2 fields, got {len(row)}")
            try:
                stamp = int(row[0])
            except ValueError:
                raise DataError(f"line {lineno}: timestamp is not an integer: {row[0]!r}") from None
            price = _parse_float(row[1], lineno, "price")
            if price <= 0:
                raise DataError(f"line {lineno}: price must be positive, got {price}")
            if last is not None and stamp < last:
                raise DataError(f"line {lineno}: timestamps must be nondecreasing")
            last = stamp
            stamps.append(stamp)
            prices.append(price)
    if not stamps:
        raise DataError(f"{path}: no ticks")
    return np.asarray(stamps, dtype=np.int64), np.asarray(prices)


def write_ticks(stamps, prices, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_ns", "price"])
        for s, p in zip(stamps, prices):
            writer.writerow([int(s), _FMT % p])
