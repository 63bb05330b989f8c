"""Tick data to an equally spaced log-price grid, and spot-variance curves over it."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ConfigError, DataError, EstimatorConfig, ObservationSeries, SpotVolEstimate
from .estimator import spot_vol
from .preavg import preaverage

__all__ = [
    "NS_PER_SECOND",
    "trading_week",
    "previous_tick_resample",
    "curve_config",
    "CurveRequest",
    "weekly_curve",
    "curve_rows",
]

NS_PER_SECOND = 1_000_000_000


def trading_week(first_open_ns: int, days: int = 5, hours: float = 6.5,
                 day_ns: int = 86_400 * NS_PER_SECOND) -> list[tuple[int, int]]:
    """Sessions of ``hours`` length opening at the same clock time on consecutive days."""
    length = int(round(hours * 3600 * NS_PER_SECOND))
    return [(first_open_ns + d * day_ns, first_open_ns + d * day_ns + length) for d in range(days)]


def previous_tick_resample(
    stamps: Sequence[int],
    prices: Sequence[float],
    interval_ns: int,
    sessions: Sequence[tuple[int, int]],
    log_prices: bool = True,
    horizon: float = 1.0,
) -> ObservationSeries:
    """Last price at or before each interval boundary, sessions joined end to end.

    The first session contributes its opening boundary and every later boundary;
    later sessions contribute the boundaries after their open, so the overnight
    move lands in the first step of the next session. The opening value is the
    last tick at or before the open, or the first tick of the opening interval
    if there is none before it.
    """
    stamps = np.asarray(stamps, dtype=np.int64)
    prices = np.asarray(prices, dtype=float)
    if stamps.size == 0:
        raise DataError("no ticks")
    if stamps.size != prices.size:
        raise DataError("timestamps and prices differ in length")
    if np.any(np.diff(stamps) < 0):
        raise DataError("timestamps must be nondecreasing")
    if np.any(prices <= 0):
        raise DataError("prices must be positive")
    if interval_ns <= 0:
        raise ConfigError("interval", f"must be positive, got {interval_ns}")
    if not sessions:
        raise ConfigError("sessions", "need at least one session")

    bounds = []
    for k, (open_ns, close_ns) in enumerate(sessions):
        span = close_ns - open_ns
        if span <= 0 or span % interval_ns:
            raise ConfigError("sessions", f"session {k} length must be a positive multiple of the interval")
        if k and open_ns < sessions[k - 1][1]:
            raise ConfigError("sessions", "sessions must be ordered and disjoint")
        first = 0 if k == 0 else 1
        bounds.append(open_ns + np.arange(first, span // interval_ns + 1, dtype=np.int64) * interval_ns)
    bounds = np.concatenate(bounds)

    idx = np.searchsorted(stamps, bounds, side="right") - 1
    if idx[0] < 0:
        if stamps[0] > bounds[0] + interval_ns:
            raise DataError("no opening price: no tick at or before the end of the first interval")
        idx[idx < 0] = 0
    values = prices[idx]
    if log_prices:
        values = np.log(values)
    return ObservationSeries(values, horizon)


def curve_config(n: int, d_n: int = 10) -> EstimatorConfig:
    """Real-data defaults: one-sided kernel, ``h = n^(-1/4) (log n)^(-1/6)``, automatic ``u``."""
    p_n = max(2, math.isqrt(n) // 3)
    h = n ** -0.25 * math.log(n) ** (-1.0 / 6.0)
    return EstimatorConfig(p_n=p_n, h=h, d_n=d_n, kernel="left")


@dataclass(frozen=True)
class CurveRequest:
    taus: Sequence[float]
    config: Optional[EstimatorConfig] = None
    log_prices: bool = True
    d_n: int = 10

    def __post_init__(self):
        taus = tuple(float(t) for t in self.taus)
        if not taus:
            raise ConfigError("taus", "need at least one time point")
        object.__setattr__(self, "taus", taus)


def weekly_curve(obs: ObservationSeries, request: CurveRequest) -> list[tuple[float, SpotVolEstimate]]:
    """Spot-variance estimates on the requested time grid, sharing one pre-averaging pass."""
    config = request.config or curve_config(obs.n, request.d_n)
    for tau in request.taus:
        if not 0 <= tau <= obs.horizon:
            raise ConfigError("taus", f"time point {tau} outside [0, {obs.horizon}]")
    pre = preaverage(obs, config.p_n, config.weight)
    return [(tau, spot_vol(obs, tau, config, pre)) for tau in request.taus]


def curve_rows(curve) -> list[dict]:
    return [dict(tau=tau, sigma2_hat=e.sigma2_hat, noise_correction=e.noise_correction,
                 u_used=e.u_used, clamped=e.clamped) for tau, e in curve]
