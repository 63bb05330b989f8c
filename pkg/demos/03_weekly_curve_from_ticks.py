"""
A weekly volatility curve from tick data
========================================

Build five synthetic 6.5-hour sessions of irregular trades, write them in the
``timestamp_ns,price`` format the CLI reads, resample to one-second prices with
the previous-tick rule, and estimate the spot variance curve with the one-sided
kernel (only past data enters each estimate).

Run with ``python3 demos/03_weekly_curve_from_ticks.py``. The same curve comes
out of ``spotvol curve --ticks <files> --out curve.csv``.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from spotvol.empirical import NS_PER_SECOND, CurveRequest, previous_tick_resample, trading_week, weekly_curve
from spotvol.io import read_ticks, write_ticks

rng = np.random.default_rng(5)
sessions = trading_week(first_open_ns=0)
seconds = 6.5 * 3600

# %%
# Trades arrive at about one per second. The intraday volatility follows a
# U shape (high at the open and close), and each trade price carries a small
# rounding-like noise. Each session opens with an overnight gap.
out = Path(tempfile.mkdtemp())
files = []
level = 4.0
for day, (open_ns, close_ns) in enumerate(sessions):
    stamps = np.sort(rng.integers(open_ns, close_ns, size=int(seconds)))
    stamps[0] = open_ns
    frac = (stamps - open_ns) / (close_ns - open_ns)
    vol = 0.5 * (1 + 2 * (frac - 0.5) ** 2)
    step = vol * np.sqrt(np.diff(stamps, prepend=open_ns) / NS_PER_SECOND / (5 * seconds))
    level += 0.005 * rng.standard_normal()
    log_price = level + np.cumsum(step * rng.standard_normal(stamps.size))
    level = log_price[-1]
    prices = np.exp(log_price + 2e-4 * rng.standard_normal(stamps.size))
    path = out / f"day{day}.csv"
    write_ticks(stamps, prices, path)
    files.append(path)
print(f"wrote {len(files)} tick files to {out}")

# %%
stamps, prices = zip(*(read_ticks(f) for f in files))
obs = previous_tick_resample(np.concatenate(stamps), np.concatenate(prices), NS_PER_SECOND, sessions)
print(f"{obs.n} one-second returns over the week")

# %%
# Default real-data settings: left kernel, h = n^-1/4 (log n)^-1/6, d_n = 10.
# Sessions are joined end to end, so each overnight gap is a jump in the first
# second of the session. The characteristic-function part shrugs it off, but
# the noise estimate squares it, so windows just after an open can come out low.
taus = np.linspace(0.05, 1.0, 20)
curve = weekly_curve(obs, CurveRequest(taus))
for tau, est in curve:
    day = min(int(tau * 5), 4)
    frac = tau * 5 - day
    truth = (0.5 * (1 + 2 * (frac - 0.5) ** 2)) ** 2
    print(f"tau {tau:5.3f}  day {day + 1}  estimate {est.sigma2_hat:7.4f}  diffusion level {truth:6.4f}")
