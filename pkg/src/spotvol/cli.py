"""Command-line entry point: ``python -m spotvol <command>``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional, Sequence

import numpy as np

from .bench import REPORT_COLUMNS, run_cell, write_report
from .config import bench_cells, estimator_config_from, load_config, sim_config_from
from .core import AUTO, ConfigError, DataError, NumericalError, ObservationSeries
from .empirical import (
    NS_PER_SECOND,
    CurveRequest,
    curve_config,
    curve_rows,
    previous_tick_resample,
    trading_week,
    weekly_curve,
)
from .estimator import spot_vol
from .io import read_observations, read_ticks, write_path
from .simulate import simulate_full

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _config(path: Optional[str]) -> dict:
    return load_config(path) if path else {}


def _require_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("seed", "--seed is required for this command")
    return args.seed


def cmd_simulate(args) -> int:
    seed = _require_seed(args)
    sim = sim_config_from(_config(args.config), seed)
    write_path(simulate_full(sim, args.replication), args.out)
    return EXIT_OK


def cmd_estimate(args) -> int:
    obs = read_observations(args.input)
    cfg = _config(args.config)
    est = cfg.setdefault("estimator", {})
    for key in ("p_n", "h", "d_n", "kernel"):
        value = getattr(args, key)
        if value is not None:
            est[key] = value
    if args.u is not None:
        est["u"] = args.u
    if args.auto_u:
        est["u"] = AUTO
    config = estimator_config_from(cfg, obs.n)
    for warning in _warnings(config, obs):
        print(f"warning: {warning}", file=sys.stderr)
    print(json.dumps(spot_vol(obs, args.tau, config).as_dict()))
    return EXIT_OK


def _warnings(config, obs: ObservationSeries):
    from .core import validate_rate_conditions
    return validate_rate_conditions(config, obs.n, "consistency", obs.horizon)


def cmd_bench(args, compare: bool = False) -> int:
    seed = _require_seed(args)
    cells = bench_cells(_config(args.grid))
    reports = []
    for cell in cells:
        rep = run_cell(cell, args.reps, seed, args.parallelism, compare=compare)
        reports.append(rep)
        print(f"{cell.label()}: rb={rep.rb_mean:.5f} sd={rep.sd:.5f} cov95={rep.coverage[95]:.1f}",
              file=sys.stderr)
    if compare:
        _write_compare(reports, args.out)
    else:
        write_report(reports, args.out)
    return EXIT_OK


def _write_compare(reports, path) -> None:
    cell_cols = [c for c in REPORT_COLUMNS if c not in ("rb_mean", "sd", "mse", "mse_rel", "cov90",
                                                      "cov95", "cov99", "sta_mean", "sta_sd", "trb",
                                                      "tsd", "runtime_s")]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cell_cols + ["estimator", "rb_mean", "sd", "mse", "mse_rel"])
        for rep in reports:
            row = rep.row()
            base = [row[c] for c in cell_cols]
            writer.writerow(base + ["LL", rep.rb_mean, rep.sd, rep.mse, rep.mse_rel])
            for name, (rb, sd, mse, mse_rel) in rep.fw.items():
                writer.writerow(base + [name, rb, sd, mse, mse_rel])


def cmd_curve(args) -> int:
    cfg = _config(args.config)
    cv = cfg.get("curve", {})
    interval = int(round(cv.get("interval_s", 1.0) * NS_PER_SECOND))
    stamps, prices = [], []
    for path in args.ticks:
        s, p = read_ticks(path)
        stamps.append(s)
        prices.append(p)
    stamps, prices = np.concatenate(stamps), np.concatenate(prices)
    order = np.argsort(stamps, kind="stable")
    stamps, prices = stamps[order], prices[order]
    first_open = cv.get("first_open_ns", int(stamps[0]))
    sessions = trading_week(first_open, cv.get("days", 5), cv.get("hours", 6.5))
    obs = previous_tick_resample(stamps, prices, interval, sessions, cv.get("log_prices", True))
    d_n = cv.get("d_n", 10)
    config = estimator_config_from(cfg, obs.n) if "estimator" in cfg else curve_config(obs.n, d_n)
    lo = config.h * abs(config.kernel.support[0]) if config.kernel.support[1] <= 0 else 0.0
    taus = np.linspace(lo, obs.horizon, cv.get("points", 100) + 1)[1:]
    curve = weekly_curve(obs, CurveRequest(taus, config))
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["tau", "sigma2_hat", "noise_correction", "u_used", "clamped"])
        writer.writeheader()
        for row in curve_rows(curve):
            writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                             for k, v in row.items()})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spotvol", description="Spot volatility from noisy high-frequency prices.")
    parser.add_argument("--seed", type=int, default=None, help="master seed")
    seed_opt = argparse.ArgumentParser(add_help=False)
    seed_opt.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[seed_opt], help="simulate one path to CSV")
    p.add_argument("--config")
    p.add_argument("--replication", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", parents=[seed_opt], help="estimate the spot variance at one time")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--config")
    p.add_argument("--auto-u", action="store_true")
    p.add_argument("--u", type=float)
    p.add_argument("--p-n", dest="p_n", type=int)
    p.add_argument("--h", help="bandwidth: number, n^-X, or clt")
    p.add_argument("--d-n", dest="d_n", type=int)
    p.add_argument("--kernel")
    p.set_defaults(func=cmd_estimate)

    for name, compare in (("bench", False), ("compare", True)):
        p = sub.add_parser(name, parents=[seed_opt],
                           help="Monte Carlo grid" + (" against the thresholded estimators" if compare else ""))
        p.add_argument("--grid", required=True, help="config file with a [bench] section")
        p.add_argument("--reps", type=int, default=500)
        p.add_argument("--parallelism", type=int, default=1)
        p.add_argument("--out", required=True)
        p.set_defaults(func=lambda a, c=compare: cmd_bench(a, c))

    p = sub.add_parser("curve", parents=[seed_opt], help="spot-variance curve from tick files")
    p.add_argument("--ticks", nargs="+", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
