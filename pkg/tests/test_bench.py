import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import fw_loops, ma_autocorr, tri
from spotvol.bench import (
    COVERAGE_QUANTILES,
    REPORT_COLUMNS,
    Cell,
    fw_estimators,
    noise_level,
    psi_ma,
    relative_bias,
    resolve_bandwidth,
    rho_ma,
    run_cell,
    theoretical_trb_tsd,
    with_overrides,
    write_report,
)
from spotvol.core import ConfigError, ObservationSeries, get_kernel


def test_relative_bias_examples():
    assert relative_bias(0.3, 0.25) == pytest.approx(0.2)
    assert relative_bias(0.25, 0.25) == 0
    assert relative_bias(0.0, 0.25) == -1
    with pytest.raises(ConfigError):
        relative_bias(0.1, 0.0)


def test_coverage_quantiles():
    from scipy.stats import norm
    for level, q in COVERAGE_QUANTILES.items():
        assert q == pytest.approx(norm.ppf(0.5 + level / 200), rel=1e-12)


def test_resolve_bandwidth():
    n = 117_000
    assert resolve_bandwidth("n^-0.26", n) == pytest.approx(n ** -0.26)
    assert resolve_bandwidth("clt", n) == pytest.approx(n ** -0.25 * math.log(n) ** (-1 / 6))
    assert resolve_bandwidth(0.1, n) == 0.1
    with pytest.raises(ConfigError):
        resolve_bandwidth("wide", n)


def test_rho_ma_examples():
    assert rho_ma(0, -0.4, 5) == 1.0
    assert rho_ma(3, 0.0, 10) == 0.0
    assert rho_ma(6, -0.4, 5) == 0.0
    for k in range(1, 6):
        assert rho_ma(k, -0.4, 5) == pytest.approx(ma_autocorr(-0.4, 5, k), rel=1e-12)
        assert rho_ma(-k, -0.4, 5) == rho_ma(k, -0.4, 5)


def test_psi_ma_table_entry():
    assert abs(psi_ma(114, -0.4, 5) - 0.13217) < 0.01


def test_noise_level():
    assert noise_level(0.05, 0.0, 7) == pytest.approx(0.0025)
    a = [1.0, -0.4, -0.4 * 0.6 / 2]
    assert noise_level(0.1, -0.4, 2) == pytest.approx(0.01 * sum(x * x for x in a))


def test_trb_tsd_monotone():
    base = Cell()
    _, tsd_lo = theoretical_trb_tsd(base)
    _, tsd_hi = theoretical_trb_tsd(with_overrides(base, sigma_eps=0.05))
    assert tsd_hi > tsd_lo
    trbs = [theoretical_trb_tsd(with_overrides(base, beta1=b))[0] for b in (1.2, 1.5, 1.8)]
    assert trbs[0] < trbs[1] < trbs[2]
    tsds = [theoretical_trb_tsd(with_overrides(base, kernel=k))[1] for k in ("K1", "K2", "K3", "K4")]
    assert all(a <= b for a, b in zip(tsds, tsds[1:]))


def test_fw_matches_loops():
    rng = np.random.default_rng(0)
    n, p, h, tau = 400, 6, 0.2, 0.4
    y = np.cumsum(0.5 * math.sqrt(1 / n) * rng.standard_normal(n + 1)) + 0.002 * rng.standard_normal(n + 1)
    y[200:] += 0.3
    kernel = get_kernel("K1")
    for threshold in (0.05, 0.5, None):
        got = fw_estimators(ObservationSeries(y), tau, p, h, "triangle", kernel, threshold)
        if threshold is None:
            dy = np.diff(y)
            bpv = 0.5 * math.pi * np.sum(np.abs(dy[:-1]) * np.abs(dy[1:]))
            threshold = 1.8 * math.sqrt(bpv) * (p / n) ** 0.47
        want = fw_loops(y, tau, p, h, kernel, 1 / n, threshold, tri)
        np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_fw_no_truncation_agree(seed):
    y = np.cumsum(np.random.default_rng(seed).standard_normal(301)) * 0.03
    fw1, fw2 = fw_estimators(ObservationSeries(y), 0.5, 5, 0.2, threshold=math.inf)
    assert fw1 == fw2


def test_fw_consistency_without_jumps_or_noise():
    rng = np.random.default_rng(1)
    n = 23_400
    p = math.isqrt(n) // 3
    vals = []
    for _ in range(100):
        y = np.concatenate([[0.0], np.cumsum(0.5 * math.sqrt(1 / n) * rng.standard_normal(n))])
        vals.append(fw_estimators(ObservationSeries(y), 0.5, p, n ** -0.26, kernel="K1"))
    fw1, fw2 = np.mean(vals, axis=0)
    assert abs(fw1 / 0.25 - 1) < 0.10 and abs(fw2 / 0.25 - 1) < 0.10


def test_fw_empty_window():
    with pytest.raises(ConfigError):
        fw_estimators(ObservationSeries(np.zeros(101)), 0.505, 5, 1e-4, kernel="K1")


SMALL = Cell(n=5000, h=0.2)


def test_run_cell_single_rep_degenerate():
    rep = run_cell(SMALL, 1, seed=3)
    assert rep.degenerate and rep.sd == 0.0
    assert all(0 <= v <= 100 for v in rep.coverage.values())


def test_run_cell_parallelism_invariant():
    a = run_cell(SMALL, 7, seed=4, compare=True, keep_samples=True)
    b = run_cell(SMALL, 7, seed=4, parallelism=2, compare=True, keep_samples=True)
    assert a.row() | {"runtime_s": 0} == b.row() | {"runtime_s": 0}
    assert np.array_equal(a.studentized_samples, b.studentized_samples)
    assert a.fw == b.fw


def test_run_cell_validation():
    with pytest.raises(ConfigError):
        run_cell(SMALL, 0, seed=1)
    with pytest.raises(ConfigError):
        run_cell(SMALL, 2, seed=1, parallelism=0)


def test_monte_carlo_drift_within_se():
    cell = Cell(n=23_400)
    small = run_cell(cell, 100, seed=5)
    large = run_cell(cell, 500, seed=5)
    # the first 100 replications are shared, so the difference has sd * sqrt(1/100 - 1/500)
    assert abs(large.rb_mean - small.rb_mean) <= 3 * large.sd * math.sqrt(1 / 100 - 1 / 500)


def test_write_report(tmp_path):
    rep = run_cell(SMALL, 3, seed=6)
    path = tmp_path / "r.csv"
    write_report([rep, rep], path)
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert len(rows) == 2
    assert float(rows[0]["rb_mean"]) == rep.rb_mean
    assert float(rows[0]["cov95"]) == rep.coverage[95]
    for col in ("trb", "tsd", "mse", "sta_mean"):
        float(rows[0][col])
