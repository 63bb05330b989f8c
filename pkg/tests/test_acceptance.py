"""The ten acceptance criteria, each at its stated tolerance.

Every test appends one ``CRITERION k: PASS|FAIL ...`` line that the terminal
summary prints in order, then asserts. Monte Carlo criteria use fixed seeds.
"""

import math
import time

import numpy as np
import pytest

import conftest
from oracles import ma_autocorr
from spotvol.bench import Cell, run_cell, with_overrides
from spotvol.core import EstimatorConfig, ObservationSeries, get_kernel, triangle_weight
from spotvol.estimator import (
    BiasModel,
    bias_term,
    debias_iterative,
    debias_ratio,
    noise_var_hat,
    noise_var_hat_literal,
    spot_vol,
)
from spotvol.io import read_observations, write_path
from spotvol.preavg import psi
from spotvol.simulate import SimConfig, sample_stable, simulate_full
from spotvol.special import special_C, special_D
from oracles import quadpack_C, quadpack_D

SEED = 20240611
N = 117_000

pytestmark = pytest.mark.slow


def record(k: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_LINES.append(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


PSI_TABLE = {(-0.4, 5): 0.13217, (-0.4, 10): 0.10384, (-0.4, 15): 0.09652,
             (-0.2, 5): 0.38213, (-0.2, 10): 0.31965, (-0.2, 15): 0.29614,
             (0.0, 5): 0.99130, (0.0, 10): 0.99130, (0.0, 15): 0.99130}


def test_criterion_1_psi_table():
    start = time.perf_counter()
    errs = {key: abs(psi(114, triangle_weight, lambda k, s=key[0], d=key[1]: ma_autocorr(s, d, k), key[1]) - v)
            for key, v in PSI_TABLE.items()}
    elapsed = time.perf_counter() - start
    worst = max(errs, key=errs.get)
    ok = max(errs.values()) < 0.01 and elapsed < 1.0
    record(1, ok, f"max |psi - table| = {errs[worst]:.5f} at (s, d_n) = {worst}, {elapsed:.3f} s")


def test_criterion_2_table1_cell():
    rep = run_cell(Cell(), 500, SEED)
    ok = abs(rep.rb_mean - 0.05241) <= 0.03 and abs(rep.sd / 0.20207 - 1) <= 0.15
    record(2, ok, f"rb_mean = {rep.rb_mean:.5f} (0.05241 +- 0.03), sd = {rep.sd:.5f} "
                  f"(0.20207 +- 15%), {rep.runtime:.0f} s")


def test_criterion_3_monotonicity():
    base = Cell()
    reps = 200
    sd_k = [run_cell(with_overrides(base, kernel=k), reps, SEED).sd for k in ("K1", "K2", "K3", "K4")]
    drops = [a - b for a, b in zip(sd_k, sd_k[1:]) if a > b]
    kernels_ok = len(drops) <= 1 and all(d <= 0.01 for d in drops)
    sd_e = [run_cell(with_overrides(base, sigma_eps=e), reps, SEED).sd for e in (0.01, 0.03, 0.05)]
    noise_ok = sd_e[0] < sd_e[1] < sd_e[2]
    rb_b = [run_cell(with_overrides(base, beta1=b), reps, SEED).rb_mean for b in (1.2, 1.5, 1.8)]
    beta_ok = rb_b[0] < rb_b[1] < rb_b[2]
    fmt = lambda xs: "/".join(f"{x:.4f}" for x in xs)
    record(3, kernels_ok and noise_ok and beta_ok,
           f"sd K1..K4 = {fmt(sd_k)}; sd by sigma_eps = {fmt(sd_e)}; rb by beta1 = {fmt(rb_b)}")


def test_criterion_4_coverage():
    cell = Cell(sigma_eps=0.05, beta1=1.8, h="clt")
    rep = run_cell(cell, 500, SEED)
    ok = abs(rep.sta_mean) < 0.25 and 90 <= rep.coverage[95] <= 98
    record(4, ok, f"Sta-2 mean = {rep.sta_mean:.3f}, sd = {rep.sta_sd:.3f}, coverage 90/95/99 = "
                  f"{rep.coverage[90]:.1f}/{rep.coverage[95]:.1f}/{rep.coverage[99]:.1f}")


def test_criterion_5_comparison():
    parts, ok = [], True
    for beta in (1.2, 1.8):
        cell = Cell(n=23_400, kernel="K1", h="n^-0.26", sigma_eps=0.01, beta1=beta)
        rep = run_cell(cell, 200, SEED, compare=True)
        fw1, fw2 = rep.fw["FW1"], rep.fw["FW2"]
        ok &= rep.mse < fw1[2] and rep.mse < fw2[2]
        parts.append(f"beta1={beta}: MSE LL/FW1/FW2 = {rep.mse:.4g}/{fw1[2]:.4g}/{fw2[2]:.4g} "
                     f"(relative {rep.mse_rel:.3f}/{fw1[3]:.3f}/{fw2[3]:.3f})")
    record(5, ok, "; ".join(parts))


def test_criterion_6_stable_law():
    start = time.perf_counter()
    n = 1_000_000
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for beta in (1.0, 1.2, 1.5, 1.8, 2.0):
        x = sample_stable(beta, rng, n)
        for u in (0.5, 1.0, 2.0):
            worst = max(worst, abs(np.cos(u * x).mean() - math.exp(-abs(u) ** beta)))
    elapsed = time.perf_counter() - start
    bound = 5 / math.sqrt(n)
    record(6, worst < bound and elapsed < 10,
           f"max CF deviation = {worst:.2e} (bound {bound:.0e}), {elapsed:.1f} s")


def test_criterion_7_debias_algebra():
    u, lam = 0.9, 2.0
    corrected, _ = debias_ratio(lambda x: 0.25 + 0.1 * x ** (1.5 - 2), u, lam)
    ratio_err = abs(corrected - 0.25)

    p_n, h = 114, N ** -0.26
    scale = u**2 * math.sqrt(p_n / N / h)
    xi = 1e-6
    two = lambda x: 0.25 + 0.1 * x ** (1.75 - 2) + 0.05 * x ** (1.5 - 2)
    iter_err = abs(debias_iterative(two, u, lam, xi, 2, scale) - 0.25)
    iter_tol = 10 * scale * xi + 1e-8

    model = BiasModel.build([(1.5, 0.2, 0.2)], p_n, 1 / N, triangle_weight)
    lin_err = max(abs(bias_term(model, l * u) / (l ** (1.5 - 2) * bias_term(model, u)) - 1)
                  for l in (1.5, 2.0, 3.0))

    ok = ratio_err < 1e-10 and iter_err < iter_tol and lin_err < 1e-12
    record(7, ok, f"ratio |err| = {ratio_err:.1e} (< 1e-10); iterative K=2 |err| = {iter_err:.2e} "
                  f"(< {iter_tol:.2e}); linearity rel err = {lin_err:.1e} (< 1e-12)")


def test_criterion_8_special_functions():
    dirichlet = abs(special_C(1.0) - math.pi / 2)
    dual = max(max(abs(special_C(b) - quadpack_C(b)), abs(special_D(b) - quadpack_D(b)))
               for b in (1.1, 1.5, 1.9))
    record(8, dirichlet < 1e-10 and dual < 1e-6,
           f"|C(1) - pi/2| = {dirichlet:.1e}; max dual-quadrature gap = {dual:.1e}")


def test_criterion_9_equivalence_and_determinism(tmp_path):
    rng = np.random.default_rng(SEED)
    kern = get_kernel("K1")
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(200, 800))
        y = np.cumsum(rng.standard_normal(n + 1)) * 0.01 + rng.standard_normal(n + 1) * 0.02
        d_n, p_n = int(rng.integers(0, 8)), int(rng.integers(5, 30))
        tau, h = rng.uniform(0, 1), rng.uniform(0.05, 0.5)
        obs = ObservationSeries(y)
        a = noise_var_hat(obs, tau, h, d_n, triangle_weight, p_n, kern)
        b = noise_var_hat_literal(obs, tau, h, d_n, triangle_weight, p_n, kern)
        worst = max(worst, abs(a - b) / max(abs(b), 1e-300))

    cell = Cell(n=23_400)
    r1 = run_cell(cell, 8, SEED, parallelism=1, keep_samples=True)
    r2 = run_cell(cell, 8, SEED, parallelism=2, keep_samples=True)
    same_run = (np.array_equal(r1.relative_errors, r2.relative_errors)
                and np.array_equal(r1.studentized_samples, r2.studentized_samples)
                and r1.row() | {"runtime_s": 0} == r2.row() | {"runtime_s": 0})

    sim = simulate_full(SimConfig(n=N, seed=SEED))
    path = tmp_path / "path.csv"
    write_path(sim, path)
    cfg = EstimatorConfig(p_n=114, h=N ** -0.26)
    direct = spot_vol(sim.observations(), 0.5, cfg)
    via_file = spot_vol(read_observations(path), 0.5, cfg)
    same_trip = direct == via_file

    record(9, worst <= 1e-12 and same_run and same_trip,
           f"grouped vs literal max rel gap = {worst:.1e}; parallel run identical = {same_run}; "
           f"CSV round trip identical = {same_trip}")


def test_criterion_10_consistency():
    cell = Cell(gamma1=0.0, gamma2=0.0, poisson_intensity=0.0, sigma_eps=0.0)
    rep = run_cell(cell, 200, SEED, keep_samples=True)
    mae = float(np.mean(np.abs(rep.relative_errors)))
    record(10, mae < 0.10, f"mean |relative error| = {mae:.4f} (< 0.10), rb_mean = {rep.rb_mean:.4f}, "
                           f"sd = {rep.sd:.4f}")
