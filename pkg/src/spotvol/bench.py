"""Monte Carlo harness for the simulation study.

A :class:`Cell` fixes one design point (time, kernel, bandwidth, noise, jump
index). :func:`run_cell` simulates independent replications, estimates the spot
variance at ``tau`` and summarises relative bias, spread, squared error and the
coverage of the bias-corrected studentized statistic. The thresholded
pre-averaging estimators used as a benchmark live in :func:`fw_estimators`.
"""

from __future__ import annotations

import csv
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    ConfigError,
    Debias,
    EstimatorConfig,
    JumpSpec,
    KernelSpec,
    NoiseSpec,
    ObservationSeries,
    WeightFunction,
    get_kernel,
    get_weight,
)
from .estimator import BiasModel, bias_term, k2_riemann, spot_vol, studentized
from .preavg import phi, preaverage, psi
from .simulate import SimConfig, ma_coefficients, simulate_full

__all__ = [
    "COVERAGE_QUANTILES",
    "Cell",
    "MonteCarloReport",
    "resolve_bandwidth",
    "relative_bias",
    "rho_ma",
    "psi_ma",
    "noise_level",
    "theoretical_trb_tsd",
    "fw_estimators",
    "run_cell",
    "REPORT_COLUMNS",
    "write_report",
]

# two-sided standard normal quantiles for nominal 90/95/99 percent
COVERAGE_QUANTILES = {90: 1.6448536269514722, 95: 1.959963984540054, 99: 2.5758293035489004}

_POWER_RULE = re.compile(r"^n\^\(?(-?[0-9.]+)\)?$")


def resolve_bandwidth(h: Union[float, str], n: int) -> float:
    """Turn a bandwidth rule into a number.

    Accepts a float, ``"n^-0.26"``-style power rules, or ``"clt"`` for
    ``n^(-1/4) (log n)^(-1/6)``.
    """
    if isinstance(h, str):
        rule = h.replace(" ", "").lower()
        if rule == "clt":
            return n ** -0.25 * math.log(n) ** (-1.0 / 6.0)
        m = _POWER_RULE.match(rule)
        if m is not None:
            return float(n ** float(m.group(1)))
        try:
            h = float(rule)
        except ValueError:
            raise ConfigError("h", f"unknown bandwidth rule {h!r}") from None
    value = float(h)
    if not value > 0:
        raise ConfigError("h", f"must be positive, got {h}")
    return value


@dataclass(frozen=True)
class Cell:
    """One design point of the simulation study.

    Defaults are the base design: two symmetric stable components with scales
    0.15 and 0.05, the second of index 1, compound Poisson jumps at rate 3 and
    i.i.d. noise. ``d_n`` and ``s`` describe the noise and are also the
    estimator's dependence span.
    """

    tau: float = 0.5
    kernel: str = "K1"
    h: Union[float, str] = "n^-0.26"
    sigma_eps: float = 0.01
    beta1: float = 1.2
    d_n: int = 0
    s: float = 0.0
    n: int = 117_000
    gamma1: float = 0.15
    beta2: float = 1.0
    gamma2: float = 0.05
    poisson_intensity: float = 3.0
    debias: str = "none"

    def __post_init__(self):
        get_kernel(self.kernel)
        resolve_bandwidth(self.h, self.n)
        if not 0 <= self.tau <= 1:
            raise ConfigError("tau", f"must lie in [0, 1], got {self.tau}")

    @property
    def bandwidth(self) -> float:
        return resolve_bandwidth(self.h, self.n)

    @property
    def p_n(self) -> int:
        return max(2, math.isqrt(self.n) // 3)

    @property
    def jumps(self) -> JumpSpec:
        comps = [(self.beta1, self.gamma1)]
        if self.beta2 != self.beta1:
            comps.append((self.beta2, self.gamma2))
        return JumpSpec(tuple(comps), poisson_intensity=self.poisson_intensity)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.sigma_eps, self.d_n, self.s)

    def sim_config(self, seed: int) -> SimConfig:
        return SimConfig(n=self.n, jumps=self.jumps, noise=self.noise, seed=seed)

    def estimator_config(self) -> EstimatorConfig:
        return EstimatorConfig(p_n=self.p_n, h=self.bandwidth, d_n=self.d_n,
                               kernel=self.kernel, debias=Debias(self.debias))

    def label(self) -> str:
        return (f"tau={self.tau:g} {self.kernel} h={self.h} sigma_eps={self.sigma_eps:g} "
                f"beta1={self.beta1:g} d_n={self.d_n} s={self.s:g} n={self.n}")


def relative_bias(estimate: float, truth: float) -> float:
    if not truth > 0:
        raise ConfigError("truth", f"must be positive, got {truth}")
    return (estimate - truth) / truth


def rho_ma(k: int, s: float, d_n: int) -> float:
    """Autocorrelation at lag ``k`` of the fractional MA(``d_n``) noise."""
    if not -0.5 < s < 0.5:
        raise ConfigError("s", f"must lie in (-0.5, 0.5), got {s}")
    k = abs(int(k))
    if k == 0:
        return 1.0
    if k > d_n:
        return 0.0
    a = ma_coefficients(s, d_n)
    return float(a[k:] @ a[: d_n + 1 - k] / (a @ a))


def psi_ma(p_n: int, s: float, d_n: int, g: Union[str, WeightFunction] = "triangle") -> float:
    """Noise factor of a pre-averaged increment under the fractional MA noise."""
    return psi(p_n, get_weight(g), lambda k: rho_ma(k, s, d_n), d_n)


def noise_level(sigma_eps: float, s: float, d_n: int) -> float:
    """Noise variance ``sigma_eps^2 (1 + sum a_j^2)``; ``chi`` is not rescaled."""
    a = ma_coefficients(s, d_n)
    return sigma_eps**2 * float(a @ a)


def theoretical_trb_tsd(cell: Cell, config: Optional[EstimatorConfig] = None,
                        sigma2: float = 0.25, u: Optional[float] = None) -> tuple[float, float]:
    """Theoretical relative bias and standard deviation of the uncorrected estimate.

    ``sigma2`` stands in for the spot variance (the stationary mean by default).
    ``u`` defaults to the population version of the automatic rule.
    """
    config = cell.estimator_config() if config is None else config
    n, p_n, h = cell.n, config.p_n, config.h
    delta = 1.0 / n
    g = config.weight
    phi2 = phi(2.0, p_n, g)
    v_n = 1.0 / (phi2 * p_n**2 * delta)
    psi_n = psi_ma(p_n, cell.s, cell.d_n, g)
    total = sigma2 + v_n * psi_n * noise_level(cell.sigma_eps, cell.s, cell.d_n)
    if u is None:
        u = math.log(n) ** config.u_exponent / math.sqrt(total)
    model = BiasModel.from_unit_stable(cell.jumps, p_n, delta, g)
    trb = float(bias_term(model, u)) / sigma2
    k2 = k2_riemann(config.kernel, cell.tau, h, p_n, delta, n)
    tsd = math.sqrt(p_n * delta * math.sqrt(2.0) * total / (h * sigma2) * k2)
    return trb, tsd


def fw_estimators(obs: ObservationSeries, tau: float, p_n: int, h: float,
                  g: Union[str, WeightFunction] = "triangle",
                  kernel: Union[str, KernelSpec] = "K1",
                  threshold: Optional[float] = None) -> tuple[float, float]:
    """Truncated overlapping pre-averaging estimators (indicator on the square, and on the bracket).

    ``threshold=None`` uses ``1.8 sqrt(BPV) (p_n delta_n)^0.47``.
    """
    g, kernel = get_weight(g), get_kernel(kernel)
    n, delta = obs.n, obs.delta_n
    if not 2 <= p_n < n:
        raise ConfigError("p_n", f"must lie in [2, n), got {p_n}")
    m = n - p_n + 1
    grid = g.grid(p_n)
    dy = np.diff(obs.values)

    t = np.arange(1, m + 1) * delta
    kh = kernel((t - tau) / h) / h
    total = kh.sum()
    if total <= 0:
        raise ConfigError("h", f"no pre-averaging windows in bandwidth at tau={tau}")
    k_adj = kh / (delta * total)
    live = np.nonzero(kh)[0]
    lo, hi = live[0], live[-1] + 1

    # Y~_j = sum_{i=1}^{p-1} g_i dY_{i+j-1} and Y^_j = sum_{i=1}^{p} (g_i - g_{i-1})^2 dY_{i+j-1}^2
    seg = dy[lo: hi + p_n - 1]
    y_tilde = np.correlate(seg, grid[1:p_n], mode="valid")[: hi - lo]
    y_hat = np.correlate(seg**2, np.diff(grid) ** 2, mode="valid")[: hi - lo]

    if threshold is None:
        bpv = 0.5 * math.pi * float(np.abs(dy[:-1]) @ np.abs(dy[1:]))
        threshold = 1.8 * math.sqrt(bpv) * (p_n * delta) ** 0.47
    keep = np.abs(y_tilde) <= threshold
    w = k_adj[lo:hi]
    norm = p_n * phi(2.0, p_n, g)
    fw1 = float(w @ (y_tilde**2 * keep - 0.5 * y_hat)) / norm
    fw2 = float(w @ ((y_tilde**2 - 0.5 * y_hat) * keep)) / norm
    return fw1, fw2


@dataclass
class MonteCarloReport:
    """Summary of one cell.

    ``mse`` is the mean of ``(estimate - truth)^2``; ``mse_rel`` the mean squared
    relative error. ``fw`` maps ``"FW1"``/``"FW2"`` to ``(rb_mean, sd, mse, mse_rel)``
    when the comparison estimators were run.
    """

    cell: Cell
    reps: int
    seed: int
    rb_mean: float
    sd: float
    mse: float
    mse_rel: float
    coverage: dict
    sta_mean: float
    sta_sd: float
    trb: float
    tsd: float
    runtime: float
    degenerate: bool = False
    relative_errors: Optional[np.ndarray] = None
    studentized_samples: Optional[np.ndarray] = None
    fw: dict = field(default_factory=dict)

    def row(self) -> dict:
        out = {k: v for k, v in asdict(self.cell).items()}
        out.update(reps=self.reps, seed=self.seed, rb_mean=self.rb_mean, sd=self.sd, mse=self.mse,
                   mse_rel=self.mse_rel, cov90=self.coverage[90], cov95=self.coverage[95],
                   cov99=self.coverage[99], sta_mean=self.sta_mean, sta_sd=self.sta_sd,
                   trb=self.trb, tsd=self.tsd, runtime_s=self.runtime)
        return out


REPORT_COLUMNS = tuple(Cell.__dataclass_fields__) + (
    "reps", "seed", "rb_mean", "sd", "mse", "mse_rel", "cov90", "cov95", "cov99",
    "sta_mean", "sta_sd", "trb", "tsd", "runtime_s")


def write_report(reports: Sequence[MonteCarloReport], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for rep in reports:
            writer.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v)
                             for k, v in rep.row().items()})


def _replicate(cell: Cell, seed: int, replication: int, compare: bool) -> tuple:
    """Truth, estimate, Sta-2 and optionally the two benchmark estimates for one path."""
    path = simulate_full(cell.sim_config(seed), replication)
    obs = path.observations()
    config = cell.estimator_config()
    truth = path.spot_var_at(cell.tau)
    pre = preaverage(obs, config.p_n, config.weight)
    est = spot_vol(obs, cell.tau, config, pre)

    model = BiasModel.from_unit_stable(cell.jumps, config.p_n, obs.delta_n, config.weight)
    bias = bias_term(model, est.u_used) if config.debias.kind == "none" else 0.0
    k2 = k2_riemann(config.kernel, cell.tau, config.h, config.p_n, obs.delta_n, obs.n)
    sta = studentized(est, truth, bias, k2, config, obs.n)
    if compare:
        fw1, fw2 = fw_estimators(obs, cell.tau, config.p_n, config.h, config.weight, config.kernel)
    else:
        fw1 = fw2 = math.nan
    return truth, est.sigma2_hat, sta, fw1, fw2


def _replicate_chunk(args) -> list:
    cell, seed, indices, compare = args
    return [_replicate(cell, seed, r, compare) for r in indices]


def _summary(est: np.ndarray, truth: np.ndarray) -> tuple[float, float, float, float]:
    rel = (est - truth) / truth
    sd = float(np.std(rel, ddof=1)) if rel.size > 1 else 0.0
    return float(np.mean(rel)), sd, float(np.mean((est - truth) ** 2)), float(np.mean(rel**2))


def run_cell(cell: Cell, reps: int, seed: int, parallelism: int = 1, compare: bool = False,
             keep_samples: bool = False) -> MonteCarloReport:
    """Run ``reps`` replications of ``cell``; the result does not depend on ``parallelism``."""
    if reps < 1:
        raise ConfigError("reps", f"must be >= 1, got {reps}")
    if parallelism < 1:
        raise ConfigError("parallelism", f"must be >= 1, got {parallelism}")
    start = time.perf_counter()
    if parallelism == 1:
        rows = _replicate_chunk((cell, seed, range(reps), compare))
    else:
        chunks = [(cell, seed, range(i, reps, parallelism), compare) for i in range(parallelism)]
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            parts = list(pool.map(_replicate_chunk, chunks))
        rows = [None] * reps
        for i, part in enumerate(parts):
            rows[i::parallelism] = part
    data = np.array(rows, dtype=float)
    truth, est, sta = data[:, 0], data[:, 1], data[:, 2]

    rb_mean, sd, mse, mse_rel = _summary(est, truth)
    coverage = {lvl: float(100.0 * np.mean(np.abs(sta) <= q)) for lvl, q in COVERAGE_QUANTILES.items()}
    fw = {}
    if compare:
        for name, col in (("FW1", 3), ("FW2", 4)):
            fw[name] = _summary(data[:, col], truth)
    trb, tsd = theoretical_trb_tsd(cell)
    return MonteCarloReport(
        cell=cell, reps=reps, seed=seed, rb_mean=rb_mean, sd=sd, mse=mse, mse_rel=mse_rel,
        coverage=coverage, sta_mean=float(np.mean(sta)),
        sta_sd=float(np.std(sta, ddof=1)) if reps > 1 else 0.0,
        trb=trb, tsd=tsd, runtime=time.perf_counter() - start, degenerate=reps == 1,
        relative_errors=(est - truth) / truth if keep_samples else None,
        studentized_samples=sta if keep_samples else None, fw=fw)


def with_overrides(cell: Cell, **kwargs) -> Cell:
    """Copy of ``cell`` with some fields replaced."""
    return replace(cell, **kwargs)
