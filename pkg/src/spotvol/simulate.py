"""Data-generating process: Heston diffusion, symmetric stable and compound Poisson
jumps, and fractionally differenced MA microstructure noise.

Every component draws from its own substream, derived from ``(seed, replication, tag)``
through :class:`numpy.random.SeedSequence`, so components can be reseeded
independently and replications can run in any order or process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numba
import numpy as np

from .core import ConfigError, JumpSpec, NoiseSpec, ObservationSeries

__all__ = [
    "SimConfig",
    "SimPath",
    "component_rng",
    "sample_sigma0",
    "simulate_heston",
    "sample_stable",
    "sample_stable_increment",
    "compound_poisson",
    "ma_coefficients",
    "ma_noise",
    "simulate_full",
    "TAG_SIGMA0",
    "TAG_BROWNIAN",
    "TAG_POISSON",
    "TAG_NOISE",
    "tag_stable",
]

TAG_SIGMA0 = 0
TAG_BROWNIAN = 1
TAG_POISSON = 2
TAG_NOISE = 3


def tag_stable(k: int) -> int:
    return 100 + k


def component_rng(seed: int, replication: int, tag: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replication), int(tag)))
    return np.random.Generator(np.random.PCG64(ss))


def _paper_jumps() -> JumpSpec:
    return JumpSpec(((1.2, 0.15), (1.0, 0.05)), poisson_intensity=3.0, poisson_mean=0.0, poisson_std=1.0)


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; defaults reproduce the simulation-study design.

    ``sigma0_sq=None`` draws the initial variance from the CIR stationary law.
    """

    n: int = 117_000
    horizon: float = 1.0
    x0: float = 5.49
    drift: float = 0.5
    kappa: float = 6.0
    theta_bar: float = 0.25
    vol_of_vol: float = 0.5
    rho_leverage: float = -0.3
    jumps: JumpSpec = field(default_factory=_paper_jumps)
    noise: NoiseSpec = field(default_factory=lambda: NoiseSpec(0.01, 0, 0.0))
    seed: int = 0
    sigma0_sq: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError("n", f"must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.horizon > 0:
            raise ConfigError("horizon", f"must be positive, got {self.horizon}")
        if not self.kappa > 0:
            raise ConfigError("kappa", f"must be positive, got {self.kappa}")
        if not self.theta_bar > 0:
            raise ConfigError("theta_bar", f"must be positive, got {self.theta_bar}")
        if not self.vol_of_vol >= 0:
            raise ConfigError("vol_of_vol", f"must be nonnegative, got {self.vol_of_vol}")
        if not -1 <= self.rho_leverage <= 1:
            raise ConfigError("rho_leverage", f"must lie in [-1, 1], got {self.rho_leverage}")
        if self.sigma0_sq is not None and not self.sigma0_sq > 0:
            raise ConfigError("sigma0_sq", f"must be positive, got {self.sigma0_sq}")

    @property
    def delta_n(self) -> float:
        return self.horizon / self.n


@dataclass(frozen=True)
class SimPath:
    """A simulated path on the grid ``t_i = i * horizon / n``."""

    clean_logprice: np.ndarray
    noisy: np.ndarray
    spot_var: np.ndarray
    horizon: float = 1.0
    components: Optional[dict] = None

    @property
    def n(self) -> int:
        return self.noisy.size - 1

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * (self.horizon / self.n)

    def observations(self) -> ObservationSeries:
        return ObservationSeries(self.noisy, self.horizon)

    def spot_var_at(self, tau: float) -> float:
        i = int(round(tau * self.n / self.horizon))
        return float(self.spot_var[min(max(i, 0), self.n)])


def sample_sigma0(rng: np.random.Generator, kappa: float = 6.0, theta_bar: float = 0.25,
                  vol_of_vol: float = 0.5, size=None):
    """Draw from the CIR stationary law Gamma(shape=2*kappa*theta/xi^2, rate=2*kappa/xi^2)."""
    rate = 2.0 * kappa / vol_of_vol**2
    return rng.gamma(theta_bar * rate, 1.0 / rate, size=size)


@numba.njit(cache=True)
def _cir_euler(v0, kappa, theta, xi, dt, dw):
    n = dw.size
    v = np.empty(n + 1)
    v[0] = v0
    for i in range(n):
        vp = v[i] if v[i] > 0.0 else 0.0
        v[i + 1] = v[i] + kappa * (theta - vp) * dt + xi * math.sqrt(vp) * dw[i]
    return v


def simulate_heston(config: SimConfig, rng: np.random.Generator, sigma0_sq: Optional[float] = None):
    """Full-truncation Euler scheme for the Heston price and variance.

    Returns ``(logprice, spot_var)``, both of length ``n + 1``. The log-price holds
    ``x0 + drift*t + int sigma dB`` only.
    """
    n, dt = config.n, config.delta_n
    if sigma0_sq is None:
        sigma0_sq = config.sigma0_sq
    if sigma0_sq is None:
        sigma0_sq = float(sample_sigma0(rng, config.kappa, config.theta_bar, config.vol_of_vol))
    z = rng.standard_normal((2, n))
    sq = math.sqrt(dt)
    rho = config.rho_leverage
    dw = sq * z[0]
    db = sq * (rho * z[0] + math.sqrt(1.0 - rho * rho) * z[1])
    v = _cir_euler(float(sigma0_sq), config.kappa, config.theta_bar, config.vol_of_vol, dt, dw)
    vol = np.sqrt(np.maximum(v[:-1], 0.0))
    x = np.empty(n + 1)
    x[0] = config.x0
    x[1:] = config.x0 + np.cumsum(config.drift * dt + vol * db)
    return x, np.maximum(v, 0.0)


def sample_stable(beta: float, rng: np.random.Generator, size=None):
    """Symmetric stable draws with characteristic function ``exp(-|u|^beta)``.

    Chambers-Mallows-Stuck with zero skewness.
    """
    if not 0 < beta <= 2:
        raise ConfigError("beta", f"stable index must lie in (0, 2], got {beta}")
    v = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, size=size)
    w = rng.standard_exponential(size=size)
    if beta == 1.0:
        return np.tan(v)
    return (np.sin(beta * v) / np.cos(v) ** (1.0 / beta)
            * (np.cos((1.0 - beta) * v) / w) ** ((1.0 - beta) / beta))


def sample_stable_increment(beta: float, scale_time: float, rng: np.random.Generator, size=None):
    """Increment of the unit stable process over a time step ``scale_time``."""
    if not scale_time > 0:
        raise ConfigError("scale_time", f"must be positive, got {scale_time}")
    return scale_time ** (1.0 / beta) * sample_stable(beta, rng, size)


def compound_poisson(intensity: float, horizon: float, n: int, rng: np.random.Generator,
                     mean: float = 0.0, std: float = 1.0) -> np.ndarray:
    """Compound Poisson path sampled on ``n + 1`` grid points.

    A jump at time ``t`` shows up from the first grid point at or after ``t``.
    """
    if intensity < 0:
        raise ConfigError("intensity", f"must be nonnegative, got {intensity}")
    count = rng.poisson(intensity * horizon)
    times = rng.uniform(0.0, horizon, size=count)
    sizes = rng.normal(mean, std, size=count)
    bins = np.minimum(np.ceil(times * n / horizon).astype(np.int64), n)
    jumps = np.zeros(n + 1)
    np.add.at(jumps, bins, sizes)
    return np.cumsum(jumps)


def ma_coefficients(s: float, d_n: int) -> np.ndarray:
    """``a_0 = 1`` and ``a_j = s(1+s)...(j-1+s)/j!`` for ``j = 1..d_n``."""
    a = np.ones(d_n + 1)
    for j in range(1, d_n + 1):
        a[j] = a[j - 1] * (j - 1 + s) / j
    return a


def ma_noise(spec: NoiseSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """``sigma_eps * chi_i`` for ``i = 0..n`` with ``chi_i = sum_j a_j Z_{i-j}``.

    ``d_n`` extra innovations precede index 0, so the series starts stationary.
    ``chi`` is not rescaled to unit variance.
    """
    z = rng.standard_normal(n + 1 + spec.d_n)
    if spec.d_n == 0:
        chi = z
    else:
        chi = np.convolve(z, ma_coefficients(spec.s, spec.d_n), mode="valid")
    return spec.sigma_eps * chi


def simulate_full(config: SimConfig, replication: int = 0, keep_components: bool = False) -> SimPath:
    """One path of the full model; deterministic in ``(config, replication)``."""
    n, dt, seed = config.n, config.delta_n, config.seed
    sigma0 = config.sigma0_sq
    if sigma0 is None:
        sigma0 = float(sample_sigma0(component_rng(seed, replication, TAG_SIGMA0),
                                     config.kappa, config.theta_bar, config.vol_of_vol))
    cont, spot_var = simulate_heston(config, component_rng(seed, replication, TAG_BROWNIAN), sigma0)
    clean = cont.copy()
    parts = {"continuous": cont} if keep_components else None

    stable_total = np.zeros(n + 1)
    for k, (beta, gamma) in enumerate(config.jumps.stable_components):
        if gamma == 0:
            continue
        inc = sample_stable_increment(beta, dt, component_rng(seed, replication, tag_stable(k)), n)
        stable_total[1:] += gamma * np.cumsum(inc)
    clean += stable_total

    jp = config.jumps
    cp = compound_poisson(jp.poisson_intensity, config.horizon, n,
                          component_rng(seed, replication, TAG_POISSON), jp.poisson_mean, jp.poisson_std)
    clean += cp

    noise = ma_noise(config.noise, n, component_rng(seed, replication, TAG_NOISE))
    noisy = clean + noise
    if keep_components:
        parts.update(stable=stable_total, poisson=cp, noise=noise)
    return SimPath(clean, noisy, spot_var, config.horizon, parts)
