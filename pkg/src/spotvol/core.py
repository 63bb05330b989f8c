"""Domain types, built-in kernels and weights, and configuration checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

__all__ = [
    "ConfigError",
    "DataError",
    "NumericalError",
    "ObservationSeries",
    "WeightFunction",
    "KernelSpec",
    "Debias",
    "EstimatorConfig",
    "JumpSpec",
    "NoiseSpec",
    "SpotVolEstimate",
    "AUTO",
    "triangle_weight",
    "get_kernel",
    "get_weight",
    "KERNELS",
    "WEIGHTS",
    "validate_rate_conditions",
]

AUTO = "auto"

# h / (p_n * delta_n) below this is flagged; every simulation-study setting sits above 13.
MIN_WINDOW_POINTS = 12.0
_RIEMANN_POINTS = 10_000


class ConfigError(ValueError):
    """A parameter violates a hard invariant. ``field`` names the offender."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class DataError(ValueError):
    """Input data cannot be used (empty, malformed, or non-finite)."""


class NumericalError(ArithmeticError):
    """A computation left its domain of validity."""


def _midpoints(a: float, b: float, m: int = _RIEMANN_POINTS) -> tuple[np.ndarray, float]:
    step = (b - a) / m
    return a + step * (np.arange(m) + 0.5), step


@dataclass(frozen=True)
class ObservationSeries:
    """Equidistant log-price observations ``Y_0, ..., Y_n`` on ``[0, horizon]``."""

    values: np.ndarray
    horizon: float = 1.0

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1:
            raise DataError("values must be one-dimensional")
        if vals.size < 3:
            raise DataError(f"need at least 3 observations (n >= 2), got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise DataError("values contain non-finite entries")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ConfigError("horizon", f"must be positive and finite, got {self.horizon}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "horizon", float(self.horizon))

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def delta_n(self) -> float:
        return self.horizon / self.n

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.delta_n


@dataclass(frozen=True)
class WeightFunction:
    """Pre-averaging weight ``g`` on ``[0, 1]`` with ``g(0) = g(1) = 0``.

    ``evaluator`` must accept numpy arrays.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __post_init__(self):
        g = self.evaluator
        ends = np.asarray(g(np.array([0.0, 1.0])), dtype=float)
        if ends[0] != 0.0 or ends[1] != 0.0:
            raise ConfigError("weight", f"{self.name}: g(0) and g(1) must be 0, got {ends.tolist()}")
        x, step = _midpoints(0.0, 1.0)
        vals = np.asarray(g(x), dtype=float)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConfigError("weight", f"{self.name}: g must be finite and nonnegative on [0, 1]")
        if np.sum(vals**2) * step <= 0:
            raise ConfigError("weight", f"{self.name}: integral of g^2 must be positive")

    def __call__(self, x):
        return np.asarray(self.evaluator(np.asarray(x, dtype=float)), dtype=float)

    def grid(self, p_n: int) -> np.ndarray:
        """``g(i / p_n)`` for ``i = 0..p_n``; the endpoints are pinned to 0."""
        vals = self(np.arange(p_n + 1) / p_n)
        vals[0] = 0.0
        vals[-1] = 0.0
        return vals


@dataclass(frozen=True)
class KernelSpec:
    """Smoothing kernel ``K`` supported on ``[a, b]`` and integrating to one."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    support: tuple[float, float] = (-1.0, 1.0)
    name: str = "custom"

    def __post_init__(self):
        a, b = (float(v) for v in self.support)
        if not a < b:
            raise ConfigError("kernel", f"{self.name}: empty support [{a}, {b}]")
        object.__setattr__(self, "support", (a, b))
        x, step = _midpoints(a, b)
        vals = self(x)
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConfigError("kernel", f"{self.name}: K must be finite and nonnegative")
        mass = float(np.sum(vals) * step)
        if abs(mass - 1.0) > 1e-4:
            raise ConfigError("kernel", f"{self.name}: integral of K is {mass:.6g}, expected 1")
        width = b - a
        outside = np.array([a - 0.5 * width, a - 1e-9 * width, b + 1e-9 * width, b + 0.5 * width])
        if np.any(np.asarray(self.evaluator(outside), dtype=float) != 0):
            raise ConfigError("kernel", f"{self.name}: K must vanish outside its support")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b = self.support
        vals = np.asarray(self.evaluator(x), dtype=float)
        return np.where((x >= a) & (x <= b), vals, 0.0)

    def squared_integral(self) -> float:
        x, step = _midpoints(*self.support)
        return float(np.sum(self(x) ** 2) * step)


def _tri(x):
    return np.clip(np.minimum(x, 1.0 - x), 0.0, None)


def _box(x):
    return np.where(np.abs(x) <= 1.0, 0.5, 0.0)


def _epan(x):
    return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x**2), 0.0)


def _quartic(x):
    return np.where(np.abs(x) <= 1.0, 15.0 / 16.0 * (1.0 - x**2) ** 2, 0.0)


def _triweight(x):
    return np.where(np.abs(x) <= 1.0, 35.0 / 32.0 * (1.0 - x**2) ** 3, 0.0)


def _left(x):
    return np.where((x >= -1.0) & (x < 0.0), 1.0, 0.0)


triangle_weight = WeightFunction(_tri, "triangle")

KERNELS: dict[str, KernelSpec] = {
    "K1": KernelSpec(_box, (-1.0, 1.0), "K1"),
    "K2": KernelSpec(_epan, (-1.0, 1.0), "K2"),
    "K3": KernelSpec(_quartic, (-1.0, 1.0), "K3"),
    "K4": KernelSpec(_triweight, (-1.0, 1.0), "K4"),
    "left": KernelSpec(_left, (-1.0, 0.0), "left"),
}
KERNELS["uniform"] = KERNELS["K1"]

WEIGHTS: dict[str, WeightFunction] = {"triangle": triangle_weight}


def get_kernel(name: Union[str, KernelSpec]) -> KernelSpec:
    if isinstance(name, KernelSpec):
        return name
    try:
        return KERNELS[name]
    except KeyError:
        raise ConfigError("kernel", f"unknown kernel {name!r}; choose from {sorted(KERNELS)}") from None


def get_weight(name: Union[str, WeightFunction]) -> WeightFunction:
    if isinstance(name, WeightFunction):
        return name
    try:
        return WEIGHTS[name]
    except KeyError:
        raise ConfigError("weight", f"unknown weight {name!r}; choose from {sorted(WEIGHTS)}") from None


@dataclass(frozen=True)
class Debias:
    """Jump-bias removal mode: ``none``, ``ratio`` or ``iterative``."""

    kind: str = "none"
    lam: float = 2.0
    xi: float = 1e-3
    iterations: int = 1

    def __post_init__(self):
        if self.kind not in ("none", "ratio", "iterative"):
            raise ConfigError("debias", f"unknown mode {self.kind!r}")
        if self.kind != "none" and not self.lam > 1:
            raise ConfigError("debias.lambda", f"must exceed 1, got {self.lam}")
        if self.kind == "iterative":
            if not self.xi > 0:
                raise ConfigError("debias.xi", f"must be positive, got {self.xi}")
            if int(self.iterations) < 1:
                raise ConfigError("debias.iterations", f"must be >= 1, got {self.iterations}")


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning parameters of the spot-volatility estimator.

    ``u`` is either a nonzero float or :data:`AUTO`; ``u_exponent`` is the power of
    ``log n`` used by the automatic rule.
    """

    p_n: int
    h: float
    u: Union[float, str] = AUTO
    d_n: int = 0
    kernel: KernelSpec = field(default_factory=lambda: KERNELS["K1"])
    weight: WeightFunction = triangle_weight
    debias: Debias = field(default_factory=Debias)
    u_exponent: float = -1.0 / 24.0

    def __post_init__(self):
        object.__setattr__(self, "kernel", get_kernel(self.kernel))
        object.__setattr__(self, "weight", get_weight(self.weight))
        if int(self.p_n) != self.p_n or self.p_n < 2:
            raise ConfigError("p_n", f"must be an integer >= 2, got {self.p_n}")
        object.__setattr__(self, "p_n", int(self.p_n))
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ConfigError("h", f"must be positive and finite, got {self.h}")
        if int(self.d_n) != self.d_n or self.d_n < 0:
            raise ConfigError("d_n", f"must be a nonnegative integer, got {self.d_n}")
        object.__setattr__(self, "d_n", int(self.d_n))
        if isinstance(self.u, str):
            if self.u.lower() != AUTO:
                raise ConfigError("u", f"must be a number or 'auto', got {self.u!r}")
            object.__setattr__(self, "u", AUTO)
        elif not (math.isfinite(self.u) and self.u != 0):
            raise ConfigError("u", f"must be finite and nonzero, got {self.u}")

    @property
    def auto_u(self) -> bool:
        return self.u == AUTO

    def check_against(self, n: int, horizon: float, tau: Optional[float] = None) -> None:
        """Raise :class:`ConfigError` if the config cannot be applied to ``n`` points."""
        if self.p_n > n / 2:
            raise ConfigError("p_n", f"must satisfy p_n <= n/2 = {n / 2}, got {self.p_n}")
        if not self.h < horizon:
            raise ConfigError("h", f"must be below the horizon {horizon}, got {self.h}")
        if self.d_n + 1 >= n:
            raise ConfigError("d_n", f"too large for n = {n}")
        if tau is None:
            return
        if not 0 <= tau <= horizon:
            raise ConfigError("tau", f"must lie in [0, {horizon}], got {tau}")
        step = self.p_n * horizon / n
        a, b = self.kernel.support
        j_lo = max(1, math.ceil((a * self.h + tau) / step))
        j_hi = min(n // self.p_n, math.floor((b * self.h + tau) / step))
        if j_hi < j_lo:
            raise ConfigError("h", f"kernel window at tau={tau} holds no pre-averaged observation")


@dataclass(frozen=True)
class JumpSpec:
    """Symmetric stable components ``(beta, gamma)`` plus an optional compound Poisson part.

    Stable components are normalised so that ``E exp(iuL_1) = exp(-|u|^beta)``.
    """

    stable_components: tuple[tuple[float, float], ...] = ()
    poisson_intensity: float = 0.0
    poisson_mean: float = 0.0
    poisson_std: float = 1.0

    def __post_init__(self):
        comps = tuple((float(b), float(g)) for b, g in self.stable_components)
        object.__setattr__(self, "stable_components", comps)
        betas = [b for b, _ in comps]
        for b, g in comps:
            if not 0 < b < 2:
                raise ConfigError("jumps.beta", f"stable index must lie in (0, 2), got {b}")
            if g < 0:
                raise ConfigError("jumps.gamma", f"scale must be nonnegative, got {g}")
        if any(b1 <= b2 for b1, b2 in zip(betas, betas[1:])):
            raise ConfigError("jumps.beta", f"indices must be strictly decreasing, got {betas}")
        if self.poisson_intensity < 0:
            raise ConfigError("jumps.poisson_intensity", "must be nonnegative")
        if self.poisson_std < 0:
            raise ConfigError("jumps.poisson_std", "must be nonnegative")


@dataclass(frozen=True)
class NoiseSpec:
    """Noise ``eps_i = sigma_eps * chi_i`` with ``chi`` a fractional MA(d_n) in standard normals."""

    sigma_eps: float = 0.0
    d_n: int = 0
    s: float = 0.0

    def __post_init__(self):
        if not self.sigma_eps >= 0:
            raise ConfigError("noise.sigma_eps", f"must be nonnegative, got {self.sigma_eps}")
        if int(self.d_n) != self.d_n or self.d_n < 0:
            raise ConfigError("noise.d_n", f"must be a nonnegative integer, got {self.d_n}")
        object.__setattr__(self, "d_n", int(self.d_n))
        if not -0.5 < self.s < 0.5:
            raise ConfigError("noise.s", f"must lie in (-0.5, 0.5), got {self.s}")


@dataclass(frozen=True)
class SpotVolEstimate:
    tau: float
    sigma2_hat: float
    noise_correction: float
    ecf_value: float
    u_used: float
    clamped: bool
    debias_correction: float = 0.0
    ecf_at_one: float = float("nan")

    def as_dict(self) -> dict:
        return {
            "tau": self.tau,
            "sigma2_hat": self.sigma2_hat,
            "noise_correction": self.noise_correction,
            "ecf_value": self.ecf_value,
            "u_used": self.u_used,
            "clamped": self.clamped,
            "debias_correction": self.debias_correction,
        }


_REGIMES = ("consistency", "clt_beta_le_1p5", "clt_general")


def validate_rate_conditions(
    config: EstimatorConfig, n: int, regime: str = "consistency", horizon: float = 1.0
) -> list[str]:
    """Finite-``n`` proxies for the asymptotic tuning conditions.

    Never raises on a violated condition; every violation becomes one message.
    """
    if regime not in _REGIMES:
        raise ConfigError("regime", f"must be one of {_REGIMES}, got {regime!r}")
    warnings: list[str] = []
    delta = horizon / n
    pd = config.p_n * delta
    h, d = config.h, config.d_n

    k = h / pd
    if k < MIN_WINDOW_POINTS:
        warnings.append(
            f"only ~{math.floor(k)} pre-averaged points in window (h/(p_n*delta_n) = {k:.2f}"
            f" < {MIN_WINDOW_POINTS:g})"
        )
    if h / horizon > 0.25:
        warnings.append(f"bandwidth h = {h:g} is not small relative to the horizon {horizon:g}")
    if config.p_n < 5:
        warnings.append(f"pre-averaging window p_n = {config.p_n} is too short for noise averaging")

    p2d = config.p_n**2 * delta
    if regime == "consistency":
        if p2d >= n ** (1 / 3):
            warnings.append(f"p_n^2*delta_n = {p2d:.3g} >= n^(1/3); consistency condition violated")
        if d > 0 and (d**2 * math.sqrt(h) >= 1 or d**2 * math.sqrt(d * delta / h) >= 1):
            warnings.append(f"noise span d_n = {d} too large for the bandwidth (consistency)")
    else:
        if p2d >= n ** (1 / 5):
            warnings.append(f"p_n^2*delta_n = {p2d:.3g} >= n^(1/5); CLT condition violated")
        if d > 0 and (d**2 * h / math.sqrt(pd) >= 1 or d**5 / config.p_n >= 1):
            warnings.append(f"noise span d_n = {d} too large for p_n and h (CLT)")
        if regime == "clt_general" and h / math.sqrt(pd) <= 1:
            warnings.append("h/sqrt(p_n*delta_n) <= 1; bandwidth too small for the general CLT")
        if not config.auto_u:
            u = abs(float(config.u))
            if regime == "clt_beta_le_1p5" and math.sqrt(pd) / (u**2 * math.sqrt(h)) >= 1:
                warnings.append(f"u = {u:g} too small: sqrt(p_n*delta_n)/(u^2*sqrt(h)) >= 1")
            power = 4 if regime == "clt_beta_le_1p5" else 6
            if h / (u**power * math.sqrt(pd)) > 1e3:
                warnings.append(f"u = {u:g} too small: h/(u^{power}*sqrt(p_n*delta_n)) is large")
    return warnings

