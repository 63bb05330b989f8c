"""Spot-volatility estimation from the empirical characteristic function of
pre-averaged increments, with a kernel estimate of the noise contribution and
optional removal of the stable-jump bias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    ConfigError,
    EstimatorConfig,
    JumpSpec,
    KernelSpec,
    NumericalError,
    ObservationSeries,
    SpotVolEstimate,
    WeightFunction,
)
from .preavg import PreAveragedSeries, phi, preaverage
from .special import special_C, special_D

__all__ = [
    "BiasModel",
    "kernel_window",
    "ecf_stat",
    "noise_var_lag",
    "noise_var_hat",
    "noise_var_hat_literal",
    "select_u",
    "clamp_ecf",
    "sigma2_from_ecf",
    "spot_vol",
    "bias_term",
    "debias_ratio",
    "debias_iterative",
    "studentized",
    "k2_riemann",
]

# relative size below which the de-bias denominator counts as vanished
DEBIAS_REL_GUARD = 1e-12


def kernel_window(kernel: KernelSpec, step: float, count: int, tau: float, h: float):
    """Indices ``j`` in ``1..count`` whose point ``j*step`` falls in ``tau + h*[a, b]``.

    Returns ``(j_lo, weights)`` where ``weights[k] = K((j_lo + k)*step - tau) / h``
    evaluated through the kernel itself (not divided by ``h``).
    """
    a, b = kernel.support
    j_lo = max(1, math.ceil((a * h + tau) / step))
    j_hi = min(count, math.floor((b * h + tau) / step))
    if j_hi < j_lo:
        return j_lo, np.empty(0)
    j = np.arange(j_lo, j_hi + 1)
    return j_lo, kernel((j * step - tau) / h)


def _normalised_weights(kernel, step, count, tau, h, what):
    j_lo, w = kernel_window(kernel, step, count, tau, h)
    total = w.sum()
    if w.size == 0 or total <= 0:
        raise ConfigError("h", f"no {what} in bandwidth at tau={tau}")
    return j_lo, w / total


def ecf_stat(pre: PreAveragedSeries, tau: float, u: float, h: float, kernel: KernelSpec) -> float:
    """Kernel-weighted mean of ``cos(u * dY / sqrt(phi2 * p_n * delta_n))``.

    The kernel weights are rescaled to sum to one over the indices in range,
    which is the finite-sample factor ``F_S``.
    """
    if u == 0:
        raise ConfigError("u", "must be nonzero")
    j_lo, w = _normalised_weights(kernel, pre.block, pre.values.size, tau, h,
                                  "pre-averaged observations")
    x = pre.values[j_lo - 1: j_lo - 1 + w.size]
    scale = u / math.sqrt(pre.phi2 * pre.block)
    return float(w @ np.cos(scale * x))


def _lag_diff(y: np.ndarray, lag: int, count: int) -> np.ndarray:
    # Y_{i+lag-1} - Y_{i-1} for i = 1..count
    return y[lag: lag + count] - y[:count]


def _noise_window(obs: ObservationSeries, tau: float, h: float, d_n: int, kernel: KernelSpec):
    n = obs.n
    if d_n < 0 or d_n + 1 >= n:
        raise ConfigError("d_n", f"must satisfy 0 <= d_n < n - 1, got {d_n}")
    a, b = kernel.support
    delta = obs.delta_n
    i_lo = max(1, math.ceil((a * h + tau) / delta))
    i_hi = min(n, math.floor((b * h + tau) / delta))
    if i_hi < i_lo:
        raise ConfigError("h", f"no observations in bandwidth at tau={tau}")
    i = np.arange(i_lo, i_hi + 1)
    k = kernel((i * delta - tau) / h)
    total = k.sum()
    if total <= 0:
        raise ConfigError("h", f"no observations in bandwidth at tau={tau}")
    # the noise sums stop at i = n - d_n - 1, the normaliser runs to n
    keep = i <= n - d_n - 1
    return i[keep], k[keep] / total


def _noise_lags(obs: ObservationSeries, tau: float, h: float, d_n: int, kernel: KernelSpec,
                lags: Sequence[int]) -> np.ndarray:
    i, w = _noise_window(obs, tau, h, d_n, kernel)
    y = obs.values
    start = i - 1
    base = (y[start + d_n + 1] - y[start]) ** 2
    out = np.empty(len(lags))
    for idx, j in enumerate(lags):
        j = abs(int(j))
        if j == 0:
            out[idx] = 0.5 * float(w @ base)
        else:
            out[idx] = 0.5 * float(w @ (base - (y[start + j] - y[start]) ** 2))
    return out


def noise_var_lag(obs: ObservationSeries, tau: float, h: float, j: int, d_n: int,
                  kernel: KernelSpec) -> float:
    """Kernel estimate of the lag-``j`` noise autocovariance ``w^2 * rho(j)``.

    Lag 0 uses half the mean square of the ``(d_n + 1)``-step differences, which
    straddle the dependence span. Lag ``j`` subtracts half the mean square of the
    ``j``-step differences from that, leaving ``w^2 * rho(j)``.
    """
    if abs(j) > d_n:
        raise ConfigError("j", f"lag must satisfy |j| <= d_n = {d_n}, got {j}")
    return float(_noise_lags(obs, tau, h, d_n, kernel, [j])[0])


def _weight_lag_products(p_n: int, g: WeightFunction, d_n: int) -> np.ndarray:
    dg = np.diff(g.grid(p_n))
    c = np.zeros(d_n + 1)
    c[0] = dg @ dg
    for k in range(1, min(d_n, p_n - 1) + 1):
        c[k] = dg[:-k] @ dg[k:]
    return c


def noise_var_hat(obs: ObservationSeries, tau: float, h: float, d_n: int, g: WeightFunction,
                  p_n: int, kernel: KernelSpec) -> float:
    """Estimate of ``psi^n * w_tau^2``, grouping the weight double sum by lag."""
    c = _weight_lag_products(p_n, g, d_n)
    lagged = _noise_lags(obs, tau, h, d_n, kernel, range(d_n + 1))
    return p_n * float(c[0] * lagged[0] + 2.0 * (c[1:] @ lagged[1:]))


def noise_var_hat_literal(obs: ObservationSeries, tau: float, h: float, d_n: int,
                          g: WeightFunction, p_n: int, kernel: KernelSpec) -> float:
    """Same as :func:`noise_var_hat` but summing over every index pair. Slow; for checks."""
    dg = np.diff(g.grid(p_n))
    lagged = _noise_lags(obs, tau, h, d_n, kernel, range(d_n + 1))
    total = 0.0
    for i1 in range(p_n):
        for i2 in range(max(i1 - d_n, 0), min(i1 + d_n, p_n - 1) + 1):
            total += dg[i1] * dg[i2] * lagged[abs(i1 - i2)]
    return p_n * total


def clamp_ecf(value: float, n: int) -> float:
    return min(max(value, 1.0 / n), (n - 1.0) / n)


def select_u(n: int, ecf_at_one: float, exponent: float = -1.0 / 24.0) -> float:
    """``(log n)^exponent / sqrt(-2 log S(1))`` with ``S(1)`` clamped into ``[1/n, (n-1)/n]``."""
    s = clamp_ecf(ecf_at_one, n)
    return math.log(n) ** exponent / math.sqrt(-2.0 * math.log(s))


def sigma2_from_ecf(ecf: float, u: float, n: int) -> float:
    return -2.0 / u**2 * math.log(clamp_ecf(ecf, n))


def spot_vol(obs: ObservationSeries, tau: float, config: EstimatorConfig,
             pre: Optional[PreAveragedSeries] = None) -> SpotVolEstimate:
    """Spot variance estimate at ``tau``.

    ``pre`` may carry a precomputed pre-averaging of ``obs`` with ``config.p_n``
    and ``config.weight``.
    """
    n = obs.n
    config.check_against(n, obs.horizon, tau)
    if pre is None:
        pre = preaverage(obs, config.p_n, config.weight)
    h, kernel = config.h, config.kernel

    s_one = ecf_stat(pre, tau, 1.0, h, kernel)
    u = select_u(n, s_one, config.u_exponent) if config.auto_u else float(config.u)
    s_raw = s_one if u == 1.0 else ecf_stat(pre, tau, u, h, kernel)
    s_clamped = clamp_ecf(s_raw, n)

    v_n = 1.0 / (pre.phi2 * config.p_n**2 * obs.delta_n)
    noise = v_n * noise_var_hat(obs, tau, h, config.d_n, config.weight, config.p_n, kernel)
    sigma2 = -2.0 / u**2 * math.log(s_clamped) - noise

    correction = 0.0
    mode = config.debias
    if mode.kind != "none":
        def est_fn(x: float) -> float:
            return sigma2_from_ecf(ecf_stat(pre, tau, x, h, kernel), x, n) - noise

        if mode.kind == "ratio":
            sigma2, correction = debias_ratio(est_fn, u, mode.lam, base=sigma2)
        else:
            scale = u**2 * math.sqrt(pre.block / h)
            debiased = debias_iterative(est_fn, u, mode.lam, mode.xi, mode.iterations, scale)
            correction = sigma2 - debiased
            sigma2 = debiased

    return SpotVolEstimate(
        tau=float(tau),
        sigma2_hat=float(sigma2),
        noise_correction=float(noise),
        ecf_value=float(s_clamped),
        u_used=float(u),
        clamped=bool(s_clamped != s_raw),
        debias_correction=float(correction),
        ecf_at_one=float(s_one),
    )


@dataclass(frozen=True)
class BiasModel:
    """Stable-jump bias parameters.

    ``components`` holds ``(beta, gamma_plus, gamma_minus)`` with the scales
    normalised so each one-sided driver has tail mass ``x^-beta``.
    """

    components: tuple[tuple[float, float, float], ...]
    phi_betas: tuple[float, ...]
    phi2: float
    pn_dn: float

    def __post_init__(self):
        comps = tuple((float(b), float(gp), float(gm)) for b, gp, gm in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "phi_betas", tuple(float(v) for v in self.phi_betas))
        betas = [c[0] for c in comps]
        if len(self.phi_betas) != len(comps):
            raise ConfigError("phi_betas", "need one value per component")
        if any(not 1 <= b < 2 for b in betas) or any(b1 < b2 for b1, b2 in zip(betas, betas[1:])):
            raise ConfigError("components", f"need 1 <= beta_K <= ... <= beta_1 < 2, got {betas}")

    @property
    def symmetric(self) -> bool:
        return all(gp == gm for _, gp, gm in self.components)

    @classmethod
    def build(cls, components, p_n: int, delta_n: float, g: WeightFunction) -> "BiasModel":
        comps = tuple(components)
        return cls(comps, tuple(phi(b, p_n, g) for b, _, _ in comps), phi(2.0, p_n, g), p_n * delta_n)

    @classmethod
    def from_unit_stable(cls, jumps: JumpSpec, p_n: int, delta_n: float,
                         g: WeightFunction) -> "BiasModel":
        """Bias model for symmetric components with characteristic function ``exp(-|gamma u|^beta)``.

        Such a component has two-sided tail ``|gamma|^beta / (2 C(beta))``; rescaling
        by ``(2 C(beta))^(-1/beta)`` maps it to unit tail mass.
        """
        comps = []
        for beta, gamma in jumps.stable_components:
            tail = gamma * (2.0 * special_C(beta)) ** (-1.0 / beta)
            comps.append((beta, tail, tail))
        return cls.build(comps, p_n, delta_n, g)


def bias_term(model: BiasModel, u: float) -> float:
    """Jump-induced bias of the estimate at ``u``; zero when all scales vanish."""
    if u == 0:
        raise ConfigError("u", "must be nonzero")
    level = 0.0
    phase = 0.0
    arg = abs(u) / math.sqrt(model.phi2)
    for (beta, gp, gm), phib in zip(model.components, model.phi_betas):
        common = phib * arg**beta * model.pn_dn ** (1.0 - beta / 2.0)
        if gp or gm:
            level += special_C(beta) * common * (abs(gp) ** beta + abs(gm) ** beta)
        skew = math.copysign(abs(gp) ** beta, gp) - math.copysign(abs(gm) ** beta, gm)
        if skew != 0.0:
            phase += special_D(beta) * common * skew
    out = 2.0 / u**2 * level
    if phase != 0.0:
        c = math.cos(phase)
        if c <= 0:
            raise NumericalError("bias model outside asymptotic regime")
        out -= 2.0 / u**2 * math.log(c)
    return out


def _aitken(f0: float, f1: float, f2: float) -> float:
    den = f2 - 2.0 * f1 + f0
    if den == 0.0 or abs(den) < DEBIAS_REL_GUARD * abs(f0):
        return 0.0
    return (f1 - f0) ** 2 / den


def debias_ratio(est_fn: Callable[[float], float], u: float, lam: float,
                 base: Optional[float] = None) -> tuple[float, float]:
    """Remove a single power-law bias using estimates at ``u``, ``lam*u``, ``lam^2*u``.

    Returns ``(corrected, correction)``.
    """
    if not lam > 1:
        raise ConfigError("lambda", f"must exceed 1, got {lam}")
    f0 = est_fn(u) if base is None else base
    correction = _aitken(f0, est_fn(lam * u), est_fn(lam * lam * u))
    return f0 - correction, correction


def debias_iterative(est_fn: Callable[[float], float], u: float, lam: float, xi: float,
                     iterations: int, scale: float) -> float:
    """Iterated ratio correction with a ``scale * xi`` shift per step.

    Level ``i`` at ``u`` reads level ``i - 1`` at ``u``, ``lam*u`` and ``lam^2*u``,
    so ``iterations = K`` evaluates the base estimate on ``u * lam^m``, ``m = 0..2K``.
    """
    if not lam > 1:
        raise ConfigError("lambda", f"must exceed 1, got {lam}")
    if not xi > 0:
        raise ConfigError("xi", f"must be positive, got {xi}")
    if iterations < 1:
        raise ConfigError("iterations", f"must be >= 1, got {iterations}")
    level = [est_fn(u * lam**m) for m in range(2 * iterations + 1)]
    for _ in range(iterations):
        level = [level[m] + scale * xi - _aitken(level[m], level[m + 1], level[m + 2])
                 for m in range(len(level) - 2)]
    return level[0]


def k2_riemann(kernel: KernelSpec, tau: float, h: float, p_n: int, delta_n: float, n: int) -> float:
    """Riemann sum of ``K^2`` over pre-averaged points, with the ``F_S`` rescaling."""
    step = p_n * delta_n
    _, w = _normalised_weights(kernel, step, n // p_n, tau, h, "pre-averaged observations")
    # w = K_j / sum K, and F_S * K_j = (h / step) * w
    return float(step / h * np.sum((h / step * w) ** 2))


def studentized(est: SpotVolEstimate, true_sigma2: float, bias: float, k2: float,
                config: EstimatorConfig, n: int, horizon: float = 1.0) -> float:
    """Studentized error; pass ``bias=0`` for the uncorrected statistic."""
    if not k2 > 0:
        raise ConfigError("k2", f"must be positive, got {k2}")
    step = config.p_n * horizon / n
    spread = -2.0 * math.log(clamp_ecf(est.ecf_at_one, n))
    return math.sqrt(config.h / step) * (est.sigma2_hat - true_sigma2 - bias) / (
        math.sqrt(2.0 * k2) * spread)
