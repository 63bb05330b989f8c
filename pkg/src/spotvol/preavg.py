"""Non-overlapping pre-averaging and the weight summaries phi, psi, psi'."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ConfigError, ObservationSeries, WeightFunction

__all__ = [
    "PreAveragedSeries",
    "preaverage",
    "preaverage_boundary",
    "phi",
    "psi",
    "psi_prime",
]


@dataclass(frozen=True)
class PreAveragedSeries:
    """Pre-averaged increments; ``values[j-1]`` sits at time ``j * p_n * delta_n``."""

    values: np.ndarray
    p_n: int
    delta_n: float
    phi2: float

    def __post_init__(self):
        if not self.phi2 > 0:
            raise ConfigError("phi2", f"must be positive, got {self.phi2}")

    @property
    def block(self) -> float:
        """Time span ``p_n * delta_n`` of one pre-averaging block."""
        return self.p_n * self.delta_n

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1) * self.block


def _check_window(p_n: int, n: int) -> None:
    if int(p_n) != p_n or not 2 <= p_n <= n:
        raise ConfigError("p_n", f"must be an integer in [2, n={n}], got {p_n}")


def preaverage(obs: ObservationSeries, p_n: int, g: WeightFunction) -> PreAveragedSeries:
    """Weighted sums ``sum_{i=1}^{p_n-1} g(i/p_n) dY`` over consecutive blocks of ``p_n`` increments."""
    n = obs.n
    _check_window(p_n, n)
    m = n // p_n
    weights = g.grid(p_n)
    blocks = np.diff(obs.values)[: m * p_n].reshape(m, p_n)
    values = blocks @ weights[1:]
    return PreAveragedSeries(values, int(p_n), obs.delta_n, phi(2.0, p_n, g))


def preaverage_boundary(obs: ObservationSeries, p_n: int, g: WeightFunction) -> np.ndarray:
    """Same quantity written on levels: ``-sum_{i=0}^{p_n-1} (g_{i+1} - g_i) Y``."""
    n = obs.n
    _check_window(p_n, n)
    m = n // p_n
    dg = np.diff(g.grid(p_n))
    levels = obs.values[: m * p_n].reshape(m, p_n)
    return -(levels @ dg)


def phi(theta: float, p_n: int, g: WeightFunction) -> float:
    """``(1/p_n) * sum_{i=1}^{p_n-1} g(i/p_n)^theta``."""
    if p_n < 2:
        raise ConfigError("p_n", f"must be >= 2, got {p_n}")
    inner = g.grid(p_n)[1:-1]
    return float(np.sum(np.power(inner, theta)) / p_n)


def psi(
    p_n: int,
    g: WeightFunction,
    rho: Optional[Callable[[int], float]] = None,
    d_n: int = 0,
) -> float:
    """Noise-variance factor of a pre-averaged increment under autocorrelation ``rho``.

    ``rho`` maps an integer lag to a correlation; ``None`` means uncorrelated noise.
    Lags beyond ``d_n`` are ignored.
    """
    if p_n < 2:
        raise ConfigError("p_n", f"must be >= 2, got {p_n}")
    dg = np.diff(g.grid(p_n))
    total = float(dg @ dg) * (1.0 if rho is None else float(rho(0)))
    if rho is not None:
        for k in range(1, min(d_n, p_n - 1) + 1):
            total += 2.0 * float(rho(k)) * float(dg[:-k] @ dg[k:])
    return p_n * total


def psi_prime(p_n: int, g: WeightFunction) -> float:
    """:func:`psi` for uncorrelated noise: ``p_n * sum (g_{i+1} - g_i)^2``."""
    return psi(p_n, g)
