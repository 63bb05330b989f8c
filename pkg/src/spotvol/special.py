"""The improper integrals C(beta) and D(beta) entering the jump bias.

    C(beta) = int_0^inf sin(x) / x^beta dx,          0 < beta < 2
    D(beta) = int_0^inf (1 - cos(x)) / x^beta dx,    1 < beta < 2

Both are evaluated as Gauss-Legendre quadrature on ``[0, M]`` (half-period panels,
with a Jacobi-weighted first panel for the ``x^-beta`` endpoint) plus the
asymptotic expansion of the oscillatory tail beyond ``M = 200*pi``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import special as sps

from .core import ConfigError

__all__ = ["special_C", "special_D", "fourier_tail"]

_M = 200.0 * math.pi
_NODES = 24
_TAIL_TERMS = 8


def fourier_tail(beta: float, m: float, terms: int = _TAIL_TERMS) -> complex:
    """Asymptotic series for ``int_m^inf exp(ix) x^-beta dx``.

    Repeated integration by parts gives
    ``i e^{im} m^-beta sum_k (-i)^k (beta)_k m^-k`` with ``(beta)_k`` the rising factorial.
    """
    total = 0j
    rising = 1.0
    for k in range(terms):
        total += (-1j) ** k * rising / m**k
        rising *= beta + k
    return 1j * np.exp(1j * m) * m ** (-beta) * total


@lru_cache(maxsize=None)
def _legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


@lru_cache(maxsize=None)
def _jacobi(n: int, power: float):
    # nodes/weights for int_0^1 t^power f(t) dt, power > -1
    x, w = sps.roots_jacobi(n, 0.0, power)
    return (x + 1.0) / 2.0, w / 2.0 ** (1.0 + power)


def _panels(f, lo: float, hi: float, width: float) -> float:
    x, w = _legendre(_NODES)
    edges = np.arange(lo, hi + 0.5 * width, width)
    mids = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * width
    pts = mids + half * x[None, :]
    return float(np.sum(f(pts) * w[None, :]) * half)


def _oscillatory(beta: float, numerator, order: int) -> float:
    """``int_0^M numerator(x) x^-beta dx`` where ``numerator`` vanishes to ``order`` at 0.

    The first panel ``[0, pi]`` integrates ``numerator(x) / x^order`` against the
    Jacobi weight ``x^(order - beta)``.
    """
    power = order - beta
    t, w = _jacobi(_NODES, power)
    x = math.pi * t
    head = math.pi ** (1.0 + power) * float(np.sum(w * numerator(x) / x**order))
    body = _panels(lambda x: numerator(x) * x ** (-beta), math.pi, _M, math.pi)
    return head + body


def special_C(beta: float) -> float:
    """``int_0^inf sin(x) x^-beta dx`` for ``0 < beta < 2``."""
    if not 0 < beta < 2:
        raise ConfigError("beta", f"C(beta) needs 0 < beta < 2, got {beta}")
    return _oscillatory(beta, np.sin, 1) + fourier_tail(beta, _M).imag


def special_D(beta: float) -> float:
    """``int_0^inf (1 - cos x) x^-beta dx`` for ``1 < beta < 2``."""
    if not 1 < beta < 2:
        raise ConfigError("beta", f"D(beta) needs 1 < beta < 2, got {beta}")
    head = _oscillatory(beta, lambda x: 2.0 * np.sin(0.5 * x) ** 2, 2)
    tail = _M ** (1.0 - beta) / (beta - 1.0) - fourier_tail(beta, _M).real
    return head + tail
