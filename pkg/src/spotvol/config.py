"""INI configuration files with a fixed, typed key schema.

Sections and keys (all optional, defaults in brackets)::

    [simulation]  n [117000], horizon [1.0], x0 [5.49], drift [0.5], kappa [6.0],
                  theta_bar [0.25], vol_of_vol [0.5], rho_leverage [-0.3], sigma0_sq [stationary draw]
    [jumps]       betas [1.2, 1.0], gammas [0.15, 0.05], poisson_intensity [3.0],
                  poisson_mean [0.0], poisson_std [1.0]
    [noise]       sigma_eps [0.01], d_n [0], s [0.0]
    [estimator]   p_n [auto], h [n^-0.26], u [auto], d_n [0], kernel [K1], weight [triangle],
                  debias [none], lambda [2.0], xi [1e-3], iterations [1]
    [bench]       tau, kernel, h, sigma_eps, beta1, d_n, s, n: comma-separated lists whose
                  product forms the grid
    [curve]       interval_s [1], first_open_ns [first tick], days [5], hours [6.5], points [100],
                  log_prices [true], d_n [10]

Bandwidths accept numbers, ``n^-X`` rules, or ``clt`` for ``n^(-1/4) (log n)^(-1/6)``.
"""

from __future__ import annotations

import configparser
import itertools
import math
import re
from pathlib import Path
from typing import Any, Callable, Union

from .bench import Cell, resolve_bandwidth
from .core import AUTO, ConfigError, Debias, EstimatorConfig, JumpSpec, NoiseSpec
from .simulate import SimConfig

__all__ = ["load_config", "sim_config_from", "estimator_config_from", "bench_cells", "SCHEMA"]


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _auto_or(kind: Callable[[str], Any]) -> Callable[[str], Any]:
    def parse(text: str):
        return AUTO if text.strip().lower() == AUTO else kind(text)
    return parse


def _bandwidth(text: str) -> Union[float, str]:
    try:
        return float(text)
    except ValueError:
        resolve_bandwidth(text.strip(), 100)
        return text.strip()


def _strings(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _bandwidths(text: str) -> tuple:
    return tuple(_bandwidth(v) for v in _strings(text))


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(v) for v in _strings(text))


SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "simulation": dict(n=_int, horizon=float, x0=float, drift=float, kappa=float, theta_bar=float,
                       vol_of_vol=float, rho_leverage=float, sigma0_sq=float, seed=_int),
    "jumps": dict(betas=_floats, gammas=_floats, poisson_intensity=float, poisson_mean=float,
                  poisson_std=float),
    "noise": dict(sigma_eps=float, d_n=_int, s=float),
    "estimator": dict(p_n=_auto_or(_int), h=_bandwidth, u=_auto_or(float), d_n=_int, kernel=str,
                      weight=str, debias=str, iterations=_int, xi=float, **{"lambda": float}),
    "bench": dict(tau=_floats, kernel=_strings, h=_bandwidths, sigma_eps=_floats, beta1=_floats,
                  d_n=_ints, s=_floats, n=_ints),
    "curve": dict(interval_s=float, first_open_ns=_int, days=_int, hours=float, points=_int,
                  log_prices=_bool, d_n=_int),
}


def _line_of(lines: list[str], section: str, key: str) -> int:
    current = None
    for no, line in enumerate(lines, start=1):
        stripped = line.strip()
        m = re.match(r"^\[(.+)\]$", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"^{re.escape(key)}\s*[=:]", stripped, re.IGNORECASE):
            return no
    return 0


def load_config(path: Union[str, Path]) -> dict[str, dict[str, Any]]:
    """Parse and type-check a config file; errors name the offending line."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError("config", f"{path}: {exc}") from None
    out: dict[str, dict[str, Any]] = {}
    for section in parser.sections():
        if section not in SCHEMA:
            line = next((i for i, ln in enumerate(lines, 1) if ln.strip() == f"[{section}]"), 0)
            raise ConfigError(section, f"{path}:{line}: unknown section [{section}]")
        typed = {}
        for key, raw in parser.items(section):
            line = _line_of(lines, section, key)
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", f"{path}:{line}: unknown key {key!r} in [{section}]")
            try:
                typed[key] = SCHEMA[section][key](raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{section}.{key}", f"{path}:{line}: bad value {raw!r}: {exc}") from None
        out[section] = typed
    return out


def sim_config_from(cfg: dict, seed: int) -> SimConfig:
    sim = dict(cfg.get("simulation", {}))
    sim.pop("seed", None)
    jp = cfg.get("jumps", {})
    betas = jp.get("betas", (1.2, 1.0))
    gammas = jp.get("gammas", (0.15, 0.05))
    if len(betas) != len(gammas):
        raise ConfigError("jumps.gammas", "need one gamma per beta")
    jumps = JumpSpec(tuple(zip(betas, gammas)), jp.get("poisson_intensity", 3.0),
                     jp.get("poisson_mean", 0.0), jp.get("poisson_std", 1.0))
    nz = cfg.get("noise", {})
    noise = NoiseSpec(nz.get("sigma_eps", 0.01), nz.get("d_n", 0), nz.get("s", 0.0))
    return SimConfig(jumps=jumps, noise=noise, seed=seed, **sim)


def estimator_config_from(cfg: dict, n: int) -> EstimatorConfig:
    est = cfg.get("estimator", {})
    p_n = est.get("p_n", AUTO)
    if p_n == AUTO:
        p_n = max(2, math.isqrt(n) // 3)
    debias = Debias(est.get("debias", "none"), est.get("lambda", 2.0), est.get("xi", 1e-3),
                    est.get("iterations", 1))
    return EstimatorConfig(p_n=p_n, h=resolve_bandwidth(est.get("h", "n^-0.26"), n),
                           u=est.get("u", AUTO), d_n=est.get("d_n", 0),
                           kernel=est.get("kernel", "K1"), weight=est.get("weight", "triangle"),
                           debias=debias)


def bench_cells(cfg: dict) -> list[Cell]:
    """Cartesian product of the ``[bench]`` lists, in file order."""
    grid = cfg.get("bench", {})
    base = Cell()
    keys = ("tau", "kernel", "h", "sigma_eps", "beta1", "d_n", "s", "n")
    axes = [grid.get(k, (getattr(base, k),)) for k in keys]
    return [Cell(**dict(zip(keys, combo))) for combo in itertools.product(*axes)]
