"""Spot volatility estimation from noisy high-frequency prices with stable-like jumps.

The estimator pre-averages the observations over non-overlapping blocks, takes a
kernel-weighted empirical characteristic function of the block increments and
subtracts a kernel estimate of the noise contribution.
"""

from .core import (
    AUTO,
    KERNELS,
    WEIGHTS,
    ConfigError,
    DataError,
    Debias,
    EstimatorConfig,
    JumpSpec,
    KernelSpec,
    NoiseSpec,
    NumericalError,
    ObservationSeries,
    SpotVolEstimate,
    WeightFunction,
    get_kernel,
    get_weight,
    triangle_weight,
    validate_rate_conditions,
)
from .estimator import (
    BiasModel,
    bias_term,
    debias_iterative,
    debias_ratio,
    ecf_stat,
    k2_riemann,
    noise_var_hat,
    noise_var_lag,
    select_u,
    spot_vol,
    studentized,
)
from .preavg import PreAveragedSeries, phi, preaverage, psi, psi_prime
from .simulate import SimConfig, SimPath, simulate_full
from .special import special_C, special_D

__version__ = "0.1.0"
