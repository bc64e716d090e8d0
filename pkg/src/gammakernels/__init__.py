"""Gamma functions, difference operators and kernel identities."""
from .errors import (
    ChamberError,
    ContinuationError,
    DivergenceError,
    GammaKernelError,
    MagnitudeOverflowError,
    PoleProximityError,
    SamplingExhaustedError,
)
from .gamma import (
    DEFAULT_CONFIG,
    EvalConfig,
    ModularParams,
    Regime,
    elliptic_gamma,
    hyperbolic_gamma,
    p_const,
    s_fn,
    theta_R,
    trig_gamma,
)
from .kernels import KernelSpec, s2_kernel, s3_kernel, weight
from .operators import DifferenceOperator, apply, build_a2, build_a3, build_h2, build_h3

__version__ = "0.1.0"

__all__ = [
    "ChamberError", "ContinuationError", "DivergenceError", "GammaKernelError",
    "MagnitudeOverflowError", "PoleProximityError", "SamplingExhaustedError",
    "DEFAULT_CONFIG", "EvalConfig", "ModularParams", "Regime",
    "elliptic_gamma", "hyperbolic_gamma", "p_const", "s_fn", "theta_R", "trig_gamma",
    "KernelSpec", "s2_kernel", "s3_kernel", "weight",
    "DifferenceOperator", "apply", "build_a2", "build_a3", "build_h2", "build_h3",
]
