"""Kernel functions, weight functions and Toda kernels in all regimes."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import PoleProximityError
from .gamma import (
    DEFAULT_CONFIG,
    EvalConfig,
    ModularParams,
    Regime,
    as_sign,
    elliptic_gamma,
    euler_gamma_c,
    hyper_s,
    hyperbolic_gamma,
    p_const,
    s_fn,
    trig_gamma,
)
from .operators import check_chamber, sqrt_along_vertical

DEFAULT_D = 0.2 + 0.1j


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to build, plus the shift constants derived from params.

    ``delta`` only matters in the trigonometric regime, where it selects
    ``alpha = a_{-delta}``.  ``flip_delta`` negates the centering constant
    and is used solely by the mutation test of the harness.
    """

    family: str = "A2"
    regime: Regime = Regime.ELLIPTIC
    d: complex = DEFAULT_D
    delta: int = 1
    flip_delta: bool = False

    def __post_init__(self):
        if self.family not in ("A2", "A3"):
            raise ValueError("family must be 'A2' or 'A3'")
        object.__setattr__(self, "regime", Regime.parse(self.regime))
        object.__setattr__(self, "delta", as_sign(self.delta))
        object.__setattr__(self, "d", complex(self.d))

    def alpha(self, params: ModularParams) -> float:
        return params.a_delta(-self.delta)

    def delta2(self, params: ModularParams) -> complex:
        return 1j * (params.a_plus + params.a_minus) / 6

    def delta3(self, params: ModularParams) -> complex:
        return 1j * (params.a_plus + params.a_minus) / 4

    def delta_t2(self, params: ModularParams) -> complex:
        return 1j * self.alpha(params) / 6 - np.pi / (3 * params.r)

    def delta_t3(self, params: ModularParams) -> complex:
        return 1j * self.alpha(params) / 4 - np.pi / (4 * params.r)

    def center(self, params: ModularParams) -> complex:
        if self.regime is Regime.TRIGONOMETRIC:
            val = self.delta_t2(params) if self.family == "A2" else self.delta_t3(params)
        elif self.regime in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
            val = self.delta2(params) if self.family == "A2" else self.delta3(params)
        else:
            raise ValueError("the rational regime has no S-kernel")
        return -val if self.flip_delta else val


def gamma_function(regime, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG,
                   alpha: float | None = None):
    """Vectorized gamma function ``z -> G(z)`` of the given regime."""
    regime = Regime.parse(regime)
    if regime is Regime.ELLIPTIC:
        return lambda z: np.asarray(elliptic_gamma(params, z, cfg))
    if regime is Regime.HYPERBOLIC:
        return lambda z: np.asarray(hyperbolic_gamma(params.a_plus, params.a_minus, z, cfg))
    if regime is Regime.TRIGONOMETRIC:
        al = params.a_minus if alpha is None else alpha
        return lambda z: np.asarray(trig_gamma(params.r, al, z, cfg))
    raise ValueError("the rational regime has no gamma-product kernel")


def _full(x):
    return np.asarray(x, dtype=complex)


def s2_kernel(spec: KernelSpec, v, w, z, params: ModularParams,
              cfg: EvalConfig = DEFAULT_CONFIG):
    """``prod_{k,l,m} G(v_k + w_l + z_m - delta_2)`` (27 factors)."""
    v, w, z = _full(v), _full(w), _full(z)
    gam = gamma_function(spec.regime, params, cfg, spec.alpha(params))
    args = (v[..., :, None, None] + w[..., None, :, None] + z[..., None, None, :]
            - spec.center(params))
    vals = gam(args.reshape(args.shape[:-3] + (-1,)))
    out = np.prod(vals, axis=-1)
    return complex(out) if out.ndim == 0 else out


def s3_kernel(spec: KernelSpec, d, v, w, params: ModularParams,
              cfg: EvalConfig = DEFAULT_CONFIG):
    """``prod_{k,l} G(v_k + w_l - delta_3 + d) G(v_k + w_l - delta_3 - d)`` (32 factors)."""
    v, w = _full(v), _full(w)
    d = complex(d)
    gam = gamma_function(spec.regime, params, cfg, spec.alpha(params))
    base = v[..., :, None] + w[..., None, :] - spec.center(params)
    args = np.stack([base + d, base - d], axis=-1)
    vals = gam(args.reshape(args.shape[:-3] + (-1,)))
    out = np.prod(vals, axis=-1)
    return complex(out) if out.ndim == 0 else out


def _s_pair(regime: Regime, params: ModularParams, cfg: EvalConfig):
    if regime is Regime.ELLIPTIC:
        return (lambda y: np.asarray(s_fn(params, 1, y, cfg)),
                lambda y: np.asarray(s_fn(params, -1, y, cfg)))
    if regime is Regime.HYPERBOLIC:
        return (lambda y: hyper_s(params.a_plus, y), lambda y: hyper_s(params.a_minus, y))
    raise ValueError("weight functions exist only in the elliptic and hyperbolic regimes")


def _arity(family: str) -> int:
    if family not in ("A2", "A3"):
        raise ValueError("family must be 'A2' or 'A3'")
    return 3 if family == "A2" else 4


def weight_factors(family: str, regime, params: ModularParams,
                   cfg: EvalConfig = DEFAULT_CONFIG):
    """Constant and per-pair factor functions whose product is ``W``."""
    regime = Regime.parse(regime)
    n = _arity(family)
    sp, sm = _s_pair(regime, params, cfg)
    if regime is Regime.ELLIPTIC:
        const = (p_const(params, 1, cfg) * p_const(params, -1, cfg)) ** (n * (n - 1) // 2)
        factors = []
        for j, k in combinations(range(n), 2):
            factors.append(lambda x, j=j, k=k: sp(x[..., j] - x[..., k]))
            factors.append(lambda x, j=j, k=k: sm(x[..., j] - x[..., k]))
    else:
        const = 1.0
        factors = [lambda x, j=j, k=k: 4 * sp(x[..., j] - x[..., k]) * sm(x[..., j] - x[..., k])
                   for j, k in combinations(range(n), 2)]
    return const, factors


def weight(family: str, regime, x, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG):
    """Weight function ``W(x)`` in its product-of-``s`` form."""
    x = _full(x)
    const, factors = weight_factors(family, regime, params, cfg)
    out = const
    for fac in factors:
        out = out * fac(x)
    out = np.asarray(out)
    return complex(out) if out.ndim == 0 else out


def weight_gamma_form(family: str, regime, x, params: ModularParams,
                      cfg: EvalConfig = DEFAULT_CONFIG):
    """``prod_{j<k} G(x_j - x_k + ia) G(-(x_j - x_k) + ia)``; oracle for :func:`weight`."""
    regime = Regime.parse(regime)
    if regime not in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
        raise ValueError("weight functions exist only in the elliptic and hyperbolic regimes")
    x = _full(x)
    n = _arity(family)
    gam = gamma_function(regime, params, cfg)
    diffs = np.stack([x[..., j] - x[..., k] for j, k in combinations(range(n), 2)], axis=-1)
    args = np.concatenate([diffs + 1j * params.a, -diffs + 1j * params.a], axis=-1)
    out = np.prod(gam(args), axis=-1)
    return complex(out) if out.ndim == 0 else out


def weight_root(family: str, regime, x, params: ModularParams,
                cfg: EvalConfig = DEFAULT_CONFIG, power: float = 0.5):
    """``W(x)^{power}`` for ``power = +-1/2`` with the positive root on the chamber.

    Points off the real axis are reached by continuing each factor from
    ``Re x``, which must lie in the ordered chamber.
    """
    regime = Regime.parse(regime)
    x = _full(x)
    check_chamber(x.real, regime, params)
    const, factors = weight_factors(family, regime, params, cfg)
    root = np.sqrt(const)
    for fac in factors:
        root = root * sqrt_along_vertical(fac, x)
    if power == 0.5:
        out = np.asarray(root)
    elif power == -0.5:
        if np.any(np.abs(root) < cfg.pole_guard):
            raise PoleProximityError("weight root vanishes")
        out = np.asarray(1 / root)
    else:
        raise ValueError("power must be 1/2 or -1/2")
    return complex(out) if out.ndim == 0 else out


def dressed_kernel(family: str, regime, *args, params: ModularParams,
                   cfg: EvalConfig = DEFAULT_CONFIG, d=DEFAULT_D):
    """``K_2 = (W(v)W(w)W(z))^{1/2} S_2`` or ``K_3 = (W(v)W(w))^{1/2} S_3``.

    Arguments are ``(v, w, z)`` for ``A2`` and ``(v, w)`` for ``A3``; the real
    parts of each vector must be strictly ordered.
    """
    regime = Regime.parse(regime)
    spec = KernelSpec(family, regime, d)
    if family == "A2":
        v, w, z = (_full(a) for a in args)
        root = (weight_root(family, regime, v, params, cfg)
                * weight_root(family, regime, w, params, cfg)
                * weight_root(family, regime, z, params, cfg))
        out = np.asarray(root) * np.asarray(s2_kernel(spec, v, w, z, params, cfg))
    else:
        v, w = (_full(a) for a in args)
        root = (np.asarray(weight_root(family, regime, v, params, cfg))
                * np.asarray(weight_root(family, regime, w, params, cfg)))
        out = root * np.asarray(s3_kernel(spec, d, v, w, params, cfg))
    return complex(out) if out.ndim == 0 else out


def toda_kernel(kind: str, sign, x, y, params: ModularParams,
                cfg: EvalConfig = DEFAULT_CONFIG):
    """Dual Toda kernels.

    ``kind='rel'``: ``prod_{j,k} G(tau (x_j - y_k))`` with the hyperbolic G.
    ``kind='nonrel'``: ``prod_{j,k} Gamma((x_j - y_k) / (i alpha))^sigma`` with
    ``alpha = a_-``.  The Euler-gamma argument is divided by ``i alpha`` so
    that the unit imaginary shift of the operator moves it by one.
    """
    sign = as_sign(sign)
    x, y = _full(x), _full(y)
    diff = x[..., :, None] - y[..., None, :]
    diff = diff.reshape(diff.shape[:-2] + (-1,))
    if kind == "rel":
        vals = np.asarray(hyperbolic_gamma(params.a_plus, params.a_minus, sign * diff, cfg))
    elif kind == "nonrel":
        vals = np.asarray(euler_gamma_c(diff / (1j * params.a_minus), cfg.pole_guard)) ** sign
    else:
        raise ValueError("kind must be 'rel' or 'nonrel'")
    out = np.prod(vals, axis=-1)
    return complex(out) if out.ndim == 0 else out


def toda_kernel_literal_nonrel(sign, x, y, params: ModularParams):
    """``prod Gamma((x_j - y_k)/alpha)^sigma`` exactly as first written (real scaling)."""
    sign = as_sign(sign)
    x, y = _full(x), _full(y)
    diff = (x[..., :, None] - y[..., None, :]).reshape(x.shape[:-1] + (-1,))
    out = np.prod(np.asarray(euler_gamma_c(diff / params.a_minus)) ** sign, axis=-1)
    return complex(out) if out.ndim == 0 else out
