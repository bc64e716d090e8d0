"""Analytic difference operators as finite sums of (coefficient, shift) terms.

A term acts on a function ``f`` of ``N`` complex coordinates as

    coefficient(x) * f(x + shift) * right_factor(x + shift)

where ``right_factor`` is only used by the split-form Hamiltonians
``V^{1/2} exp(shift) V^{1/2}``.  All coefficients are vectorized: ``x`` may
carry leading batch axes, the last axis holding the coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ChamberError, PoleProximityError
from .gamma import (
    DEFAULT_CONFIG,
    EvalConfig,
    ModularParams,
    Regime,
    as_sign,
    hyper_c,
    hyper_s,
    p_const,
    s_fn,
    theta_R,
)

A2_CYCLES = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
A3_CYCLES = ((0, 1, 2, 3), (1, 2, 3, 0), (2, 3, 0, 1), (3, 0, 1, 2))


@dataclass(frozen=True)
class ShiftVector:
    """Purely imaginary coordinate shift whose components sum to zero."""

    components: tuple

    def __post_init__(self):
        comps = tuple(complex(c) for c in self.components)
        object.__setattr__(self, "components", comps)
        scale = max(1.0, max(abs(c) for c in comps))
        if abs(sum(comps)) > 1e-13 * scale:
            raise ValueError("shift components must sum to zero")

    @classmethod
    def cyclic(cls, unit: complex, pattern, position: int) -> "ShiftVector":
        """``unit * pattern`` with the leading entry moved to ``position``."""
        n = len(pattern)
        comps = [0j] * n
        for i, p in enumerate(pattern):
            comps[(position + i) % n] = unit * p
        return cls(tuple(comps))

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=complex)

    def __len__(self):
        return len(self.components)


@dataclass(frozen=True)
class ConstrainedPoint:
    """Point on the zero-sum hyperplane, stored by its first ``N-1`` coordinates.

    The last coordinate is always recomputed as minus the sum of the free
    ones, so shifting never drifts off the hyperplane.
    """

    free: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "free", np.asarray(self.free, dtype=complex))

    @classmethod
    def from_full(cls, x, atol: float = 1e-10) -> "ConstrainedPoint":
        x = np.asarray(x, dtype=complex)
        scale = 1.0 + float(np.max(np.abs(x))) if x.size else 1.0
        if np.any(np.abs(x.sum(axis=-1)) > atol * scale):
            raise ValueError("coordinates do not sum to zero")
        return cls(x[..., :-1])

    @property
    def n(self) -> int:
        return self.free.shape[-1] + 1

    @property
    def full(self) -> np.ndarray:
        return np.concatenate([self.free, -self.free.sum(axis=-1, keepdims=True)], axis=-1)

    def shifted(self, shift: ShiftVector) -> "ConstrainedPoint":
        return ConstrainedPoint(self.free + shift.as_array()[:-1])

    def __array__(self, dtype=None, copy=None):
        full = self.full
        return full if dtype is None else full.astype(dtype)


@dataclass(frozen=True)
class OperatorTerm:
    coefficient: Callable[[np.ndarray], np.ndarray]
    shift: ShiftVector
    right_factor: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class DifferenceOperator:
    arity: int
    regime: Regime
    terms: tuple
    label: str = ""
    constrained: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if len(term.shift) != self.arity:
                raise ValueError("shift length does not match arity")


def guard(den, cfg: EvalConfig):
    """Raise :class:`PoleProximityError` if any denominator is too small."""
    den = np.asarray(den)
    if np.any(np.abs(den) < cfg.pole_guard):
        raise PoleProximityError("coefficient denominator within pole_guard of zero")
    return den


def _point(op: DifferenceOperator, x):
    if isinstance(x, ConstrainedPoint):
        if x.n != op.arity:
            raise ValueError(f"point has {x.n} coordinates, operator needs {op.arity}")
        return x
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != op.arity:
        raise ValueError(f"point has {x.shape[-1]} coordinates, operator needs {op.arity}")
    if op.constrained:
        return ConstrainedPoint.from_full(x)
    return x


def apply(op: DifferenceOperator, f: Callable, x):
    """``sum_m coeff_m(x) f(x + shift_m)`` (times right factors at ``x + shift_m``)."""
    x = _point(op, x)
    base = x.full if isinstance(x, ConstrainedPoint) else x
    total = np.zeros(base.shape[:-1], dtype=complex)
    for term in op.terms:
        if isinstance(x, ConstrainedPoint):
            moved = x.shifted(term.shift).full
        else:
            moved = base + term.shift.as_array()
        val = np.asarray(term.coefficient(base)) * np.asarray(f(moved))
        if term.right_factor is not None:
            val = val * np.asarray(term.right_factor(moved))
        total = total + val
    return complex(total) if total.ndim == 0 else total


def commutator_apply(op_a: DifferenceOperator, op_b: DifferenceOperator, f: Callable, x):
    """``(A B - B A) f`` at ``x``, composing by nested :func:`apply`."""
    if op_a.arity != op_b.arity:
        raise ValueError("operators act on different numbers of coordinates")
    ab = apply(op_a, lambda y: apply(op_b, f, y), x)
    ba = apply(op_b, lambda y: apply(op_a, f, y), x)
    return ab - ba


# ---------------------------------------------------------------------------
# Regime-specific coefficient ingredients


def _shift_param(regime: Regime, delta: int, params: ModularParams) -> float:
    """Shift scale: ``a_{-delta}``; in the trigonometric/rational limits this is alpha."""
    return params.a_delta(-delta)


def _check_builder(regime, params):
    regime = Regime.parse(regime)
    if not isinstance(params, ModularParams):
        raise TypeError("params must be ModularParams")
    return regime


def build_a2(regime, delta, mu, constrained: bool, params: ModularParams,
             cfg: EvalConfig = DEFAULT_CONFIG, trig_prefactor: bool = True) -> DifferenceOperator:
    """The three-term ``A_2`` operator family in the given regime.

    ``constrained=True`` expects :class:`ConstrainedPoint` arguments; in the
    elliptic regime the coefficients are then written in the two free
    coordinates.  The rational operator ignores ``mu``.  ``trig_prefactor``
    exists only to demonstrate that the ``exp(-9irx_j)`` factors are needed.
    """
    regime = _check_builder(regime, params)
    delta = as_sign(delta)
    mu = complex(mu)
    r = params.r
    ad = params.a_delta(delta)
    t = 0.5j * ad
    unit = 1j * _shift_param(regime, delta, params) / 3
    if regime is Regime.TRIGONOMETRIC and not constrained:
        raise ValueError("unsupported combination: trigonometric operators are defined "
                         "only under the zero-sum constraint")

    def R(y):
        return np.asarray(theta_R(params, delta, y, cfg))

    coeffs = []
    if regime is Regime.ELLIPTIC and constrained:
        def c1(x):
            x1, x2 = x[..., 0], x[..., 1]
            den = guard(R(x1 - x2 - t) * R(2 * x1 + x2 - t), cfg)
            return R(x1 + 2 * x2 + mu) * R(x1 + 2 * x2 - mu) / den

        def c2(x):
            x1, x2 = x[..., 0], x[..., 1]
            den = guard(R(x1 + 2 * x2 - t) * R(x1 - x2 + t), cfg)
            return R(2 * x1 + x2 + mu) * R(2 * x1 + x2 - mu) / den

        def c3(x):
            x1, x2 = x[..., 0], x[..., 1]
            den = guard(R(2 * x1 + x2 + t) * R(x1 + 2 * x2 + t), cfg)
            return R(x1 - x2 + mu) * R(x1 - x2 - mu) / den

        coeffs = [c1, c2, c3]
    else:
        for j, k, l in A2_CYCLES:
            coeffs.append(_a2_coefficient(regime, j, k, l, R, t, mu, ad, r, cfg, trig_prefactor))
    terms = [OperatorTerm(c, ShiftVector.cyclic(unit, (2, -1, -1), m)) for m, c in enumerate(coeffs)]
    label = f"A2[{regime.value},{'+' if delta > 0 else '-'}]"
    return DifferenceOperator(3, regime, tuple(terms), label, bool(constrained))


def _a2_coefficient(regime, j, k, l, R, t, mu, ad, r, cfg, trig_prefactor):
    if regime is Regime.ELLIPTIC:
        def coeff(x):
            xj, xk, xl = x[..., j], x[..., k], x[..., l]
            den = guard(R(xj - xk - t) * R(xj - xl - t), cfg)
            return R(xk - xl + mu) * R(xk - xl - mu) / den
    elif regime is Regime.HYPERBOLIC:
        def coeff(x):
            xj, xk, xl = x[..., j], x[..., k], x[..., l]
            den = guard(hyper_s(ad, xj - xk) * hyper_s(ad, xj - xl), cfg)
            return hyper_c(ad, xk - xl + mu) * hyper_c(ad, xk - xl - mu) / den
    elif regime is Regime.TRIGONOMETRIC:
        def coeff(x):
            xj, xk, xl = x[..., j], x[..., k], x[..., l]
            den = guard(np.sin(r * (xj - xk)) * np.sin(r * (xj - xl)), cfg)
            val = np.cos(r * (xk - xl + mu)) * np.cos(r * (xk - xl - mu)) / den
            return np.exp(-9j * r * xj) * val if trig_prefactor else val
    else:
        def coeff(x):
            xj, xk, xl = x[..., j], x[..., k], x[..., l]
            return 1 / guard((xj - xk) * (xj - xl), cfg)
    return coeff


def build_a3(regime, delta, constrained: bool, params: ModularParams,
             cfg: EvalConfig = DEFAULT_CONFIG, trig_prefactor: bool = True) -> DifferenceOperator:
    """The four-term ``A_3`` operator in the given regime (no ``mu`` dependence)."""
    regime = _check_builder(regime, params)
    delta = as_sign(delta)
    r = params.r
    ad = params.a_delta(delta)
    t = 0.5j * ad
    unit = 1j * _shift_param(regime, delta, params) / 4
    if regime is Regime.TRIGONOMETRIC and not constrained:
        raise ValueError("unsupported combination: trigonometric operators are defined "
                         "only under the zero-sum constraint")

    def R(y):
        return np.asarray(theta_R(params, delta, y, cfg))

    if regime is Regime.ELLIPTIC and constrained:
        coeffs = _a3_constrained_elliptic(R, t, cfg)
    else:
        coeffs = [_a3_coefficient(regime, cyc, R, t, ad, r, cfg, trig_prefactor)
                  for cyc in A3_CYCLES]
    terms = [OperatorTerm(c, ShiftVector.cyclic(unit, (3, -1, -1, -1), m))
             for m, c in enumerate(coeffs)]
    label = f"A3[{regime.value},{'+' if delta > 0 else '-'}]"
    return DifferenceOperator(4, regime, tuple(terms), label, bool(constrained))


def _a3_coefficient(regime, cyc, R, t, ad, r, cfg, trig_prefactor):
    j, k, l, m = cyc

    if regime is Regime.ELLIPTIC:
        def coeff(x):
            xj = x[..., j]
            num = R(x[..., k] - x[..., l]) * R(x[..., l] - x[..., m]) * R(x[..., m] - x[..., k])
            den = R(xj - x[..., k] - t) * R(xj - x[..., l] - t) * R(xj - x[..., m] - t)
            return num / guard(den, cfg)
    elif regime is Regime.HYPERBOLIC:
        def coeff(x):
            xj = x[..., j]
            num = (hyper_c(ad, x[..., k] - x[..., l]) * hyper_c(ad, x[..., l] - x[..., m])
                   * hyper_c(ad, x[..., m] - x[..., k]))
            den = (hyper_s(ad, xj - x[..., k]) * hyper_s(ad, xj - x[..., l])
                   * hyper_s(ad, xj - x[..., m]))
            return num / guard(den, cfg)
    elif regime is Regime.TRIGONOMETRIC:
        def coeff(x):
            xj = x[..., j]
            num = (np.cos(r * (x[..., k] - x[..., l])) * np.cos(r * (x[..., l] - x[..., m]))
                   * np.cos(r * (x[..., m] - x[..., k])))
            den = (np.sin(r * (xj - x[..., k])) * np.sin(r * (xj - x[..., l]))
                   * np.sin(r * (xj - x[..., m])))
            val = num / guard(den, cfg)
            return np.exp(-8j * r * xj) * val if trig_prefactor else val
    else:
        def coeff(x):
            xj = x[..., j]
            den = (xj - x[..., k]) * (xj - x[..., l]) * (xj - x[..., m])
            return 1 / guard(den, cfg)
    return coeff


def _a3_constrained_elliptic(R, t, cfg):
    # coefficients written in the three free coordinates x1, x2, x3

    def c1(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        num = R(x2 - x3) * R(x1 + x2 + 2 * x3) * R(x1 + 2 * x2 + x3)
        den = R(x1 - x2 - t) * R(x1 - x3 - t) * R(2 * x1 + x2 + x3 - t)
        return num / guard(den, cfg)

    def c2(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        num = R(x1 + x2 + 2 * x3) * R(2 * x1 + x2 + x3) * R(x1 - x3)
        den = R(-x1 + x2 - t) * R(x2 - x3 - t) * R(x1 + 2 * x2 + x3 - t)
        return num / guard(den, cfg)

    def c3(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        num = R(2 * x1 + x2 + x3) * R(x1 - x2) * R(x1 + 2 * x2 + x3)
        den = R(x3 - x1 - t) * R(x3 - x2 - t) * R(x1 + x2 + 2 * x3 - t)
        return num / guard(den, cfg)

    def c4(x):
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        num = R(x1 - x2) * R(x2 - x3) * R(x1 - x3)
        den = (R(-2 * x1 - x2 - x3 - t) * R(-x1 - 2 * x2 - x3 - t)
               * R(-x1 - x2 - 2 * x3 - t))
        return num / guard(den, cfg)

    return [c1, c2, c3, c4]


# ---------------------------------------------------------------------------
# Hamiltonians (split form) and the Toda decomposition


def sqrt_along_vertical(fn: Callable, y, n_samples: int = 32, max_samples: int = 4096):
    """Square root of ``fn(y)`` continued from the real point ``Re y``.

    ``fn(Re y)`` must be real positive; the root is followed along the
    vertical segment to ``y`` by unwrapping the phase of ``fn`` on a grid
    that is refined until consecutive phase steps are below 0.5 rad.
    """
    y = np.asarray(y, dtype=complex)
    base = y.real
    start = np.asarray(fn(base + 0j))
    if np.any(start.real <= 0) or np.any(np.abs(start.imag) > 1e-10 * np.abs(start)):
        raise ChamberError("square root base value is not positive")
    if not np.any(y.imag):
        return np.sqrt(start.real) + 0j
    n = n_samples
    while True:
        tau = np.linspace(0.0, 1.0, n + 1).reshape((n + 1,) + (1,) * y.ndim)
        path = np.asarray(fn(base + 1j * tau * y.imag))
        phase = np.angle(path)
        steps = np.diff(phase, axis=0)
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(steps)) < 0.5 or n >= max_samples:
            break
        n *= 4
    total = steps.sum(axis=0)
    end = path[-1]
    return np.sqrt(np.abs(end)) * np.exp(0.5j * total)


def _v_pairs(arity: int):
    # V_m: product over pairs (j, k), j < k, that contain m
    return [[(j, k) for j in range(arity) for k in range(j + 1, arity) if m in (j, k)]
            for m in range(arity)]


def check_chamber(x, regime: Regime, params: ModularParams, margin: float = 0.0):
    """Strict ordering ``x_N < ... < x_1`` (inside ``(-pi/2r, pi/2r)`` when elliptic)."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        if np.any(np.abs(x.imag) > 0):
            raise ChamberError("point is not real")
        x = x.real
    if np.any(np.diff(x, axis=-1) >= -margin):
        raise ChamberError("not in ordered chamber")
    if regime is Regime.ELLIPTIC:
        half = np.pi / (2 * params.r)
        if np.any(x[..., 0] >= half) or np.any(x[..., -1] < -half):
            raise ChamberError("not in ordered chamber")


def _build_h(arity, regime, delta, mu, params, cfg):
    regime = Regime.parse(regime)
    if regime not in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
        raise ValueError("Hamiltonians exist only in the elliptic and hyperbolic regimes")
    delta = as_sign(delta)
    ad = params.a_delta(delta)
    ash = params.a_delta(-delta)

    if regime is Regime.ELLIPTIC:
        def sfun(y):
            return np.asarray(s_fn(params, delta, y, cfg))

        def numf(y):
            return np.asarray(theta_R(params, delta, y, cfg))

        pd = p_const(params, delta, cfg)
        pref = np.exp(-params.r * ash * (arity - 1) / 2) / pd ** (arity - 1)
    else:
        def sfun(y):
            return hyper_s(ad, y)

        def numf(y):
            return hyper_c(ad, y)

        pref = 1.0

    pairs = _v_pairs(arity)
    cycles = A2_CYCLES if arity == 3 else A3_CYCLES

    def make_v(m):
        def inv_v(y):
            out = 1.0
            for j, k in pairs[m]:
                out = out * sfun(y[..., j] - y[..., k])
            return out

        def left(x):
            check_chamber(x, regime, params, cfg.pole_guard)
            return 1 / np.sqrt(np.asarray(inv_v(x.real + 0j)).real)

        def right(y):
            # V^{1/2} at the shifted point, continued from the real chamber point
            root = 1.0
            for j, k in pairs[m]:
                root = root * sqrt_along_vertical(lambda u, j=j, k=k: sfun(u[..., j] - u[..., k]), y)
            return 1 / guard(root, cfg)

        return left, right

    terms = []
    unit = 1j * ash / (arity)
    pattern = (2, -1, -1) if arity == 3 else (3, -1, -1, -1)
    for m, cyc in enumerate(cycles):
        left_v, right_v = make_v(m)
        if arity == 3:
            _, k, l = cyc

            def num(x, k=k, l=l):
                d = x[..., k] - x[..., l]
                return numf(d + mu) * numf(d - mu)
        else:
            _, k, l, n = cyc

            def num(x, k=k, l=l, n=n):
                return (numf(x[..., k] - x[..., l]) * numf(x[..., l] - x[..., n])
                        * numf(x[..., n] - x[..., k]))

        def coeff(x, num=num, left_v=left_v):
            return pref * num(x) * left_v(x)

        terms.append(OperatorTerm(coeff, ShiftVector.cyclic(unit, pattern, m), right_v))
    name = "H2" if arity == 3 else "H3"
    return DifferenceOperator(arity, regime, tuple(terms),
                              f"{name}[{regime.value},{'+' if delta > 0 else '-'}]", False)


def build_h2(regime, delta, mu, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG):
    """Split-form ``A_2`` Hamiltonian ``sum_m N_m V_m^{1/2} exp(shift_m) V_m^{1/2}``.

    Must be applied at strictly ordered real points; the right factor
    ``V_m^{1/2}`` is continued from the real point to the shifted one.
    """
    return _build_h(3, regime, delta, complex(mu), params, cfg)


def build_h3(regime, delta, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG):
    """Split-form ``A_3`` Hamiltonian; see :func:`build_h2`."""
    return _build_h(4, regime, delta, 0j, params, cfg)


def build_b_c(delta, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG):
    """Hyperbolic ``(B_delta, C_delta)`` with ``2 A_2(mu) = c_delta(2 mu) B + C``."""
    delta = as_sign(delta)
    ad = params.a_delta(delta)
    unit = 1j * params.a_delta(-delta) / 3
    b_terms, c_terms = [], []
    for m, (j, k, l) in enumerate(A2_CYCLES):
        shift = ShiftVector.cyclic(unit, (2, -1, -1), m)

        def b(x, j=j, k=k, l=l):
            return 1 / guard(hyper_s(ad, x[..., j] - x[..., k]) * hyper_s(ad, x[..., j] - x[..., l]), cfg)

        def c(x, j=j, k=k, l=l, b=b):
            return hyper_c(ad, 2 * x[..., k] - 2 * x[..., l]) * b(x)

        b_terms.append(OperatorTerm(b, shift))
        c_terms.append(OperatorTerm(c, shift))
    sign = "+" if delta > 0 else "-"
    return (DifferenceOperator(3, Regime.HYPERBOLIC, tuple(b_terms), f"B[{sign}]"),
            DifferenceOperator(3, Regime.HYPERBOLIC, tuple(c_terms), f"C[{sign}]"))
