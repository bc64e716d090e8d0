"""Sampled numerical suites for every identity, and the suite registry."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from ..errors import GammaKernelError, PoleProximityError, SamplingExhaustedError
from ..gamma import (
    DEFAULT_CONFIG,
    EvalConfig,
    ModularParams,
    Regime,
    elliptic_gamma,
    elliptic_gamma_series,
    gamma_e_bridge,
    hyper_c,
    hyper_s,
    hyperbolic_gamma,
    p_const,
    s_fn,
    theta_R,
    trig_gamma,
)
from ..kernels import (
    DEFAULT_D,
    KernelSpec,
    dressed_kernel,
    s2_kernel,
    s3_kernel,
    toda_kernel,
    weight,
    weight_gamma_form,
    weight_root,
)
from ..operators import (
    A2_CYCLES,
    A3_CYCLES,
    _a2_coefficient,
    _a3_coefficient,
    apply,
    build_a2,
    build_a3,
    build_b_c,
    build_h2,
    build_h3,
)
from . import reduced as rd
from .reports import FAILURE_FLOOR, IDENTITY, INEQUALITY, RECORD, IdentityReport, SubCheck, scaled_error
from .residues import PoleCatalog, residue_probe
from .sampling import MAX_REJECTIONS, SamplePlan, collect

A3_ELLIPTIC_LABEL = "numeric evidence beyond paper's proof"
SPACING_FLOOR = 0.02


@dataclass(frozen=True)
class SuiteContext:
    """Everything a suite needs: parameters, tolerances and sampling choices."""

    params: ModularParams = field(default_factory=ModularParams)
    cfg: EvalConfig = DEFAULT_CONFIG
    seed: int = 42
    n_points: int = 100
    mu: complex = 0.3
    mu_prime: complex = 0.41 + 0.2j
    d: complex = DEFAULT_D
    unconstrained: bool = False
    mutate: bool = False
    tol: Optional[float] = None

    def plan(self, regime, constrained: bool = True, **overrides) -> SamplePlan:
        return SamplePlan.default(regime, self.params, n_points=self.n_points,
                                  rng_seed=self.seed, constrained=constrained, **overrides)

    def count(self, base: int) -> int:
        """Suite-specific point counts scale with ``n_points`` (100 is the reference)."""
        return max(1, round(base * self.n_points / 100))

    def thr(self, default: float) -> float:
        return default if self.tol is None else self.tol

    def echo(self) -> dict:
        def pair(z):
            z = complex(z)
            return [z.real, z.imag]

        return {"r": self.params.r, "a_plus": self.params.a_plus, "a_minus": self.params.a_minus,
                "mu": pair(self.mu), "mu_prime": pair(self.mu_prime), "d": pair(self.d)}


def _context(ctx, plan, params, cfg) -> SuiteContext:
    """Fold the explicit ``plan``/``params``/``cfg`` arguments into a context."""
    ctx = SuiteContext() if ctx is None else ctx
    changes = {}
    if params is not None:
        changes["params"] = params
    if cfg is not None:
        changes["cfg"] = cfg
    if plan is not None:
        changes.update(seed=plan.rng_seed, n_points=plan.n_points)
    return replace(ctx, **changes) if changes else ctx


def _sign(delta) -> str:
    return "+" if delta > 0 else "-"


def _fmt(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:g}"
    if z.real == 0:
        return f"{z.imag:g}i"
    return f"{z.real:g}{z.imag:+g}i"


def _report(ctx: SuiteContext, name: str, subs, label: str = "", **metadata) -> IdentityReport:
    n = max((s.errors.size for s in subs), default=0)
    return IdentityReport(name, ctx.echo(), ctx.seed, n, list(subs), label, dict(metadata))


def _sub(name, threshold, points, values, mode=IDENTITY, note=""):
    """Build a subcheck from ``(lhs, rhs)`` or ``(total, 0, scale)`` values."""
    if len(values) == 3:
        total, zero, scale = values
        err = scaled_error(np.asarray(total) - np.asarray(zero), scale)
        return SubCheck(name, threshold, points, total, np.broadcast_to(zero, np.shape(total)),
                        err, mode, note)
    return SubCheck.compare(name, threshold, points, values[0], values[1], mode, note)


def _measure(ctx, plan, salt, draw, evaluate, name, threshold, mode=IDENTITY, n=None, note=""):
    pts, vals = collect(plan, salt, draw, evaluate, ctx.cfg, n)
    return _sub(name, threshold, pts, vals, mode, note)


def _stack_draw(plan: SamplePlan, sizes, constrained: bool):
    def draw(rng):
        return np.concatenate([plan.vector(rng, n, constrained) for n in sizes])
    return draw


def _split(points, sizes):
    out, start = [], 0
    for n in sizes:
        out.append(points[:, start : start + n])
        start += n
    return out


# ---------------------------------------------------------------------------
# Gamma functions


def check_gamma_core(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                     cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Reflection, modular invariance, conjugation and the difference equations."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    sw = p.swapped()
    r = p.r
    plan = ctx.plan(Regime.HYPERBOLIC, imag_window=(-0.5 * p.a, 0.5 * p.a))
    thr = ctx.thr(1e-10)
    draw = lambda rng: plan.coords(rng, 1)
    n = max(ctx.n_points, 100)

    def G(z, cfg, params=p):
        return np.asarray(elliptic_gamma(params, z, cfg))

    def H(z, cfg, params=p, ladder=None):
        return np.asarray(hyperbolic_gamma(params.a_plus, params.a_minus, z, cfg, ladder))

    checks = {
        "elliptic reflection": lambda z, c: (G(z, c) * G(-z, c), np.ones_like(z)),
        "elliptic modular invariance": lambda z, c: (G(z, c), G(z, c, sw)),
        "elliptic conjugation": lambda z, c: (np.conj(G(z, c)), G(-np.conj(z), c)),
        "elliptic log-series vs product": lambda z, c: (np.asarray(elliptic_gamma_series(p, z, c)), G(z, c)),
        "elliptic gamma_e bridge": lambda z, c: (
            np.asarray(gamma_e_bridge(np.exp(-2 * r * p.a_plus), np.exp(-2 * r * p.a_minus),
                                      np.exp(-r * (p.a_plus + p.a_minus) + 2j * r * z), c)), G(z, c)),
        "elliptic ratio over ia": lambda z, c: (
            G(z + 1j * p.a, c),
            p_const(p, 1, c) * p_const(p, -1, c) * np.asarray(s_fn(p, 1, z, c))
            * np.asarray(s_fn(p, -1, z, c)) * G(z - 1j * p.a, c)),
        "hyperbolic reflection": lambda z, c: (H(z, c) * H(-z, c), np.ones_like(z)),
        "hyperbolic modular invariance": lambda z, c: (H(z, c), H(z, c, sw)),
        "hyperbolic conjugation": lambda z, c: (np.conj(H(z, c)), H(-np.conj(z), c)),
        "hyperbolic unit modulus": lambda z, c: (np.abs(H(z.real, c)) + 0j, np.ones_like(z)),
    }
    for delta in (1, -1):
        ad = p.a_delta(delta)
        checks[f"elliptic difference equation delta={_sign(delta)}"] = (
            lambda z, c, ad=ad, delta=delta: (
                G(z + 0.5j * ad, c),
                np.asarray(theta_R(p, -delta, z, c)) * G(z - 0.5j * ad, c)))
        checks[f"hyperbolic difference equation delta={_sign(delta)}"] = (
            lambda z, c, ad=ad, delta=delta: (
                H(z + 0.5j * ad, c), 2 * hyper_c(p.a_delta(-delta), z) * H(z - 0.5j * ad, c)))
        checks[f"theta difference equation delta={_sign(delta)}"] = (
            lambda z, c, ad=ad, delta=delta: (
                np.asarray(theta_R(p, delta, z + 0.5j * ad, c)),
                -np.exp(-2j * r * z) * np.asarray(theta_R(p, delta, z - 0.5j * ad, c))))
        checks[f"s-function difference equation delta={_sign(delta)}"] = (
            lambda z, c, ad=ad, delta=delta: (
                np.asarray(s_fn(p, delta, z + 0.5j * ad, c)),
                -np.exp(-2j * r * z) * np.asarray(s_fn(p, delta, z - 0.5j * ad, c))))
    alpha = p.a_minus
    checks["trigonometric difference equation"] = lambda z, c: (
        np.asarray(trig_gamma(r, alpha, z + 0.5j * alpha, c)),
        (1 - np.exp(2j * r * z)) * np.asarray(trig_gamma(r, alpha, z - 0.5j * alpha, c)))

    subs = []
    for name, fn in checks.items():
        subs.append(_measure(ctx, plan, f"gamma-core/{name}", draw,
                             lambda pts, c, fn=fn: fn(pts[:, 0], c), name, thr, n=n))
    # continuation ladder: both step directions must agree beyond the strip
    far = ctx.plan(Regime.HYPERBOLIC, imag_window=(0.9 * p.a, 1.5 * p.a))
    subs.append(_measure(
        ctx, far, "gamma-core/ladder", lambda rng: far.coords(rng, 1) * rng.choice([1, -1]),
        lambda pts, c: (H(pts[:, 0], c, ladder=1), H(pts[:, 0], c, ladder=-1)),
        "hyperbolic ladder consistency", ctx.thr(1e-9), n=n))
    return _report(ctx, "gamma-core", subs)


# ---------------------------------------------------------------------------
# Kernel identities


def _kernel_evaluator(ctx, family, regime, delta, mu, constrained, trig_prefactor=True):
    p = ctx.params
    spec = KernelSpec(family, regime, ctx.d, delta=delta, flip_delta=ctx.mutate)
    n = 3 if family == "A2" else 4
    slots = 3 if family == "A2" else 2

    def evaluate(pts, cfg):
        vecs = _split(pts, [n] * slots)
        if family == "A2":
            op = build_a2(regime, delta, mu, constrained, p, cfg, trig_prefactor)
            kern = lambda *a: s2_kernel(spec, *a, p, cfg)
        else:
            op = build_a3(regime, delta, constrained, p, cfg, trig_prefactor)
            kern = lambda *a: s3_kernel(spec, ctx.d, *a, p, cfg)
        out = []
        for slot in range(slots):
            def f(y, slot=slot):
                args = list(vecs)
                args[slot] = y
                return kern(*args)
            out.append(np.asarray(apply(op, f, vecs[slot])))
        return tuple(out)

    return evaluate, n, slots


_SLOT_NAMES = "vwz"


def check_kernel_identity(family: str, regime, plan: Optional[SamplePlan] = None,
                          params: Optional[ModularParams] = None, cfg: Optional[EvalConfig] = None,
                          *, ctx: Optional[SuiteContext] = None, name: Optional[str] = None,
                          trig_prefactor: bool = True) -> IdentityReport:
    """Operator in each variable set applied to the kernel, compared pairwise.

    Runs both signs of delta and, for A2, both default couplings.  Points
    are always constrained; only the count and seed of ``plan`` are used.
    """
    ctx = _context(ctx, plan, params, cfg)
    regime = Regime.parse(regime)
    name = name or f"{family.lower()}-{regime.value}-kernel"
    mus = (ctx.mu, ctx.mu_prime) if family == "A2" else (None,)
    thr = ctx.thr(1e-8)
    subs = []
    for mu in mus:
        for delta in (1, -1):
            evaluate, n, slots = _kernel_evaluator(ctx, family, regime, delta, mu, True, trig_prefactor)
            plan = ctx.plan(regime)
            tag = f"delta={_sign(delta)}" + ("" if mu is None else f" mu={_fmt(mu)}")
            pts, vals = collect(plan, f"{name}/{tag}", _stack_draw(plan, [n] * slots, True),
                                evaluate, ctx.cfg)
            for i, j in combinations(range(slots), 2):
                subs.append(SubCheck.compare(f"{tag} {_SLOT_NAMES[i]}~{_SLOT_NAMES[j]}",
                                             thr, pts, vals[i], vals[j]))
    label = A3_ELLIPTIC_LABEL if (family == "A3" and regime is Regime.ELLIPTIC) else ""
    meta = {"mutated_center": True} if ctx.mutate else {}
    return _report(ctx, name, subs, label, **meta)


def check_unconstrained_failure(family: str, regime, plan: Optional[SamplePlan] = None,
                                params: Optional[ModularParams] = None, cfg: Optional[EvalConfig] = None,
                                *, ctx: Optional[SuiteContext] = None,
                                name: Optional[str] = None) -> IdentityReport:
    """Certify that the kernel identity fails without the zero-sum constraint.

    PASS means at least 95% of the points show a discrepancy above the
    failure floor.  A ``plan`` with ``constrained=True`` runs the same
    certification on constrained points, where it is expected to FAIL.
    """
    constrained = False if plan is None else plan.constrained
    ctx = _context(ctx, plan, params, cfg)
    regime = Regime.parse(regime)
    name = name or f"{family.lower()}-{regime.value}-unconstrained"
    subs = []
    for delta in (1, -1):
        mu = ctx.mu if family == "A2" else None
        evaluate, n, slots = _kernel_evaluator(ctx, family, regime, delta, mu, constrained)
        plan = ctx.plan(regime, constrained=constrained)
        tag = f"delta={_sign(delta)}"
        pts, vals = collect(plan, f"{name}/{tag}", _stack_draw(plan, [n] * slots, constrained),
                            evaluate, ctx.cfg)
        subs.append(SubCheck.compare(f"{tag} v~w differ", FAILURE_FLOOR, pts, vals[0], vals[1],
                                     INEQUALITY))
    return _report(ctx, name, subs, constrained_points=constrained)


def check_trig_prefactor_necessity(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                                   cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Dropping the exponential prefactors from the trigonometric operators breaks the identity."""
    ctx = _context(ctx, plan, params, cfg)
    subs = []
    for family in ("A2", "A3"):
        evaluate, n, slots = _kernel_evaluator(ctx, family, Regime.TRIGONOMETRIC, 1,
                                               ctx.mu if family == "A2" else None, True, False)
        plan = ctx.plan(Regime.TRIGONOMETRIC)
        pts, vals = collect(plan, f"trig-prefactor-necessity/{family}",
                            _stack_draw(plan, [n] * slots, True), evaluate, ctx.cfg)
        subs.append(SubCheck.compare(f"{family} without prefactor: v~w differ", FAILURE_FLOOR,
                                     pts, vals[0], vals[1], INEQUALITY))
    return _report(ctx, "trig-prefactor-necessity", subs)


def check_trig_degeneration(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                            cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Hyperbolic coefficients at ``a_+ = -i pi/r + eps`` approach the trigonometric ones."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    eps = 1e-8
    a_lim = -1j * np.pi / p.r + eps
    plan = ctx.plan(Regime.TRIGONOMETRIC)
    subs = []
    for family in ("A2", "A3"):
        n = 3 if family == "A2" else 4
        if family == "A2":
            trig = build_a2(Regime.TRIGONOMETRIC, 1, ctx.mu, True, p, ctx.cfg, trig_prefactor=False)
            hyp = [_a2_coefficient(Regime.HYPERBOLIC, j, k, l, None, 0, ctx.mu, a_lim, p.r,
                                   ctx.cfg, False) for j, k, l in A2_CYCLES]
        else:
            trig = build_a3(Regime.TRIGONOMETRIC, 1, True, p, ctx.cfg, trig_prefactor=False)
            hyp = [_a3_coefficient(Regime.HYPERBOLIC, cyc, None, 0, a_lim, p.r, ctx.cfg, False)
                   for cyc in A3_CYCLES]

        def evaluate(pts, cfg, trig=trig, hyp=hyp, n=n):
            # c -> cos and s -> i sin, so the ratios pick up i^{-2} (A2) or i^{-3} (A3)
            sgn = -1.0 if n == 3 else 1j
            lhs = np.stack([np.asarray(h(pts)) for h in hyp], axis=-1).ravel()
            rhs = np.stack([sgn * np.asarray(t.coefficient(pts)) for t in trig.terms], axis=-1).ravel()
            return lhs, rhs

        pts, vals = collect(plan, f"trig-degeneration/{family}",
                            _stack_draw(plan, [n], True), evaluate, ctx.cfg, ctx.count(20))
        pts = np.repeat(pts, n, axis=0)
        subs.append(_sub(f"{family} coefficients", ctx.thr(1e-6), pts, vals))
    return _report(ctx, "trig-degeneration", subs)


# ---------------------------------------------------------------------------
# Reduced forms and the gamma-product reductions


def _free(x):
    return x[:, :-1]


def check_reduced_forms(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                        cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    ell = ctx.plan(Regime.ELLIPTIC)
    hyp = ctx.plan(Regime.HYPERBOLIC)
    thr = ctx.thr(1e-9)
    subs = []
    for mu in (ctx.mu, ctx.mu_prime):
        def ev(pts, cfg, mu=mu):
            v, w, z = _split(pts, [3, 3, 3])
            return (rd.a2_elliptic_left_free(_free(v), _free(w), _free(z), mu, p, cfg),
                    rd.a2_elliptic_right_free(_free(v), _free(w), _free(z), mu, p, cfg))
        subs.append(_measure(ctx, ell, f"reduced/a2e/{_fmt(mu)}", _stack_draw(ell, [3, 3, 3], True),
                             ev, f"A2 elliptic L_r = R_r mu={_fmt(mu)}", thr))

    def ev(pts, cfg):
        v, w, z = _split(pts, [3, 3, 3])
        return (rd.a2_elliptic_left_free(_free(v), _free(w), _free(z), ctx.mu, p, cfg),
                rd.a2_elliptic_left(v, w, z, ctx.mu, p, cfg))
    subs.append(_measure(ctx, ell, "reduced/a2e-forms", _stack_draw(ell, [3, 3, 3], True), ev,
                         "A2 elliptic free-coordinate form = general form", thr))

    def ev(pts, cfg):
        v, w, z = _split(pts, [3, 3, 3])
        return (rd.a2_elliptic_left(v, w, z, ctx.mu, p, cfg), rd.a2_elliptic_right(v, w, z, ctx.mu, p, cfg))
    subs.append(_measure(ctx, ell, "reduced/a2e-unconstrained", _stack_draw(ell, [3, 3, 3], False), ev,
                         "A2 elliptic L != R unconstrained", FAILURE_FLOOR, INEQUALITY))

    def ev(pts, cfg):
        v, w = _split(pts, [4, 4])
        return (rd.a3_elliptic_left_free(_free(v), _free(w), ctx.d, p, cfg),
                rd.a3_elliptic_right_free(_free(v), _free(w), ctx.d, p, cfg))
    subs.append(_measure(ctx, ell, "reduced/a3e", _stack_draw(ell, [4, 4], True), ev,
                         "A3 elliptic L_r = R_r", thr, note=A3_ELLIPTIC_LABEL))

    def ev(pts, cfg):
        v, w = _split(pts, [4, 4])
        return (rd.a3_elliptic_left(v, w, ctx.d, p, cfg), rd.a3_elliptic_right(v, w, ctx.d, p, cfg))
    subs.append(_measure(ctx, ell, "reduced/a3e-unconstrained", _stack_draw(ell, [4, 4], False), ev,
                         "A3 elliptic L != R unconstrained", FAILURE_FLOOR, INEQUALITY))

    for which, (left, right) in {"L = R": (rd.a3_hyperbolic_left, rd.a3_hyperbolic_right),
                                 "F_L = F_R": (rd.a3_hyperbolic_f_left, rd.a3_hyperbolic_f_right)}.items():
        def ev(pts, cfg, left=left, right=right):
            v, w = _split(pts, [4, 4])
            return left(v, w, ctx.d, p, cfg), right(v, w, ctx.d, p, cfg)
        subs.append(_measure(ctx, hyp, f"reduced/a3h/{which}", _stack_draw(hyp, [4, 4], True), ev,
                             f"A3 hyperbolic {which}", thr))
        subs.append(_measure(ctx, hyp, f"reduced/a3h-unconstrained/{which}",
                             _stack_draw(hyp, [4, 4], False), ev,
                             f"A3 hyperbolic {which.replace('=', '!=')} unconstrained",
                             FAILURE_FLOOR, INEQUALITY))

    def ev(pts, cfg):
        v, w, z = _split(pts, [3, 3, 3])
        return (rd.a2_hyperbolic_left(v, w, z, ctx.mu, p, cfg), rd.a2_hyperbolic_right(v, w, z, ctx.mu, p, cfg))
    subs.append(_measure(ctx, hyp, "reduced/a2h", _stack_draw(hyp, [3, 3, 3], True), ev,
                         "A2 hyperbolic L = R", thr))
    subs.append(_measure(ctx, hyp, "reduced/a2h-unconstrained", _stack_draw(hyp, [3, 3, 3], False), ev,
                         "A2 hyperbolic L != R unconstrained", FAILURE_FLOOR, INEQUALITY))
    return _report(ctx, "reduced-forms", subs)


def check_reduction_consistency(family: Optional[str] = None, regime=None,
                                plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                                cfg: Optional[EvalConfig] = None, *,
                                ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """``A S`` divided by the shared gamma product equals the theta/hyperbolic sum.

    ``family``/``regime`` restrict the run to one of the three reductions
    (A2 elliptic, A3 elliptic, A3 hyperbolic); by default all are checked.
    """
    ctx = _context(ctx, plan, params, cfg)
    regime = None if regime is None else Regime.parse(regime)
    wanted = lambda fam, reg: (family in (None, fam)) and (regime in (None, reg))
    p = ctx.params
    n = ctx.count(50)
    thr = ctx.thr(1e-9)
    subs = []
    ell = ctx.plan(Regime.ELLIPTIC, constrained=False)
    if wanted("A2", Regime.ELLIPTIC):
        subs.append(_measure(
            ctx, ell, "reduction/a2e", _stack_draw(ell, [3, 3, 3], False),
            lambda pts, cfg: rd.a2_elliptic_action_sides(*_split(pts, [3, 3, 3]), ctx.mu, p, cfg),
            "A2 elliptic", thr, n=n))
    for reg in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
        if not wanted("A3", reg):
            continue
        rplan = ctx.plan(reg, constrained=False)
        for sign, mode in ((-1, IDENTITY), (1, RECORD)):
            label = f"A3 {reg.value}" + ("" if sign < 0 else ", divisor with +delta_3 (does not match)")
            subs.append(_measure(
                ctx, rplan, f"reduction/a3/{reg.value}/{sign}", _stack_draw(rplan, [4, 4], False),
                lambda pts, cfg, reg=reg, sign=sign: rd.a3_action_sides(
                    reg, *_split(pts, [4, 4]), ctx.d, p, cfg, center_sign=sign),
                label, thr, mode, n=n))
    if not subs:
        raise ValueError(f"no gamma-product reduction for {family} {regime}")
    return _report(ctx, "reduction-consistency", subs)


# ---------------------------------------------------------------------------
# Multipliers and residues


def check_multipliers(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                      cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Quasi-periodicity of every summand under ``v1 -> v1 + i a_+``."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    r, ap = p.r, p.a_plus
    plan = ctx.plan(Regime.ELLIPTIC)
    thr = ctx.thr(1e-9)
    subs = []

    def shifted(v):
        v = v.copy()
        v[:, 0] += 1j * ap
        return v

    def a2(pts, cfg):
        v, w, z = (_free(x) for x in _split(pts, [3, 3, 3]))
        ratios = [fn(shifted(v), w, z, ctx.mu, p, cfg, True) / fn(v, w, z, ctx.mu, p, cfg, True)
                  for fn in (rd.a2_elliptic_left_free, rd.a2_elliptic_right_free)]
        want = np.exp(2j * r * (6j * ap + 6 * v[:, 1])) * np.exp(2j * r * 12 * v[:, 0])
        got = np.concatenate(ratios, axis=-1)
        return got.ravel(), np.repeat(want, got.shape[-1])

    pts, vals = collect(plan, "multipliers/a2", _stack_draw(plan, [3, 3, 3], True), a2, ctx.cfg)
    subs.append(_sub("A2 constrained: 6 summands share the multiplier", thr, np.repeat(pts, 6, axis=0), vals))

    def a3(pts, cfg):
        v, w = (_free(x) for x in _split(pts, [4, 4]))
        ratios = [fn(shifted(v), w, ctx.d, p, cfg, True) / fn(v, w, ctx.d, p, cfg, True)
                  for fn in (rd.a3_elliptic_left_free, rd.a3_elliptic_right_free)]
        want = (np.exp(2j * r * (6j * ap + 6 * v[:, 1] + 6 * v[:, 2]))
                * np.exp(2j * r * 12 * v[:, 0]))
        got = np.concatenate(ratios, axis=-1)
        return got.ravel(), np.repeat(want, got.shape[-1])

    pts, vals = collect(plan, "multipliers/a3", _stack_draw(plan, [4, 4], True), a3, ctx.cfg)
    subs.append(_sub("A3 constrained: 8 summands share the multiplier", thr, np.repeat(pts, 8, axis=0), vals))

    step = 0.05
    expected = np.array([2, 8, 8, 6, 6, 6], dtype=float)

    def exponents(pts, cfg):
        v, w, z = _split(pts, [3, 3, 3])

        def ratio(vv):
            return np.concatenate([fn(shifted(vv), w, z, ctx.mu, p, cfg, True) / fn(vv, w, z, ctx.mu, p, cfg, True)
                                   for fn in (rd.a2_elliptic_left, rd.a2_elliptic_right)], axis=-1)

        moved = v.copy()
        moved[:, 0] += step
        # the v1-independent factors cancel; what is left is exp(2 i r k step)
        k = np.log(ratio(moved) / ratio(v)) / (2j * r * step)
        return k, np.broadcast_to(expected, k.shape)

    pts, (k, want) = collect(plan, "multipliers/unconstrained", _stack_draw(plan, [3, 3, 3], False),
                             exponents, ctx.cfg)
    subs.append(_sub("A2 unconstrained exponents 2,8,8 / 6,6,6", thr, np.repeat(pts, 6, axis=0),
                     (k.ravel(), want.ravel())))
    subs.append(_sub("A2 unconstrained: first L and R exponents differ", FAILURE_FLOOR, pts,
                     (k[:, 0], k[:, 3]), INEQUALITY))
    return _report(ctx, "multipliers", subs)


def _draw_config(ctx, salt, index, make, catalog):
    rng = ctx.plan(Regime.ELLIPTIC).rng(salt, index)
    for _ in range(MAX_REJECTIONS + 1):
        g = make(rng)
        if catalog.min_spacing(g) >= SPACING_FLOOR:
            return g
    raise SamplingExhaustedError(f"{salt}: pole spacing stays below {SPACING_FLOOR}")


def check_residue_cancellations(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                                cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Residues of the reduced-function difference at every catalogued pole."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    cfg = ctx.cfg
    plan = ctx.plan(Regime.ELLIPTIC)
    n_cfg = ctx.count(10)
    thr = ctx.thr(1e-8)
    cat2 = PoleCatalog.a2_elliptic(p)
    cat3 = PoleCatalog.a3_elliptic(p)

    def make2(rng):
        return {"v2": plan.coords(rng, 1)[0], "w": plan.vector(rng, 3, True),
                "z": plan.vector(rng, 3, True)}

    def make3(rng):
        v = plan.coords(rng, 2)
        return {"v2": v[0], "v3": v[1], "w": plan.vector(rng, 4, True), "d": ctx.d}

    def terms2(g):
        def f(v1):
            v = np.stack([v1, np.full_like(v1, g["v2"])], axis=-1)
            w = np.broadcast_to(g["w"][:2], v.shape)
            z = np.broadcast_to(g["z"][:2], v.shape)
            return np.concatenate([rd.a2_elliptic_left_free(v, w, z, ctx.mu, p, cfg, True),
                                   -rd.a2_elliptic_right_free(v, w, z, ctx.mu, p, cfg, True)], axis=-1).T
        return f

    def terms3(g):
        def f(v1):
            v = np.stack([v1, np.full_like(v1, g["v2"]), np.full_like(v1, g["v3"])], axis=-1)
            w = np.broadcast_to(g["w"][:3], v.shape)
            return np.concatenate([rd.a3_elliptic_left_free(v, w, ctx.d, p, cfg, True),
                                   -rd.a3_elliptic_right_free(v, w, ctx.d, p, cfg, True)], axis=-1).T
        return f

    def point(g):
        return np.concatenate([np.atleast_1d(g[k]) for k in ("v2", "v3", "w", "z") if k in g])

    cancel = {}
    doubling = []
    dep2 = []
    dep3 = []
    cancel3 = {}
    for i in range(n_cfg):
        g = _draw_config(ctx, "residues/a2", i, make2, cat2)
        f = terms2(g)
        rho = 0.25 * cat2.min_spacing(g)
        for lab, loc in cat2.w_independent_poles:
            res = residue_probe(f, loc(g), rho)
            res2 = residue_probe(f, loc(g), rho, 128)
            scale = np.abs(res).sum()
            cancel.setdefault(lab, []).append((point(g), res.sum(), scale))
            doubling.append((point(g), np.abs(res2 - res).sum(), scale))
        res = residue_probe(f, cat2.w_dependent_poles[0][1](g), rho)
        dep2.append((point(g), res[:3].sum(), -res[3:].sum()))

        g3 = _draw_config(ctx, "residues/a3", i, make3, cat3)
        f3 = terms3(g3)
        rho3 = 0.25 * cat3.min_spacing(g3)
        for lab, loc in cat3.w_independent_poles:
            res = residue_probe(f3, loc(g3), rho3)
            cancel3.setdefault(lab, []).append((point(g3), res.sum(), np.abs(res).sum()))
        res = residue_probe(f3, cat3.w_dependent_poles[0][1](g3), rho3)
        dep3.append((point(g3), res[:4].sum(), -res[4:].sum()))

    def scaled(name, rows, threshold, mode=IDENTITY, note=""):
        pts = np.array([r[0] for r in rows])
        return _sub(name, threshold, pts, (np.array([r[1] for r in rows]), 0j,
                                           np.array([r[2] for r in rows])), mode, note)

    def paired(name, rows, threshold, note=""):
        pts = np.array([r[0] for r in rows])
        return SubCheck.compare(name, threshold, pts, [r[1] for r in rows], [r[2] for r in rows],
                                note=note)

    subs = [scaled(f"A2 residue sum at v1={lab}", rows, thr) for lab, rows in cancel.items()]
    subs.append(scaled("A2 contour doubling 64 -> 128 nodes", doubling, 1e-12))
    subs.append(paired("A2 L_r and R_r residues at v1=-w1-z1-c", dep2, thr))

    # unconstrained: residue at v1 = v2 + 2t does not cancel
    unc = []
    for i in range(n_cfg):
        rng = plan.rng("residues/unconstrained", i)
        for _ in range(MAX_REJECTIONS + 1):
            v23 = plan.coords(rng, 2)
            w, z = plan.coords(rng, 3), plan.coords(rng, 3)
            centre = v23[0] + 1j * p.a_plus
            others = np.concatenate([[v23[1], v23[1] + 1j * p.a_plus],
                                     (-w[:, None] - z[None, :] - 1j * p.a_plus / 3).ravel(),
                                     (-w[:, None] - z[None, :] + 2j * p.a_plus / 3).ravel()])
            gap = np.min(np.abs(others - centre))
            if gap >= 4 * SPACING_FLOOR:
                break
        else:
            raise SamplingExhaustedError("residues/unconstrained: no admissible configuration")

        def f(v1, v23=v23, w=w, z=z):
            v = np.stack([v1, np.full_like(v1, v23[0]), np.full_like(v1, v23[1])], axis=-1)
            ww, zz = np.broadcast_to(w, v.shape), np.broadcast_to(z, v.shape)
            return np.concatenate([rd.a2_elliptic_left(v, ww, zz, ctx.mu, p, cfg, True),
                                   -rd.a2_elliptic_right(v, ww, zz, ctx.mu, p, cfg, True)], axis=-1).T

        res = residue_probe(f, centre, 0.25 * min(gap, 0.4))
        unc.append((np.concatenate([v23, w, z]), res.sum(), np.abs(res).sum()))
    subs.append(scaled("A2 unconstrained residue at v1=v2+2t is nonzero", unc, FAILURE_FLOOR, INEQUALITY))

    subs += [scaled(f"A3 residue sum at v1={lab}", rows, thr) for lab, rows in cancel3.items()]
    subs.append(paired("A3 L_r and R_r residues at v1=-w1-c+d", dep3, thr, A3_ELLIPTIC_LABEL))
    return _report(ctx, "residues", subs)


# ---------------------------------------------------------------------------
# Hyperbolic identities from the A3 proof


def lemma34_terms(x, w, cfun, sfun, guard_tol: float = 0.0):
    """Summands of the three ratio identities; ``w`` must sum to zero."""
    ratios = []
    for m, k, l, n in A3_CYCLES:
        num = cfun(w[..., k] - w[..., l]) * cfun(w[..., l] - w[..., n]) * cfun(w[..., n] - w[..., k])
        den = sfun(w[..., m] - w[..., k]) * sfun(w[..., m] - w[..., l]) * sfun(w[..., m] - w[..., n])
        if np.any(np.abs(den) < guard_tol):
            raise PoleProximityError("coincident w coordinates")
        ratios.append(num / den)
    ratios = np.stack(ratios, axis=-1)
    cm = cfun(x[..., None] - 2 * w)
    sp = sfun(x[..., None] + 2 * w)
    triples = np.stack([sp[..., a] * sp[..., b] * sp[..., c] for a, b, c in combinations(range(4), 3)],
                       axis=-1)
    return {
        "zero": ratios,
        "linear": (ratios * cm, sp),
        "cubic": (ratios * cm * sp**2, -triples),
    }


def check_lemma34(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                  cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    ap = p.a_plus
    plan = ctx.plan(Regime.HYPERBOLIC)
    n = ctx.count(200)
    thr = ctx.thr(1e-10)
    forms = {"a_+ scaled": (lambda y: hyper_c(ap, y), lambda y: hyper_s(ap, y)),
             "plain cosh/sinh": (np.cosh, np.sinh)}
    subs = []
    for tag, (cf, sf) in forms.items():
        def ev_zero(pts, cfg, cf=cf, sf=sf):
            terms = lemma34_terms(pts[:, 0], pts[:, 1:], cf, sf, cfg.pole_guard)["zero"]
            return terms.sum(axis=-1), 0j, np.abs(terms).sum(axis=-1)

        def make(kind, cf=cf, sf=sf):
            def ev(pts, cfg):
                lhs, rhs = lemma34_terms(pts[:, 0], pts[:, 1:], cf, sf, cfg.pole_guard)[kind]
                return (lhs.sum(axis=-1) - rhs.sum(axis=-1), 0j,
                        np.abs(lhs).sum(axis=-1) + np.abs(rhs).sum(axis=-1))
            return ev

        draw = lambda rng: np.concatenate([plan.coords(rng, 1), plan.vector(rng, 4, True)])
        subs.append(_measure(ctx, plan, f"lemma34/{tag}/zero", draw, ev_zero,
                             f"{tag}: sum of ratios vanishes", thr, n=n))
        subs.append(_measure(ctx, plan, f"lemma34/{tag}/linear", draw, make("linear"),
                             f"{tag}: ratio-weighted cosh sum", thr, n=n))
        subs.append(_measure(ctx, plan, f"lemma34/{tag}/cubic", draw, make("cubic"),
                             f"{tag}: ratio-weighted cubic sum", thr, n=n))

    def ev_b(pts, cfg):
        x, w = pts[:, 0], pts[:, 1:]
        b = 1j * hyper_c(ap, 2 * complex(ctx.d))
        ratios = lemma34_terms(x, w, lambda y: hyper_c(ap, y), lambda y: hyper_s(ap, y),
                               cfg.pole_guard)["zero"]
        cm = hyper_c(ap, x[:, None] - 2 * w)
        sp = hyper_s(ap, x[:, None] + 2 * w)
        lhs = np.prod(b + sp, axis=-1) - np.prod(b - sp, axis=-1)
        rhs = 2 * b * np.sum(ratios * (b**2 - sp**2) * cm, axis=-1)
        return lhs, rhs

    draw = lambda rng: np.concatenate([plan.coords(rng, 1), plan.vector(rng, 4, True)])
    subs.append(_measure(ctx, plan, "lemma34/b-form", draw, ev_b,
                         "product difference with b = i c(2d)", thr, n=n))
    return _report(ctx, "lemma34", subs)


# ---------------------------------------------------------------------------
# Commutation and the ratio identity behind it


def _test_functions(ctx, n, salt):
    rng = np.random.default_rng([ctx.seed, 7, n, len(salt)])
    ks = rng.uniform(-2 * ctx.params.r, 2 * ctx.params.r, size=(3, 3, n))
    return [lambda y, k=k: np.sum(np.exp(np.asarray(y) @ k.T), axis=-1) for k in ks]


def _commutator_check(ctx, name, plan, n, op_a, op_b, n_points):
    fns = _test_functions(ctx, n, name)

    def ev(pts, cfg):
        a, b = op_a(cfg), op_b(cfg)
        ab = [apply(a, lambda y, f=f: apply(b, f, y), pts) for f in fns]
        ba = [apply(b, lambda y, f=f: apply(a, f, y), pts) for f in fns]
        return np.stack(ab, axis=-1).ravel(), np.stack(ba, axis=-1).ravel()

    pts, vals = collect(plan, f"commutation/{name}", lambda rng: plan.vector(rng, n, False), ev,
                        ctx.cfg, n_points)
    return _sub(name, ctx.thr(1e-9), np.repeat(pts, len(fns), axis=0), vals)


def raid_sides(u, v, w, mu, mu_p, params: ModularParams, cfg: EvalConfig = DEFAULT_CONFIG):
    """Both sides of the ratio identity that underlies commutativity."""
    R = lambda y: np.asarray(theta_R(params, 1, y, cfg))
    t = 0.5j * params.a_plus

    def side(m1, m2):
        first = (R(u + m1) * R(u - m1) * R(v + w + m2) * R(v + w - m2)
                 / (R(u - v + t) * R(v - u + w + t)))
        second = (R(v + m1) * R(v - m1) * R(u + w + m2) * R(u + w - m2)
                  / (R(v - u + t) * R(u - v + w + t)))
        return first + second

    dens = [R(u - v + t), R(v - u + w + t), R(v - u + t), R(u - v + w + t)]
    if any(np.any(np.abs(d) < cfg.pole_guard) for d in dens):
        raise PoleProximityError("ratio identity denominator near zero")
    return side(mu, mu_p), side(mu_p, mu)


def check_commutation(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                      cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    n = ctx.count(30)
    subs = []
    ell = ctx.plan(Regime.ELLIPTIC, constrained=False)
    hyp = ctx.plan(Regime.HYPERBOLIC, constrained=False)
    for da in (1, -1):
        for db in (1, -1):
            tag = f"({_sign(da)},{_sign(db)})"
            subs.append(_commutator_check(
                ctx, f"A2 elliptic {tag}", ell, 3,
                lambda cfg, da=da: build_a2(Regime.ELLIPTIC, da, ctx.mu, False, p, cfg),
                lambda cfg, db=db: build_a2(Regime.ELLIPTIC, db, ctx.mu_prime, False, p, cfg), n))
            subs.append(_commutator_check(
                ctx, f"A2 hyperbolic {tag}", hyp, 3,
                lambda cfg, da=da: build_a2(Regime.HYPERBOLIC, da, ctx.mu, False, p, cfg),
                lambda cfg, db=db: build_a2(Regime.HYPERBOLIC, db, ctx.mu_prime, False, p, cfg), n))
    for regime, plan in ((Regime.ELLIPTIC, ell), (Regime.HYPERBOLIC, hyp)):
        subs.append(_commutator_check(
            ctx, f"A3 {regime.value} (+,-)", plan, 4,
            lambda cfg, regime=regime: build_a3(regime, 1, False, p, cfg),
            lambda cfg, regime=regime: build_a3(regime, -1, False, p, cfg), n))

    plan = ctx.plan(Regime.ELLIPTIC, constrained=False)
    subs.append(_measure(
        ctx, plan, "commutation/raid", lambda rng: plan.coords(rng, 5),
        lambda pts, cfg: raid_sides(*pts.T, p, cfg), "ratio identity, random mu, mu'",
        ctx.thr(1e-9), n=ctx.count(100)))
    return _report(ctx, "commutation", subs)


# ---------------------------------------------------------------------------
# Hamiltonians, weights and dressed kernels


def _ordered_draw(ctx, regime, n, constrained, margin):
    p = ctx.params
    half = 0.9 * np.pi / (2 * p.r) if Regime.parse(regime) is Regime.ELLIPTIC else 1.5

    def draw(rng):
        for _ in range(10 * MAX_REJECTIONS):
            x = rng.uniform(-half, half, n)
            if constrained:
                x = x - x.mean()
            x = np.sort(x)[::-1]
            if np.all(-np.diff(x) > 2 * margin) and x[0] < half and x[-1] > -half:
                return x + 0j
        raise SamplingExhaustedError("no ordered chamber point found")

    return draw


def check_sa_forms(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                   cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Split-form Hamiltonians against the weight-conjugated operators."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    n = ctx.count(50)
    thr = ctx.thr(1e-9)
    subs = []
    mu_abs = abs(complex(ctx.mu))
    for family, arity in (("A2", 3), ("A3", 4)):
        for regime in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
            # hyperbolic split form carries the constant i^{N-1} relative to the conjugated operator
            kappa = 1.0 if regime is Regime.ELLIPTIC else 1j ** (arity - 1)
            mus = (mu_abs, 1j * mu_abs) if family == "A2" else (0.0,)
            plan = ctx.plan(regime, constrained=False)
            fns = _test_functions(ctx, arity, f"sa/{family}")
            for delta in (1, -1):
                for mu in mus:
                    tag = f"{family} {regime.value} delta={_sign(delta)}" + (
                        f" mu={_fmt(mu)}" if family == "A2" else "")

                    def ops(cfg, delta=delta, mu=mu, regime=regime, family=family):
                        if family == "A2":
                            return (build_h2(regime, delta, mu, p, cfg),
                                    build_a2(regime, delta, mu, False, p, cfg))
                        return build_h3(regime, delta, p, cfg), build_a3(regime, delta, False, p, cfg)

                    def ev(pts, cfg, ops=ops, family=family, regime=regime, kappa=kappa, fns=fns):
                        h, a = ops(cfg)
                        lhs, rhs = [], []
                        for f in fns:
                            lhs.append(apply(h, f, pts))
                            g = lambda y, f=f: weight_root(family, regime, y, p, cfg, -0.5) * f(y)
                            rhs.append(kappa * weight_root(family, regime, pts, p, cfg) * apply(a, g, pts))
                        return np.stack(lhs, axis=-1).ravel(), np.stack(rhs, axis=-1).ravel()

                    def witness(pts, cfg, ops=ops):
                        h, _ = ops(cfg)
                        prods = np.stack([np.asarray(t.coefficient(pts)) * np.asarray(t.right_factor(pts))
                                          for t in h.terms], axis=-1).ravel()
                        return prods, np.abs(prods) + 0j

                    draw = _ordered_draw(ctx, regime, arity, False, plan.reject_margin)
                    pts, vals = collect(plan, f"sa/{tag}", draw, ev, ctx.cfg, n)
                    subs.append(_sub(f"{tag}: H = W^1/2 A W^-1/2", thr, np.repeat(pts, 3, axis=0), vals))
                    pts, vals = collect(plan, f"sa-witness/{tag}", draw, witness, ctx.cfg, n)
                    subs.append(_sub(f"{tag}: split coefficients real, product >= 0", thr,
                                     np.repeat(pts, arity, axis=0), vals))
            # weight: s-product form against the gamma form, and positivity on the chamber
            wplan = ctx.plan(regime, constrained=False)
            subs.append(_measure(
                ctx, wplan, f"weights/{family}/{regime.value}",
                lambda rng, wplan=wplan, arity=arity: wplan.vector(rng, arity, False),
                lambda pts, cfg, family=family, regime=regime: (
                    weight(family, regime, pts, p, cfg), weight_gamma_form(family, regime, pts, p, cfg)),
                f"{family} {regime.value} weight: product form = gamma form", ctx.thr(1e-10), n=n))
            draw = _ordered_draw(ctx, regime, arity, False, wplan.reject_margin)
            subs.append(_measure(
                ctx, wplan, f"weights-positive/{family}/{regime.value}", draw,
                lambda pts, cfg, family=family, regime=regime: (
                    np.asarray(weight(family, regime, pts, p, cfg)),
                    np.abs(weight(family, regime, pts, p, cfg)) + 0j),
                f"{family} {regime.value} weight positive on chamber", ctx.thr(1e-10), n=n))
    return _report(ctx, "sa-forms", subs,
                   hyperbolic_phase="H f = i^(N-1) W^1/2 A W^-1/2 f in the hyperbolic regime")


def check_dressed_kernels(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                          cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    """Hamiltonians in each variable set applied to the weight-dressed kernels."""
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    n = ctx.count(50)
    thr = ctx.thr(1e-8)
    subs = []
    for family, arity, slots in (("A2", 3, 3), ("A3", 4, 2)):
        for regime in (Regime.ELLIPTIC, Regime.HYPERBOLIC):
            plan = ctx.plan(regime)
            one = _ordered_draw(ctx, regime, arity, True, plan.reject_margin)
            draw = lambda rng, one=one, slots=slots: np.concatenate([one(rng) for _ in range(slots)])
            for delta in (1, -1):
                def ev(pts, cfg, family=family, regime=regime, arity=arity, slots=slots, delta=delta):
                    vecs = _split(pts, [arity] * slots)
                    h = (build_h2(regime, delta, ctx.mu, p, cfg) if family == "A2"
                         else build_h3(regime, delta, p, cfg))
                    out = []
                    for slot in range(slots):
                        def f(y, slot=slot):
                            args = list(vecs)
                            args[slot] = y
                            return dressed_kernel(family, regime, *args, params=p, cfg=cfg, d=ctx.d)
                        out.append(np.asarray(apply(h, f, vecs[slot])))
                    return tuple(out)

                tag = f"{family} {regime.value} delta={_sign(delta)}"
                pts, vals = collect(plan, f"dressed/{tag}", draw, ev, ctx.cfg, n)
                for i, j in combinations(range(slots), 2):
                    subs.append(SubCheck.compare(f"{tag} {_SLOT_NAMES[i]}~{_SLOT_NAMES[j]}", thr, pts,
                                                 vals[i], vals[j]))
    return _report(ctx, "dressed-kernels", subs)


# ---------------------------------------------------------------------------
# Rational regime and Toda kernels


def check_rational(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                   cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    plan = ctx.plan(Regime.RATIONAL, constrained=False)
    subs = []
    for arity in (3, 4):
        def ev(pts, cfg, arity=arity):
            terms = []
            for j in range(arity):
                den = np.prod([pts[:, j] - pts[:, k] for k in range(arity) if k != j], axis=0)
                if np.any(np.abs(den) < cfg.pole_guard):
                    raise PoleProximityError("coincident coordinates")
                terms.append(1 / den)
            terms = np.stack(terms, axis=-1)
            return terms.sum(axis=-1), 0j, np.abs(terms).sum(axis=-1)

        subs.append(_measure(ctx, plan, f"rational/{arity}", lambda rng, arity=arity: plan.vector(rng, arity, False),
                             ev, f"N={arity} reciprocal-product sum vanishes", ctx.thr(1e-12),
                             n=ctx.count(200)))

        def ev_op(pts, cfg, arity=arity):
            op = (build_a2(Regime.RATIONAL, 1, 0, False, p, cfg) if arity == 3
                  else build_a3(Regime.RATIONAL, 1, False, p, cfg))
            terms = [np.asarray(t.coefficient(pts)) for t in op.terms]
            return (apply(op, lambda y: np.ones(y.shape[:-1], dtype=complex), pts), 0j,
                    np.sum(np.abs(terms), axis=0))

        subs.append(_measure(ctx, plan, f"rational-op/{arity}", lambda rng, arity=arity: plan.vector(rng, arity, False),
                             ev_op, f"N={arity} rational operator annihilates constants",
                             ctx.thr(1e-12), n=ctx.count(200)))
        for sigma in (1, -1):
            def ev_toda(pts, cfg, arity=arity, sigma=sigma):
                x, y = _split(pts, [arity, arity])
                op = (build_a2(Regime.RATIONAL, 1, 0, False, p, cfg) if arity == 3
                      else build_a3(Regime.RATIONAL, 1, False, p, cfg))
                lhs = apply(op, lambda u: toda_kernel("nonrel", sigma, u, -y, p, cfg), x)
                rhs = apply(op, lambda u: toda_kernel("nonrel", sigma, x, -u, p, cfg), y)
                return lhs, rhs

            subs.append(_measure(ctx, plan, f"toda-nonrel/{arity}/{sigma}",
                                 _stack_draw(plan, [arity, arity], False), ev_toda,
                                 f"N={arity} nonrelativistic Toda kernel sigma={_sign(sigma)}",
                                 ctx.thr(1e-8), n=ctx.count(50)))
    return _report(ctx, "rational", subs,
                   toda_argument="Gamma((x_j - y_k) / (i a_-))")


def check_toda_relativistic(plan: Optional[SamplePlan] = None, params: Optional[ModularParams] = None,
                            cfg: Optional[EvalConfig] = None, *, ctx: Optional[SuiteContext] = None) -> IdentityReport:
    ctx = _context(ctx, plan, params, cfg)
    p = ctx.params
    plan = ctx.plan(Regime.HYPERBOLIC, constrained=False)
    n = ctx.count(50)
    subs = []
    for delta in (1, -1):
        for tau in (1, -1):
            def ev(pts, cfg, delta=delta, tau=tau):
                x, y = _split(pts, [3, 3])
                b, c = build_b_c(delta, p, cfg)
                out = []
                for op in (b, c):
                    out.append(apply(op, lambda u: toda_kernel("rel", tau, u, -y, p, cfg), x))
                    out.append(apply(op, lambda u: toda_kernel("rel", tau, x, -u, p, cfg), y))
                return tuple(out)

            tag = f"delta={_sign(delta)} tau={_sign(tau)}"
            pts, vals = collect(plan, f"toda-rel/{tag}", _stack_draw(plan, [3, 3], False), ev, ctx.cfg, n)
            subs.append(SubCheck.compare(f"B {tag}", ctx.thr(1e-8), pts, vals[0], vals[1]))
            if tau > 0:
                subs.append(SubCheck.compare(f"C {tag} (observed to hold)", ctx.thr(1e-8), pts,
                                             vals[2], vals[3], RECORD))
            else:
                subs.append(SubCheck.compare(f"C {tag} fails", FAILURE_FLOOR, pts, vals[2], vals[3],
                                             INEQUALITY))
        fns = _test_functions(ctx, 3, "toda-split")

        def ev_split(pts, cfg, delta=delta):
            a = build_a2(Regime.HYPERBOLIC, delta, ctx.mu, False, p, cfg)
            b, c = build_b_c(delta, p, cfg)
            cm = hyper_c(p.a_delta(delta), 2 * complex(ctx.mu))
            lhs = np.stack([2 * apply(a, f, pts) for f in fns], axis=-1).ravel()
            rhs = np.stack([cm * apply(b, f, pts) + apply(c, f, pts) for f in fns], axis=-1).ravel()
            return lhs, rhs

        pts, vals = collect(plan, f"toda-split/{delta}", lambda rng: plan.vector(rng, 3, False),
                            ev_split, ctx.cfg, n)
        subs.append(_sub(f"2A = c(2mu) B + C delta={_sign(delta)}", ctx.thr(1e-10),
                         np.repeat(pts, 3, axis=0), vals))
    return _report(ctx, "toda-relativistic", subs)


# ---------------------------------------------------------------------------
# Registry


@dataclass(frozen=True)
class Suite:
    name: str
    ref: str
    threshold: float
    runner: Callable[[SuiteContext], IdentityReport]
    unconstrained_variant: Optional[Callable[[SuiteContext], IdentityReport]] = None

    def run(self, ctx: SuiteContext) -> IdentityReport:
        start = time.perf_counter()
        fn = self.runner
        meta = {}
        if ctx.unconstrained:
            if self.unconstrained_variant is not None:
                fn = self.unconstrained_variant
                meta["path"] = "unconstrained failure certification"
            else:
                meta["path"] = "unconstrained flag not applicable; ran the default checks"
        try:
            report = fn(ctx)
        except (GammaKernelError, ValueError) as exc:
            report = IdentityReport(self.name, ctx.echo(), ctx.seed, 0, [], error=f"{type(exc).__name__}: {exc}")
        report.suite_name = self.name
        report.metadata.update(meta)
        report.metadata["ref"] = self.ref
        report.runtime = time.perf_counter() - start
        return report


def _kernel(family, regime):
    return lambda ctx: check_kernel_identity(family, regime, ctx=ctx, name=f"{family.lower()}-{regime}-kernel")


def _uncon(family, regime):
    return lambda ctx: check_unconstrained_failure(family, regime, ctx=ctx,
                                                   name=f"{family.lower()}-{regime}-unconstrained")


SUITES = (
    Suite("gamma-core", "gamma function identities", 1e-10, lambda ctx: check_gamma_core(ctx=ctx)),
    Suite("a2-elliptic-kernel", "Cor 2.3", 1e-8, _kernel("A2", "elliptic"), _uncon("A2", "elliptic")),
    Suite("a2-elliptic-unconstrained", "Prop 2.1", FAILURE_FLOOR, _uncon("A2", "elliptic")),
    Suite("a3-elliptic-kernel", "numeric evidence (A3 elliptic)", 1e-8, _kernel("A3", "elliptic"),
          _uncon("A3", "elliptic")),
    Suite("a3-elliptic-unconstrained", "Prop 3.1", FAILURE_FLOOR, _uncon("A3", "elliptic")),
    Suite("a3-hyperbolic-kernel", "Thm 3.3", 1e-8, _kernel("A3", "hyperbolic"), _uncon("A3", "hyperbolic")),
    Suite("a3-hyperbolic-unconstrained", "Prop 3.2", FAILURE_FLOOR, _uncon("A3", "hyperbolic")),
    Suite("a2-hyperbolic-kernel", "hyperbolic A2 limit", 1e-8, _kernel("A2", "hyperbolic"),
          _uncon("A2", "hyperbolic")),
    Suite("a2-hyperbolic-unconstrained", "Prop 4.4", FAILURE_FLOOR, _uncon("A2", "hyperbolic")),
    Suite("a2-trigonometric-kernel", "trigonometric A2 kernel", 1e-8, _kernel("A2", "trigonometric")),
    Suite("a3-trigonometric-kernel", "trigonometric A3 kernel", 1e-8, _kernel("A3", "trigonometric")),
    Suite("trig-prefactor-necessity", "trigonometric prefactor", FAILURE_FLOOR,
          lambda ctx: check_trig_prefactor_necessity(ctx=ctx)),
    Suite("trig-degeneration", "hyperbolic to trigonometric limit", 1e-6, lambda ctx: check_trig_degeneration(ctx=ctx)),
    Suite("reduced-forms", "Thm 2.2", 1e-9, lambda ctx: check_reduced_forms(ctx=ctx)),
    Suite("reduction-consistency", "gamma-product reduction", 1e-9, lambda ctx: check_reduction_consistency(ctx=ctx)),
    Suite("multipliers", "quasi-periodicity multipliers", 1e-9, lambda ctx: check_multipliers(ctx=ctx)),
    Suite("residues", "Lemma 2.4, Lemma 2.5, Prop 2.1", 1e-8, lambda ctx: check_residue_cancellations(ctx=ctx)),
    Suite("lemma34", "Lemma 3.4", 1e-10, lambda ctx: check_lemma34(ctx=ctx)),
    Suite("commutation", "Prop 4.1", 1e-9, lambda ctx: check_commutation(ctx=ctx)),
    Suite("sa-forms", "Prop 4.2, Prop 4.6", 1e-9, lambda ctx: check_sa_forms(ctx=ctx)),
    Suite("dressed-kernels", "dressed kernel identities", 1e-8, lambda ctx: check_dressed_kernels(ctx=ctx)),
    Suite("rational", "rational limit and Toda kernels", 1e-12, lambda ctx: check_rational(ctx=ctx)),
    Suite("toda-relativistic", "relativistic Toda kernels", 1e-8, lambda ctx: check_toda_relativistic(ctx=ctx)),
)

REGISTRY = {s.name: s for s in SUITES}


def run_suite(name: str, ctx: SuiteContext) -> IdentityReport:
    try:
        suite = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}") from None
    return suite.run(ctx)


def _run_named(args):
    name, ctx = args
    return run_suite(name, ctx)


def run_all(ctx: SuiteContext = SuiteContext(), names=None, jobs: int = 1):
    """Run suites (all by default) and return their reports in registry order.

    Each suite samples from generators keyed by its own name and point
    index, so running them in parallel gives identical results.
    """
    names = list(REGISTRY) if names is None else list(names)
    for name in names:
        if name not in REGISTRY:
            raise ValueError(f"unknown suite {name!r}")
    if jobs <= 1 or len(names) <= 1:
        return [run_suite(n, ctx) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_named, [(n, ctx) for n in names]))
