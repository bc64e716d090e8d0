"""Deterministic, pole-avoiding random sampling of test points."""
from __future__ import annotations

import zlib
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from ..errors import PoleProximityError, SamplingExhaustedError
from ..gamma import EvalConfig, ModularParams, Regime

MAX_REJECTIONS = 100


@dataclass(frozen=True)
class SamplePlan:
    """How many points to draw and where.

    Each point index gets its own generator seeded from
    ``(rng_seed, crc32(salt), index)``, so the sample set does not depend on
    evaluation order or on how points are split between workers.
    """

    n_points: int = 100
    rng_seed: int = 42
    real_window: tuple = (-1.0, 1.0)
    imag_window: tuple = (-0.0875, 0.0875)
    constrained: bool = True
    reject_margin: float = 0.0375

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be positive")
        lo, hi = self.real_window
        ilo, ihi = self.imag_window
        if not (np.isfinite([lo, hi, ilo, ihi]).all() and lo < hi and ilo <= ihi):
            raise ValueError("sampling windows must be finite, nonempty intervals")
        if not self.reject_margin > 0:
            raise ValueError("reject_margin must be positive")

    @classmethod
    def default(cls, regime, params: ModularParams, **overrides) -> "SamplePlan":
        """Windows appropriate for ``regime`` (elliptic: ``Re`` in ``(-pi/4r, pi/4r)``)."""
        regime = Regime.parse(regime)
        if regime is Regime.ELLIPTIC:
            half = np.pi / (4 * params.r)
        else:
            half = 1.0
        im = 0.1 * params.a
        base = dict(real_window=(-half, half), imag_window=(-im, im),
                    reject_margin=0.05 * min(params.a_plus, params.a_minus))
        base.update(overrides)
        return cls(**base)

    def with_points(self, n: int) -> "SamplePlan":
        return replace(self, n_points=n)

    def rng(self, salt: str, index: int) -> np.random.Generator:
        return np.random.default_rng([self.rng_seed, zlib.crc32(salt.encode()), index])

    def coords(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` independent complex coordinates from the windows."""
        re = rng.uniform(*self.real_window, size=n)
        im = rng.uniform(*self.imag_window, size=n)
        return re + 1j * im

    def vector(self, rng: np.random.Generator, n: int, constrained: Optional[bool] = None) -> np.ndarray:
        """A coordinate vector of length ``n``; zero-sum when constrained."""
        constrained = self.constrained if constrained is None else constrained
        if not constrained:
            return self.coords(rng, n)
        free = self.coords(rng, n - 1)
        return np.append(free, -free.sum())


def guarded_config(cfg: EvalConfig, plan: SamplePlan) -> EvalConfig:
    """``cfg`` with the pole guard raised to the plan's rejection margin."""
    return replace(cfg, pole_guard=max(cfg.pole_guard, plan.reject_margin))


def collect(plan: SamplePlan, salt: str, draw: Callable, evaluate: Callable,
            cfg: EvalConfig, n_points: Optional[int] = None):
    """Draw admissible points and evaluate them.

    ``draw(rng)`` returns one flat point; ``evaluate(points, cfg)`` maps a
    ``(P, D)`` array to a tuple of ``(P,)`` arrays and raises
    :class:`PoleProximityError` when any denominator falls below
    ``cfg.pole_guard``.  The whole batch is tried first; if it is rejected,
    points are retried one at a time and offending ones are redrawn from
    their own generators.
    """
    n = plan.n_points if n_points is None else n_points
    gcfg = guarded_config(cfg, plan)
    rngs = [plan.rng(salt, i) for i in range(n)]
    points = np.array([draw(g) for g in rngs])
    try:
        return points, evaluate(points, gcfg)
    except PoleProximityError:
        pass
    rows = []
    for i, g in enumerate(rngs):
        for _ in range(MAX_REJECTIONS + 1):
            try:
                rows.append(evaluate(points[i : i + 1], gcfg))
                break
            except PoleProximityError:
                points[i] = draw(g)
        else:
            raise SamplingExhaustedError(
                f"{salt}: no admissible point after {MAX_REJECTIONS} rejections (index {i})")
    values = tuple(np.concatenate([np.atleast_1d(row[k]) for row in rows]) for k in range(len(rows[0])))
    return points, values
