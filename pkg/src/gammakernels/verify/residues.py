"""Contour-integral residues and the pole sets of the reduced functions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..gamma import ModularParams


def residue_probe(f: Callable, center: complex, radius: float, n_nodes: int = 64) -> complex:
    """``(1/2 pi i) * contour integral of f`` over a circle, by the trapezoid rule.

    The rule converges geometrically for integrands analytic in an annulus
    around the circle, so ``radius`` must stay clear of every other pole.
    ``f`` is called once with the array of nodes.
    """
    theta = 2 * np.pi * np.arange(n_nodes) / n_nodes
    offset = radius * np.exp(1j * theta)
    vals = np.asarray(f(center + offset), dtype=complex)
    # dz = i * offset * dtheta, so the 2 pi i cancels down to a plain mean
    return complex(np.mean(vals * offset, axis=-1)) if vals.ndim == 1 else np.mean(vals * offset, axis=-1)


@dataclass(frozen=True)
class PoleCatalog:
    """Pole locations in ``v1`` of a reduced left/right function.

    Entries are ``(label, fn)`` with ``fn(config) -> complex``; ``config``
    holds the frozen variables (``v2``, ``v3``, ``w``, ``z``, ``d``) and
    every location is understood modulo the period lattice.
    """

    family: str
    w_independent_poles: tuple
    w_dependent_poles: tuple
    periods: tuple

    @classmethod
    def a2_elliptic(cls, params: ModularParams) -> "PoleCatalog":
        t = 0.5j * params.a_plus
        c = 1j * params.a_plus / 3
        omegas = (0.0, np.pi / (2 * params.r), t, t + np.pi / (2 * params.r))
        indep = [("v2", lambda g: g["v2"]), ("-2v2", lambda g: -2 * g["v2"])]
        indep += [(f"-v2/2+w{j}", lambda g, om=om: -g["v2"] / 2 + om) for j, om in enumerate(omegas)]
        dep = [(f"-w{l + 1}-z{m + 1}-c", lambda g, l=l, m=m: -g["w"][l] - g["z"][m] - c)
               for l in range(3) for m in range(3)]
        dep += [(f"-v2+w{l + 1}+z{m + 1}+c", lambda g, l=l, m=m: -g["v2"] + g["w"][l] + g["z"][m] + c)
                for l in range(3) for m in range(3)]
        return cls("A2E", tuple(indep), tuple(dep), (2 * t, np.pi / params.r))

    @classmethod
    def a3_elliptic(cls, params: ModularParams) -> "PoleCatalog":
        t = 0.5j * params.a_plus
        c = 0.25j * params.a_plus
        omegas = (0.0, np.pi / (2 * params.r), t, t + np.pi / (2 * params.r))
        indep = [("v2", lambda g: g["v2"]), ("v3", lambda g: g["v3"]),
                 ("-2v2-v3", lambda g: -2 * g["v2"] - g["v3"]),
                 ("-v2-2v3", lambda g: -g["v2"] - 2 * g["v3"])]
        indep += [(f"-(v2+v3)/2+w{j}", lambda g, om=om: -(g["v2"] + g["v3"]) / 2 + om)
                  for j, om in enumerate(omegas)]
        dep = []
        for l in range(4):
            for s in (1, -1):
                dep.append((f"-w{l + 1}-c{'+' if s > 0 else '-'}d",
                            lambda g, l=l, s=s: -g["w"][l] - c + s * g["d"]))
                dep.append((f"-v2-v3+w{l + 1}+c{'+' if s > 0 else '-'}d",
                            lambda g, l=l, s=s: -g["v2"] - g["v3"] + g["w"][l] + c + s * g["d"]))
        return cls("A3E", tuple(indep), tuple(dep), (2 * t, np.pi / params.r))

    @classmethod
    def a3_hyperbolic(cls, params: ModularParams) -> "PoleCatalog":
        # zeros of s_+(y) sit at y in i a_+ Z; the functions are i a_+-periodic in v1
        c = 0.25j * params.a_plus
        indep = [("v2", lambda g: g["v2"]), ("v3", lambda g: g["v3"]),
                 ("-2v2-v3", lambda g: -2 * g["v2"] - g["v3"]),
                 ("-v2-2v3", lambda g: -g["v2"] - 2 * g["v3"]),
                 ("-(v2+v3)/2", lambda g: -(g["v2"] + g["v3"]) / 2),
                 ("-(v2+v3)/2+ia/2", lambda g: -(g["v2"] + g["v3"]) / 2 + 0.5j * params.a_plus)]
        dep = []
        for l in range(4):
            for s in (1, -1):
                dep.append((f"-w{l + 1}-c{'+' if s > 0 else '-'}d",
                            lambda g, l=l, s=s: -g["w"][l] - c + s * g["d"]))
                dep.append((f"-v2-v3+w{l + 1}+c{'+' if s > 0 else '-'}d",
                            lambda g, l=l, s=s: -g["v2"] - g["v3"] + g["w"][l] + c + s * g["d"]))
        return cls("A3H", tuple(indep), tuple(dep), (1j * params.a_plus,))

    def all_poles(self, config) -> np.ndarray:
        return np.array([fn(config) for _, fn in self.w_independent_poles + self.w_dependent_poles])

    def _translates(self, reach: int = 2) -> np.ndarray:
        if len(self.periods) == 1:
            return self.periods[0] * np.arange(-reach, reach + 1)
        a, b = self.periods
        k = np.arange(-reach, reach + 1)
        return (a * k[:, None] + b * k[None, :]).ravel()

    def spacing(self, center: complex, config) -> float:
        """Distance from ``center`` to the nearest *other* pole (lattice included)."""
        cand = (self.all_poles(config)[:, None] + self._translates()[None, :]).ravel()
        dist = np.abs(cand - center)
        dist = dist[dist > 1e-12 * (1 + abs(center))]
        return float(dist.min())

    def min_spacing(self, config) -> float:
        """Smallest spacing over all catalogued poles (coincidences give 0)."""
        poles = self.all_poles(config)
        cand = (poles[:, None] + self._translates()[None, :]).ravel()
        best = np.inf
        for p in poles:
            dist = np.abs(cand - p)
            # each pole meets its own zero translate exactly once
            dist = np.sort(dist)[1:]
            best = min(best, float(dist[0]))
        return best
