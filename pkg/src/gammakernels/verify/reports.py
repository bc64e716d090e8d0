"""Per-suite results and their JSON form."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

FAILURE_FLOOR = 1e-3
INEQUALITY_FRACTION = 0.95

IDENTITY = "identity"
INEQUALITY = "inequality"
RECORD = "record"


def rel_error(lhs, rhs):
    """``|L - R| / (|L| + |R| + 1e-300)``: symmetric and scale-free."""
    lhs = np.asarray(lhs, dtype=complex)
    rhs = np.asarray(rhs, dtype=complex)
    return np.abs(lhs - rhs) / (np.abs(lhs) + np.abs(rhs) + 1e-300)


def scaled_error(total, scale):
    """Absolute error of a sum that should vanish, relative to ``scale``."""
    return np.abs(np.asarray(total)) / (np.asarray(scale, dtype=float) + 1e-300)


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class SubCheck:
    """One identity (or certified inequality) evaluated at a sample set.

    ``mode`` is ``identity`` (pass iff every error is below ``threshold``),
    ``inequality`` (pass iff at least 95% of errors exceed ``threshold``)
    or ``record`` (reported, never affects the verdict).
    """

    name: str
    threshold: float
    points: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    errors: np.ndarray
    mode: str = IDENTITY
    note: str = ""

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=complex))
        self.lhs = np.atleast_1d(np.asarray(self.lhs, dtype=complex))
        self.rhs = np.atleast_1d(np.asarray(self.rhs, dtype=complex))
        self.errors = np.atleast_1d(np.asarray(self.errors, dtype=float))
        if self.mode not in (IDENTITY, INEQUALITY, RECORD):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def compare(cls, name, threshold, points, lhs, rhs, mode=IDENTITY, note=""):
        return cls(name, threshold, points, lhs, rhs, rel_error(lhs, rhs), mode, note)

    @property
    def max_rel_error(self) -> float:
        return float(np.max(self.errors))

    @property
    def fraction_above(self) -> float:
        return float(np.mean(self.errors > self.threshold))

    @property
    def passed(self) -> bool:
        if self.mode == INEQUALITY:
            return self.fraction_above >= INEQUALITY_FRACTION
        if self.mode == RECORD:
            return True
        return bool(np.all(np.isfinite(self.errors))) and self.max_rel_error < self.threshold

    @property
    def worst_index(self) -> int:
        if self.mode == INEQUALITY:
            return int(np.argmin(self.errors))
        return int(np.argmax(self.errors))

    @property
    def margin(self) -> float:
        # > 1 means failing; used to pick the binding subcheck
        if self.mode == INEQUALITY:
            return INEQUALITY_FRACTION / max(self.fraction_above, 1e-300)
        return self.max_rel_error / self.threshold

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "mode": self.mode,
            "threshold": self.threshold,
            "n_points": int(self.errors.size),
            "max_rel_error": self.max_rel_error,
            "min_rel_error": float(np.min(self.errors)),
            "verdict": "PASS" if self.passed else "FAIL",
            "worst_point": [_pair(z) for z in self.points[self.worst_index]],
            "rel_errors": [float(e) for e in self.errors],
            "points": [[_pair(z) for z in row] for row in self.points],
            "lhs": [_pair(z) for z in self.lhs],
            "rhs": [_pair(z) for z in self.rhs],
        }
        if self.mode == INEQUALITY:
            out["fraction_above_threshold"] = self.fraction_above
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class IdentityReport:
    """Outcome of one suite: its subchecks plus the binding summary numbers."""

    suite_name: str
    params: dict
    seed: int
    n_points: int
    subchecks: list
    label: str = ""
    metadata: dict = field(default_factory=dict)
    error: Optional[str] = None

    def _counted(self):
        return [s for s in self.subchecks if s.mode != RECORD]

    @property
    def binding(self) -> Optional[SubCheck]:
        counted = self._counted()
        if not counted:
            return None
        return max(counted, key=lambda s: s.margin)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self._counted()) and all(s.passed for s in self._counted())

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @property
    def max_rel_error(self) -> float:
        b = self.binding
        return float("nan") if b is None else b.max_rel_error

    @property
    def threshold(self) -> float:
        b = self.binding
        return float("nan") if b is None else b.threshold

    @property
    def points(self):
        return [s.points for s in self.subchecks]

    @property
    def rel_errors(self):
        return np.concatenate([s.errors for s in self.subchecks]) if self.subchecks else np.empty(0)

    def subcheck(self, name: str) -> SubCheck:
        for s in self.subchecks:
            if s.name == name:
                return s
        raise KeyError(name)

    def to_dict(self) -> dict:
        b = self.binding
        out = {
            "suite": self.suite_name,
            "params": self.params,
            "seed": self.seed,
            "n_points": self.n_points,
            "max_rel_error": self.max_rel_error,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "worst_point": None if b is None else [_pair(z) for z in b.points[b.worst_index]],
        }
        if self.label:
            out["label"] = self.label
        if self.error is not None:
            out["error"] = self.error
        if self.metadata:
            out["metadata"] = self.metadata
        out["subchecks"] = [s.to_dict() for s in self.subchecks]
        return out

    def summary_line(self) -> str:
        b = self.binding
        detail = "" if b is None else f"{b.name}: max {b.max_rel_error:.2e} / thr {b.threshold:.0e}"
        if self.error is not None:
            detail = self.error
        return f"{self.suite_name:<32} {self.verdict:<5} {detail}"
