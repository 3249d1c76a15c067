"""Residual bookkeeping shared by the identity checks and the suite runner."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


@dataclass
class ResidualTracker:
    """Running maximum of a residual together with where it occurred."""

    max_residual: float = 0.0
    worst_x: Optional[tuple] = None
    worst_p: Optional[tuple] = None
    samples: int = 0
    components: dict = field(default_factory=dict)

    def add(self, value: float, x: Sequence[float] | None = None, p: Sequence[float] | None = None, name: str | None = None):
        value = float(value)
        if not np.isfinite(value):
            value = float("inf")
        if name is not None:
            self.components[name] = max(self.components.get(name, 0.0), value)
        if self.worst_x is None or value > self.max_residual:
            self.max_residual = value
            self.worst_x = None if x is None else tuple(float(v) for v in x)
            self.worst_p = None if p is None else tuple(float(v) for v in p)

    def count(self, n: int = 1):
        self.samples += n


@dataclass(frozen=True)
class CheckReport:
    name: str
    max_residual: float
    tolerance: float
    samples: int
    worst_x: Optional[tuple] = None
    worst_p: Optional[tuple] = None
    note: str = "sampled"

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    @classmethod
    def from_tracker(cls, name: str, tracker: ResidualTracker, tolerance: float, note: str = "sampled"):
        return cls(
            name=name,
            max_residual=tracker.max_residual,
            tolerance=tolerance,
            samples=tracker.samples,
            worst_x=tracker.worst_x,
            worst_p=tracker.worst_p,
            note=note,
        )
