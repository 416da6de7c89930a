"""Monotone transforms of a bounded outcome onto [0, 1]."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class GFunction:
    """Non-decreasing map ``g: [0, s] -> [0, 1]`` with ``g(0) = 0`` and max 1.

    Without ``knots`` this is ``y / s``. With knots it is the piecewise-linear
    interpolant through ``(y, g)`` pairs, the first at ``y = 0`` and the last
    at ``y = s``.
    """

    support_max: float = 1.0
    knots: tuple | None = None

    def __post_init__(self):
        s = float(self.support_max)
        if not (math.isfinite(s) and s > 0):
            raise ValidationError(f"support_max must be finite and positive, got {s}",
                                  "support_max")
        object.__setattr__(self, "support_max", s)
        if self.knots is None:
            return
        pts = tuple((float(a), float(b)) for a, b in self.knots)
        ys = [p[0] for p in pts]
        gs = [p[1] for p in pts]
        if len(pts) < 2 or ys[0] != 0.0 or ys[-1] != s:
            raise ValidationError("knots must start at y=0 and end at y=support_max", "knots")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValidationError("knot abscissae must be strictly increasing", "knots")
        if gs[0] != 0.0 or max(gs) != 1.0 or any(b < a for a, b in zip(gs, gs[1:])):
            raise ValidationError("knot values must be non-decreasing from 0 to 1", "knots")
        object.__setattr__(self, "knots", pts)

    @classmethod
    def linear(cls, support_max=1.0):
        return cls(support_max)

    @classmethod
    def tabulated(cls, points):
        points = tuple(points)
        return cls(points[-1][0], points)

    @property
    def kind(self) -> str:
        return "linear" if self.knots is None else "tabulated"

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.knots is None:
            return y / self.support_max
        ys, gs = zip(*self.knots)
        return np.interp(y, ys, gs)
