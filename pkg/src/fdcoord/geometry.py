"""Planar geometry primitives shared across the package."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Position:
    """A point in the map plane, meters east (x) and north (y)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"position coordinates must be finite, got ({self.x}, {self.y})")

    def distance_to(self, other: "Position") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x_min, x_max] x [y_min, y_max], closed on all edges."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x_min, self.x_max, self.y_min, self.y_max)):
            raise ValueError("rectangle bounds must be finite")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError(f"degenerate rectangle: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains(self, pos: Position) -> bool:
        return self.x_min <= pos.x <= self.x_max and self.y_min <= pos.y <= self.y_max

    def contains_interior(self, pos: Position) -> bool:
        return self.x_min < pos.x < self.x_max and self.y_min < pos.y < self.y_max

    def overlaps(self, other: "Rect") -> bool:
        """True when the intersection has positive area (shared edges do not count)."""
        return (
            min(self.x_max, other.x_max) > max(self.x_min, other.x_min)
            and min(self.y_max, other.y_max) > max(self.y_min, other.y_min)
        )

    def clip_to(self, bounds: "Rect") -> "Rect | None":
        """Intersection with ``bounds``, or None when it has zero area."""
        x0 = max(self.x_min, bounds.x_min)
        x1 = min(self.x_max, bounds.x_max)
        y0 = max(self.y_min, bounds.y_min)
        y1 = min(self.y_max, bounds.y_max)
        if x1 <= x0 or y1 <= y0:
            return None
        return Rect(x0, x1, y0, y1)


def segment_intersects_rect(a: Position, b: Position, rect: Rect) -> bool:
    """True when the closed segment a-b touches the closed rectangle.

    Liang-Barsky clipping; grazing contact along an edge counts as intersection.
    """
    dx = b.x - a.x
    dy = b.y - a.y
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, a.x - rect.x_min),
        (dx, rect.x_max - a.x),
        (-dy, a.y - rect.y_min),
        (dy, rect.y_max - a.y),
    ):
        if p == 0.0:
            if q < 0.0:
                return False  # parallel and outside the slab
            continue
        t = q / p
        if p < 0.0:
            if t > t1:
                return False
            t0 = max(t0, t)
        else:
            if t < t0:
                return False
            t1 = min(t1, t)
    return t0 <= t1
