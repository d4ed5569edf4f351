"""Quadrilateral text regions and small planar-geometry helpers.

Coordinates are pixels with the origin at the top-left corner (x right,
y down), the convention of every file format in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _segments_intersect(p1, p2, p3, p4) -> bool:
    """Proper or touching intersection of segments p1p2 and p3p4."""
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0:
        return True

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    if d1 == 0 and on_segment(p3, p4, p1):
        return True
    if d2 == 0 and on_segment(p3, p4, p2):
        return True
    if d3 == 0 and on_segment(p1, p2, p3):
        return True
    if d4 == 0 and on_segment(p1, p2, p4):
        return True
    return False


@dataclass(frozen=True)
class Quad:
    """Four corner points stored clockwise from the top-left corner."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.points) != 4:
            raise ValueError("a quad has exactly four corners")
        pts = [(float(x), float(y)) for x, y in self.points]
        if not all(np.isfinite(c) for p in pts for c in p):
            raise ValueError("quad corners must be finite")
        object.__setattr__(self, "points", tuple(pts))
        if not self.is_simple():
            raise ValueError("quad edges self-intersect")

    def is_simple(self) -> bool:
        p = self.points
        # opposite edges of a 4-gon must not cross or touch
        if _segments_intersect(p[0], p[1], p[2], p[3]):
            return False
        if _segments_intersect(p[1], p[2], p[3], p[0]):
            return False
        return True

    def is_convex(self) -> bool:
        p = self.points
        signs = []
        for i in range(4):
            c = _cross(p[i], p[(i + 1) % 4], p[(i + 2) % 4])
            if c != 0:
                signs.append(c > 0)
        return len(signs) > 0 and all(s == signs[0] for s in signs)

    def area(self) -> float:
        return abs(signed_area(self.points))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=np.float64)

    def translated(self, dx: float, dy: float) -> "Quad":
        return Quad(tuple((x + dx, y + dy) for x, y in self.points))

    @classmethod
    def from_unordered(cls, points) -> "Quad":
        """Order four corner clicks clockwise starting at the corner
        nearest the image top-left."""
        pts = [(float(x), float(y)) for x, y in points]
        if len(pts) != 4:
            raise ValueError("need exactly four points")
        cx = sum(p[0] for p in pts) / 4.0
        cy = sum(p[1] for p in pts) / 4.0
        # ascending atan2 with y down walks visually clockwise
        pts.sort(key=lambda p: np.arctan2(p[1] - cy, p[0] - cx))
        start = min(range(4), key=lambda i: (pts[i][0] + pts[i][1], pts[i][1]))
        ordered = pts[start:] + pts[:start]
        return cls(tuple(ordered))

    @classmethod
    def from_rect(cls, x0: float, y0: float, x1: float, y1: float) -> "Quad":
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def signed_area(points) -> float:
    """Shoelace signed area of a polygon given as (x, y) pairs."""
    total = 0.0
    n = len(points)
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return 0.5 * total


def polygon_area(points) -> float:
    return abs(signed_area(points))
