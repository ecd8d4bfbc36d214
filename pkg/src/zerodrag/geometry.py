"""Planar primitives: points, unit directions, oriented walls, specular
reflection, ray casting, shoelace areas and convex hulls.

Coordinates are ``(x, z)``: ``x`` is the signed horizontal offset (signed
radius in the meridional plane of a body of revolution) and ``z`` is the
height along the flow axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

EPS_GEOM = 1e-9
EPS_CORNER = 1e-9
EPS_GRAZING = 1e-12
UNIT_TOL = 1e-12


class GeometryError(ValueError):
    """Invalid geometric input (degenerate polygon, collinear hull, ...)."""


class DegenerateImpact(ArithmeticError):
    """A measure-zero impact (grazing or corner) that has no reflection law."""

    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason


class Point2(NamedTuple):
    x: float
    z: float


class Direction2(NamedTuple):
    u: float
    w: float

    @classmethod
    def of(cls, u: float, w: float) -> "Direction2":
        """Normalize ``(u, w)`` into a unit direction."""
        norm = math.hypot(u, w)
        if norm == 0.0 or not math.isfinite(norm):
            raise GeometryError(f"cannot normalize direction ({u}, {w})")
        return cls(u / norm, w / norm)

    @classmethod
    def from_angle(cls, angle: float) -> "Direction2":
        """Direction making ``angle`` (counterclockwise) with the downward vertical."""
        return cls(math.sin(angle), -math.cos(angle))


DOWN = Direction2(0.0, -1.0)
UP = Direction2(0.0, 1.0)


def dot(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[0] + a[1] * b[1]


def cross(a: Sequence[float], b: Sequence[float]) -> float:
    return a[0] * b[1] - a[1] * b[0]


def is_unit(v: Sequence[float], tol: float = UNIT_TOL) -> bool:
    return abs(math.hypot(v[0], v[1]) - 1.0) <= tol


@dataclass(frozen=True)
class Wall:
    """Straight boundary segment with the body's outward unit normal."""

    a: Point2
    b: Point2
    n: Direction2

    def __post_init__(self):
        ex, ez = self.b.x - self.a.x, self.b.z - self.a.z
        length = math.hypot(ex, ez)
        if length == 0.0:
            raise GeometryError("wall endpoints coincide")
        if not is_unit(self.n):
            raise GeometryError("wall normal is not a unit vector")
        if abs(dot(self.n, (ex, ez))) > UNIT_TOL * max(1.0, length):
            raise GeometryError("wall normal is not orthogonal to the wall")

    @classmethod
    def from_ccw_edge(cls, a: Sequence[float], b: Sequence[float]) -> "Wall":
        """Edge ``a -> b`` of a counterclockwise polygon; the outward normal
        is on the right-hand side of the edge."""
        a, b = Point2(float(a[0]), float(a[1])), Point2(float(b[0]), float(b[1]))
        ex, ez = b.x - a.x, b.z - a.z
        length = math.hypot(ex, ez)
        if length == 0.0:
            raise GeometryError(f"zero-length edge at {tuple(a)}")
        return cls(a, b, Direction2(ez / length, -ex / length))

    @property
    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.z - self.a.z)


@dataclass(frozen=True)
class Hit:
    wall_id: int
    t: float
    point: Point2
    corner_flag: bool


def reflect(v: Sequence[float], n: Sequence[float],
            eps_grazing: float = EPS_GRAZING) -> Direction2:
    """Specular reflection ``v - 2<v, n> n``.

    Raises :class:`DegenerateImpact` for grazing impacts and for directions
    that arrive from the wrong side of the wall.
    """
    vn = dot(v, n)
    if abs(vn) < eps_grazing:
        raise DegenerateImpact("grazing", f"grazing impact, <v,n> = {vn:.3e}")
    if vn > 0.0:
        raise DegenerateImpact("backface", "direction leaves the wall, not incoming")
    return Direction2(v[0] - 2.0 * vn * n[0], v[1] - 2.0 * vn * n[1])


def first_hit(origin: Sequence[float], direction: Sequence[float],
              walls: Sequence[Wall], eps_geom: float = EPS_GEOM,
              eps_corner: float = EPS_CORNER) -> Hit | None:
    """Nearest wall hit along the ray ``origin + t*direction``, ``t >= eps_geom``.

    Returns ``None`` if the ray escapes every wall.  Impacts within
    ``eps_corner`` of a wall endpoint, or ties between two walls, are
    flagged as corner hits.
    """
    ox, oz = origin
    dx, dz = direction
    candidates = []
    for i, wall in enumerate(walls):
        ex, ez = wall.b.x - wall.a.x, wall.b.z - wall.a.z
        denom = dx * ez - dz * ex
        if denom == 0.0:
            continue
        rx, rz = wall.a.x - ox, wall.a.z - oz
        t = (rx * ez - rz * ex) / denom
        if t < eps_geom:
            continue
        s = (rx * dz - rz * dx) / denom
        length = math.hypot(ex, ez)
        if -eps_geom / length <= s <= 1.0 + eps_geom / length:
            candidates.append((t, i, min(s, 1.0 - s) * length))
    if not candidates:
        return None
    t, i, edge_gap = min(candidates)
    tied = sum(1 for c in candidates if c[0] - t <= eps_geom) > 1
    return Hit(i, t, Point2(ox + t * dx, oz + t * dz), tied or edge_gap < eps_corner)


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    """Signed shoelace area; positive for counterclockwise order."""
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise GeometryError("polygon needs at least 3 vertices")
    if not is_simple(pts):
        raise GeometryError("polygon is self-intersecting")
    x, z = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(z, -1) - np.roll(x, -1) * z))


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = cross(np.subtract(p2, p1), np.subtract(q1, p1))
    d2 = cross(np.subtract(p2, p1), np.subtract(q2, p1))
    d3 = cross(np.subtract(q2, q1), np.subtract(p1, q1))
    d4 = cross(np.subtract(q2, q1), np.subtract(p2, q1))
    return d1 * d2 < 0 and d3 * d4 < 0


def is_simple(vertices: Sequence[Sequence[float]]) -> bool:
    """True when no two non-adjacent edges properly cross and no vertex repeats."""
    pts = [tuple(map(float, p)) for p in vertices]
    n = len(pts)
    if len(set(pts)) != n:
        return False
    for i in range(n):
        p1, p2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(p1, p2, pts[j], pts[(j + 1) % n]):
                return False
    return True


def convex_hull(points: Sequence[Sequence[float]], eps: float = EPS_GEOM) -> list[Point2]:
    """Counterclockwise hull (monotone chain), collinear points removed."""
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) < 3:
        raise GeometryError("convex hull needs at least 3 distinct points")

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def chain(seq):
        out: list[tuple[float, float]] = []
        for p in seq:
            while len(out) >= 2 and turn(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    hull = chain(pts)[:-1] + chain(reversed(pts))[:-1]
    # drop vertices that are collinear with their neighbours up to eps
    changed = True
    while changed and len(hull) >= 3:
        changed = False
        for i in range(len(hull)):
            a, b, c = hull[i - 1], hull[i], hull[(i + 1) % len(hull)]
            if turn(a, b, c) <= eps * max(1.0, math.dist(a, c)):
                del hull[i]
                changed = True
                break
    if len(hull) < 3:
        raise GeometryError("all points are collinear")
    return [Point2(*p) for p in hull]


def point_in_convex_polygon(p: Sequence[float], hull: Sequence[Sequence[float]],
                            eps: float = EPS_GEOM) -> bool:
    """Inclusive containment test against a counterclockwise convex polygon."""
    n = len(hull)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        edge = (b[0] - a[0], b[1] - a[1])
        if cross(edge, (p[0] - a[0], p[1] - a[1])) < -eps * math.hypot(*edge):
            return False
    return True
