"""Parametric body families as planar cross-sections with a symmetry mode.

A :class:`Profile` is the vertical cross-section of a body through its
symmetry axis (rotational mode) or orthogonal to its extrusion direction
(translational mode).  All families use fixed normalizations: triangles
have base length 2, trapezia have outer walls at ``|x| = 1``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .geometry import (GeometryError, Wall, convex_hull, is_simple,
                       polygon_area, _segments_cross)

ROTATIONAL = "rotational"
TRANSLATIONAL = "translational"
MIRROR_TOL = 1e-12


class BodyParameterError(ValueError):
    """Family parameter outside its admissible range."""


class NearDegenerateWarning(UserWarning):
    """Family parameter close to the end of its range (flattened hull)."""


@dataclass(frozen=True)
class Symmetry:
    mode: str = ROTATIONAL
    depth: float | None = None

    def __post_init__(self):
        if self.mode not in (ROTATIONAL, TRANSLATIONAL):
            raise BodyParameterError(f"unknown symmetry mode {self.mode!r}")
        if self.mode == TRANSLATIONAL and not (self.depth and self.depth > 0):
            raise BodyParameterError("translational symmetry needs a positive depth")

    @property
    def rotational(self) -> bool:
        return self.mode == ROTATIONAL


@dataclass(frozen=True)
class BodyParams:
    """Provenance of a profile: family name plus its parameters."""

    family: str
    alpha: float | None = None
    k: float | None = None
    eps: float | None = None
    inner: "BodyParams | None" = None


@dataclass(frozen=True)
class Profile:
    polygons: tuple[np.ndarray, ...]
    symmetry: Symmetry = field(default_factory=Symmetry)
    params: BodyParams = field(default_factory=lambda: BodyParams("custom"))

    def __post_init__(self):
        polys = tuple(np.array(p, dtype=float, copy=True) for p in self.polygons)
        if not polys:
            raise GeometryError("profile has no polygons")
        for p in polys:
            if p.ndim != 2 or p.shape[1] != 2 or len(p) < 3:
                raise GeometryError("each polygon needs >= 3 (x, z) vertices")
            if not np.all(np.isfinite(p)):
                raise GeometryError("non-finite polygon vertex")
            if polygon_area(p) <= 0.0:
                raise GeometryError("polygons must be counterclockwise")
            p.setflags(write=False)
        _check_disjoint(polys)
        object.__setattr__(self, "polygons", polys)
        if self.symmetry.rotational and not is_mirror_symmetric(polys):
            raise GeometryError("rotational profile is not mirror-symmetric about x = 0")

    @property
    def vertices(self) -> np.ndarray:
        return np.vstack(self.polygons)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """``(x_min, x_max, z_min, z_max)``."""
        v = self.vertices
        return (float(v[:, 0].min()), float(v[:, 0].max()),
                float(v[:, 1].min()), float(v[:, 1].max()))

    @property
    def family(self) -> str:
        return self.params.family

    def with_symmetry(self, mode: str, depth: float | None = None) -> "Profile":
        if mode == TRANSLATIONAL and depth is None:
            depth = 1.0
        return replace(self, symmetry=Symmetry(mode, depth if mode == TRANSLATIONAL else None))


def _check_disjoint(polys: Sequence[np.ndarray]) -> None:
    for i, p in enumerate(polys):
        for q in polys[i + 1:]:
            for a in range(len(p)):
                for b in range(len(q)):
                    if _segments_cross(p[a], p[(a + 1) % len(p)], q[b], q[(b + 1) % len(q)]):
                        raise GeometryError("profile polygons overlap")
            if _strictly_inside(p.mean(axis=0), q) or _strictly_inside(q.mean(axis=0), p):
                raise GeometryError("profile polygons overlap")


def _strictly_inside(pt, poly: np.ndarray) -> bool:
    x, z = pt
    inside = False
    n = len(poly)
    for i in range(n):
        (x1, z1), (x2, z2) = poly[i], poly[(i + 1) % n]
        if (z1 > z) != (z2 > z):
            xc = x1 + (z - z1) * (x2 - x1) / (z2 - z1)
            if xc > x:
                inside = not inside
    return inside


def mirror_x(poly: np.ndarray) -> np.ndarray:
    """Reflect about ``x = 0`` keeping counterclockwise order."""
    out = np.array(poly, dtype=float)[::-1].copy()
    out[:, 0] = -out[:, 0]
    return out


def mirror_z(poly: np.ndarray, plane: float) -> np.ndarray:
    """Reflect about the horizontal line ``z = plane`` keeping CCW order."""
    out = np.array(poly, dtype=float)[::-1].copy()
    out[:, 1] = 2.0 * plane - out[:, 1]
    return out


def _sorted_vertices(p: np.ndarray) -> np.ndarray:
    return p[np.lexsort((p[:, 1], p[:, 0]))]


def is_mirror_symmetric(polygons: Iterable[np.ndarray], tol: float = MIRROR_TOL) -> bool:
    """Every polygon's mirror image about ``x = 0`` is itself a polygon of the set."""
    polys = [np.asarray(p, dtype=float) for p in polygons]
    scale = max(1.0, max(float(np.abs(p).max()) for p in polys))
    candidates = [_sorted_vertices(c) for c in polys]
    for p in polys:
        m = _sorted_vertices(mirror_x(p))
        if not any(len(c) == len(m) and np.allclose(c, m, rtol=0.0, atol=tol * scale)
                   for c in candidates):
            return False
    return True


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < math.pi / 4):
        raise BodyParameterError(f"alpha must lie in (0, pi/4), got {alpha!r}")
    return alpha


def triangle_radii(alpha: float) -> tuple[float, float]:
    """``(L, c)``: abscissae of the triangle bases and of the obtuse vertices."""
    alpha = _check_alpha(alpha)
    t1, t2 = math.tan(alpha), math.tan(2 * alpha)
    return (t2 + t1) / 2.0, (t2 - t1) / 2.0


def triangle_pair_profile(alpha: float) -> Profile:
    """Two isosceles triangles with base angles ``alpha`` and vertical bases of
    length 2 at ``|x| = L``, obtuse vertices pointing inward at ``|x| = c``.

    A falling particle that hits the upper edge of one triangle is turned by
    ``2*alpha`` and straightened again by the parallel lower edge of the
    other, so the pair has zero resistance to a vertical flow.
    """
    L, c = triangle_radii(alpha)
    if math.pi - 4 * alpha < 0.1:
        warnings.warn(f"alpha={alpha} is close to pi/4: hull height/radius "
                      f"~ {2 * (math.pi - 4 * alpha):.3g}", NearDegenerateWarning, stacklevel=2)
    left = np.array([[-L, -1.0], [-c, 0.0], [-L, 1.0]])
    return Profile((left, mirror_x(left)), Symmetry(ROTATIONAL),
                   BodyParams("triangle-pair", alpha=alpha))


def inner_ratio(alpha: float) -> float:
    """Half-width of the central channel of the trapezium pair, relative to
    the outer half-width: ``sin(a) / sin(2*floor(pi/(4a))*a + a)``."""
    alpha = _check_alpha(alpha)
    n = math.floor(math.pi / (4 * alpha))
    return math.sin(alpha) / math.sin(2 * n * alpha + alpha)


def trapezoid_dimensions(alpha: float, k: float) -> dict[str, float]:
    """Inner radius ``r``, slant length ``|BC|``, channel length ``|CD|`` and
    total height ``|AB|`` of the trapezium pair."""
    r = inner_ratio(alpha)
    if not (k > 0 and math.isfinite(k)):
        raise BodyParameterError(f"k must be positive, got {k!r}")
    slant = (1.0 - r) / math.sin(alpha)
    return {"r": r, "slant": slant, "channel": k * slant,
            "height": slant * (2 * math.cos(alpha) + k)}


def trapezoid_pair_profile(alpha: float, k: float) -> Profile:
    """Two isosceles trapezia with outer vertical sides at ``|x| = 1``, inner
    vertical sides at ``|x| = r(alpha)`` and slant sides at angle ``alpha``
    to the vertical; centred on ``z = 0``."""
    d = trapezoid_dimensions(alpha, k)
    r, zb, zc = d["r"], d["height"] / 2, d["channel"] / 2
    left = np.array([[-1.0, -zb], [-r, -zc], [-r, zc], [-1.0, zb]])
    return Profile((left, mirror_x(left)), Symmetry(ROTATIONAL),
                   BodyParams("trapezoid-pair", alpha=float(alpha), k=float(k)))


def double_profile(p: Profile, eps: float = 0.0) -> Profile:
    """Union of ``p`` with its mirror image in the plane ``z = z_min - eps/2``."""
    if eps < 0:
        raise BodyParameterError("eps must be non-negative")
    plane = p.bounds[2] - eps / 2.0
    polys = tuple(p.polygons) + tuple(mirror_z(q, plane) for q in p.polygons)
    return Profile(polys, p.symmetry, BodyParams("doubled", p.params.alpha, p.params.k,
                                                 float(eps), inner=p.params))


def cylinder_profile(radius: float = 1.0, height: float = 2.0) -> Profile:
    """Solid circular cylinder with a flat top (retro-reflects the flow)."""
    poly = np.array([[-radius, 0.0], [radius, 0.0], [radius, height], [-radius, height]])
    return Profile((poly,), Symmetry(ROTATIONAL), BodyParams("cylinder"))


def cone_profile(radius: float = 1.0, height: float | None = None) -> Profile:
    """Solid cone with apex up; 45 degree half-angle when ``height == radius``."""
    height = radius if height is None else height
    poly = np.array([[-radius, 0.0], [radius, 0.0], [0.0, height]])
    return Profile((poly,), Symmetry(ROTATIONAL), BodyParams("cone"))


def profile_to_walls(p: Profile) -> list[Wall]:
    walls = []
    for poly in p.polygons:
        n = len(poly)
        for i in range(n):
            walls.append(Wall.from_ccw_edge(poly[i], poly[(i + 1) % n]))
    return walls


def profile_hull(p: Profile):
    return convex_hull(p.vertices)


def _reflect_point(pt: np.ndarray, line: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    a, b = line
    d = (b - a) / np.linalg.norm(b - a)
    rel = pt - a
    return a + 2.0 * np.dot(rel, d) * d - rel


def unfolded_chain(p: Profile) -> np.ndarray:
    """Broken line obtained by reflecting the segment ``CC'`` of a trapezium
    pair successively in the slant lines ``BC``, ``B'C'`` and their images.

    The mirrors are built from the profile's own vertices, so this is an
    independent check of the channel width chosen by :func:`inner_ratio`.
    Returns the chain vertices from the far left end to the far right end.
    """
    if p.family != "trapezoid-pair":
        raise BodyParameterError("unfolding is defined for the trapezoid-pair family")
    # vertex order: left = A, D, C, B and right = B', C', D', A'
    left, right = p.polygons[0], p.polygons[1]
    B, C = left[3], left[2]
    B2, C2 = right[0], right[1]
    alpha = float(p.params.alpha)
    steps = int(math.ceil(math.pi / (2 * alpha))) + 2

    def walk(p_prev, p_cur, m_prev, m_cur):
        side = np.sign(p_cur[0])
        pts = []
        for _ in range(steps):
            p_next = _reflect_point(p_prev, m_cur)
            if np.sign(p_next[0]) != side:
                # wrapped past the bottom of the circle onto the other side
                break
            m_next = (_reflect_point(m_prev[0], m_cur), _reflect_point(m_prev[1], m_cur))
            pts.append(p_next)
            p_prev, p_cur, m_prev, m_cur = p_cur, p_next, m_cur, m_next
        return pts

    line_l, line_r = (B, C), (B2, C2)
    to_left = walk(C2, C, line_r, line_l)
    to_right = walk(C, C2, line_l, line_r)
    return np.array(to_left[::-1] + [C, C2] + to_right)


def tangency_distance(p: Profile) -> float:
    """Largest ``|x|`` reached by :func:`unfolded_chain`; the construction
    requires it to equal the outer wall abscissa 1."""
    return float(np.abs(unfolded_chain(p)[:, 0]).max())
