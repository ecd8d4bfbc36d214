"""Volumes, convex-hull ratios and the single-impact resistance functional."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import numpy as np

from .bodies import (Profile, _check_alpha, inner_ratio, triangle_pair_profile,
                     trapezoid_pair_profile)
from .geometry import GeometryError, convex_hull


def _clip_right(poly: np.ndarray) -> np.ndarray:
    """Part of a polygon with ``x >= 0`` (one Sutherland-Hodgman pass)."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        pin, qin = p[0] >= 0, q[0] >= 0
        if pin:
            out.append(p)
        if pin != qin:
            s = p[0] / (p[0] - q[0])
            out.append(np.array([0.0, p[1] + s * (q[1] - p[1])]))
    return np.array(out).reshape(-1, 2)


def _revolved_volume(poly: np.ndarray) -> float:
    """``pi * closed integral of x^2 dz`` for a CCW polygon in ``x >= 0``,
    exact per straight edge."""
    if len(poly) < 3:
        return 0.0
    x1, z1 = poly[:, 0], poly[:, 1]
    x2, z2 = np.roll(x1, -1), np.roll(z1, -1)
    return math.pi * float(np.sum((z2 - z1) * (x1 * x1 + x1 * x2 + x2 * x2))) / 3.0


def _shoelace(poly: np.ndarray) -> float:
    x, z = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(z, -1) - np.roll(x, -1) * z))


def volume_of_solid(profile: Profile) -> float:
    """Volume swept by the profile: revolution of its ``x >= 0`` half about
    the axis, or area times depth for extruded profiles."""
    if not profile.symmetry.rotational:
        return sum(_shoelace(p) for p in profile.polygons) * float(profile.symmetry.depth)
    right = sum(_revolved_volume(_clip_right(p)) for p in profile.polygons)
    left = sum(_revolved_volume(_clip_right(_flip(p))) for p in profile.polygons)
    if abs(right - left) > 1e-9 * max(1.0, abs(right)):
        raise GeometryError("the two halves of the rotational profile revolve to "
                            f"different volumes ({right} vs {left})")
    return right


def _flip(poly: np.ndarray) -> np.ndarray:
    out = poly[::-1].copy()
    out[:, 0] = -out[:, 0]
    return out


def triangle_pair_volume_formula(alpha: float) -> float:
    """Closed-form volume ``pi tan(a) (tan(2a) + tan(a)/3)`` of the rotated
    triangle pair."""
    alpha = _check_alpha(alpha)
    t = math.tan(alpha)
    return math.pi * t * (math.tan(2 * alpha) + t / 3.0)


@dataclass(frozen=True)
class ShapeMetrics:
    volume: float
    hull_volume: float
    kappa: float
    L: float
    H: float
    h: float

    def to_dict(self) -> dict:
        return asdict(self)


def hull_volume(profile: Profile) -> float:
    """Volume of the convex hull of the solid.

    For a mirror-symmetric meridional profile the hull of the body of
    revolution is the revolution of the planar hull, so the same edge-exact
    integration applies.
    """
    hull = np.array(convex_hull(profile.vertices))
    if not profile.symmetry.rotational:
        return _shoelace(hull) * float(profile.symmetry.depth)
    return _revolved_volume(_clip_right(hull))


def shape_metrics(profile: Profile) -> ShapeMetrics:
    x0, x1, z0, z1 = profile.bounds
    vol = volume_of_solid(profile)
    hv = hull_volume(profile)
    L = max(abs(x0), abs(x1)) if profile.symmetry.rotational else (x1 - x0) / 2
    H = z1 - z0
    return ShapeMetrics(vol, hv, vol / hv, L, H, H / L)


@dataclass(frozen=True)
class NewtonProfile:
    """Radial height ``f(r)`` over the unit disk, with values in ``[0, h]``.

    ``f`` is a callable or an array of samples on a uniform grid of
    ``[0, 1]`` (linearly interpolated).
    """

    f: Callable[[np.ndarray], np.ndarray] | Sequence[float]
    h: float = 1.0

    def __call__(self, r: np.ndarray) -> np.ndarray:
        if callable(self.f):
            return np.asarray(self.f(r), dtype=float) * np.ones_like(r)
        samples = np.asarray(self.f, dtype=float)
        return np.interp(r, np.linspace(0.0, 1.0, len(samples)), samples)


def newton_functional(p: NewtonProfile, quad_n: int = 4096) -> float:
    """Single-impact resistance ``2 pi int_0^1 r / (1 + f'(r)^2) dr``.

    Midpoint rule on ``quad_n`` cells with the slope taken as the central
    difference across each cell.
    """
    if quad_n < 16:
        raise ValueError("quad_n must be >= 16")
    edges = np.linspace(0.0, 1.0, quad_n + 1)
    f = p(edges)
    if not np.all(np.isfinite(f)):
        raise ValueError("profile has non-finite samples")
    if np.any(f < -1e-12) or np.any(f > p.h + 1e-12):
        raise ValueError("profile leaves [0, h]")
    dr = 1.0 / quad_n
    mid = 0.5 * (edges[:-1] + edges[1:])
    slope = np.diff(f) / dr
    return 2.0 * math.pi * float(np.sum(mid / (1.0 + slope * slope))) * dr


SWEEP_COLUMNS = ("alpha", "k", "r_alpha", "kappa", "h", "m_max", "max_vel_dev")


def sweep(family: str, alpha_min: float, alpha_max: float, steps: int,
          k: float | None = None, n: int = 2000, max_bounces: int = 10_000) -> list[dict]:
    """Metrics and simulated reflection data along a range of ``alpha``.

    ``k=None`` for the trapezoid family uses ``k = floor(1/alpha)``.
    """
    from .billiard import SimConfig
    from .verify import SamplingPlan, max_reflections, sample_flow

    if steps < 1:
        raise ValueError("steps must be >= 1")
    alphas = np.linspace(alpha_min, alpha_max, steps) if steps > 1 else np.array([alpha_min])
    rows = []
    for a in alphas:
        a = float(a)
        if family == "triangle-pair":
            prof, kk = triangle_pair_profile(a), None
        elif family == "trapezoid-pair":
            kk = float(k) if k is not None else float(max(1, math.floor(1 / a)))
            prof = trapezoid_pair_profile(a, kk)
        else:
            raise ValueError(f"cannot sweep family {family!r}")
        met = shape_metrics(prof)
        flow = sample_flow(prof, SamplingPlan(n), SimConfig(max_bounces=max_bounces))
        stats = max_reflections(prof, SamplingPlan(n), flow=flow)
        rows.append({"alpha": a, "k": kk, "r_alpha": inner_ratio(a), "kappa": met.kappa,
                     "h": met.h, "m_max": stats.m_max,
                     "max_vel_dev": flow.velocity_deviation()})
    return rows
