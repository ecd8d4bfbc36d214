"""Quantitative checks over sampled flows: resistance, zero resistance,
tracklessness (measure preservation of the exit map), invisibility,
reflection counts and the inscribed-in-cylinder predicate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .bodies import Profile, profile_to_walls, triangle_radii
from .billiard import ScatterBatch, SimConfig, scatter_arrays

MAX_DEGENERATE_FRACTION = 1e-3
DEFAULT_TOL = 1e-9


class VerificationError(RuntimeError):
    """The flow could not be evaluated (bad plan, degenerate or capped samples)."""


@dataclass(frozen=True)
class SamplingPlan:
    """Entry offsets for the flow.

    ``domain`` is a list of ``(lo, hi)`` intervals on the entry line; ``None``
    means the hull cross-section ``[x_min, x_max]`` of the profile.  The
    stratified strategy uses cell midpoints, ``uniform`` draws from a seeded
    generator.
    """

    n: int = 10_000
    strategy: str = "stratified"
    seed: int | None = None
    domain: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise VerificationError("sampling plan needs n >= 1")
        if self.strategy not in ("stratified", "uniform"):
            raise VerificationError(f"unknown sampling strategy {self.strategy!r}")
        if self.domain is not None:
            dom = tuple((float(a), float(b)) for a, b in self.domain)
            if not dom or any(not b > a for a, b in dom):
                raise VerificationError("sampling intervals must be non-degenerate")
            object.__setattr__(self, "domain", dom)

    def intervals(self, profile: Profile | None = None) -> list[tuple[float, float]]:
        if self.domain is not None:
            return list(self.domain)
        if profile is None:
            raise VerificationError("plan without a domain needs a profile")
        x0, x1, _, _ = profile.bounds
        return [(x0, x1)]

    def points(self, profile: Profile | None = None) -> tuple[np.ndarray, np.ndarray]:
        """``(xs, dx)``: entry offsets and the entry-line length each one carries."""
        ivs = self.intervals(profile)
        lengths = np.array([b - a for a, b in ivs])
        if self.strategy == "uniform":
            rng = np.random.default_rng(self.seed)
            which = rng.choice(len(ivs), size=self.n, p=lengths / lengths.sum())
            lo = np.array([a for a, _ in ivs])[which]
            xs = lo + rng.random(self.n) * lengths[which]
            return xs, np.full(self.n, lengths.sum() / self.n)
        counts = _split_counts(self.n, lengths)
        xs, dx = [], []
        for (a, b), c in zip(ivs, counts):
            if c == 0:
                continue
            xs.append(a + (np.arange(c) + 0.5) * (b - a) / c)
            dx.append(np.full(c, (b - a) / c))
        return np.concatenate(xs), np.concatenate(dx)


def _split_counts(n: int, lengths: np.ndarray) -> list[int]:
    raw = n * lengths / lengths.sum()
    counts = np.floor(raw).astype(int)
    for i in np.argsort(-(raw - counts))[: n - counts.sum()]:
        counts[i] += 1
    return counts.tolist()


def symmetry_weight(profile: Profile, xs: np.ndarray) -> np.ndarray:
    """Flow cross-section measure per unit entry-line length.

    A signed meridional line covers every radius twice, hence ``pi*|x|``.
    """
    if profile.symmetry.rotational:
        return math.pi * np.abs(xs)
    return np.full(np.shape(xs), float(profile.symmetry.depth))


def hull_measure(profile: Profile) -> float:
    x0, x1, _, _ = profile.bounds
    if profile.symmetry.rotational:
        return math.pi * max(abs(x0), abs(x1)) ** 2
    return float(profile.symmetry.depth) * (x1 - x0)


@dataclass
class FlowSample:
    """A traced flow with its quadrature weights and exclusion bookkeeping."""

    profile: Profile
    plan: SamplingPlan
    cfg: SimConfig
    batch: ScatterBatch
    weights: np.ndarray
    excluded: np.ndarray

    @property
    def v0(self) -> np.ndarray:
        return np.array(self.cfg.flow, dtype=float)

    @property
    def ok(self) -> np.ndarray:
        return self.batch.escaped & ~self.excluded

    @property
    def degenerate_fraction(self) -> float:
        bad = self.batch.degenerate | self.excluded
        return float(bad.sum()) / max(len(self.batch), 1)

    @property
    def capped_count(self) -> int:
        return int(self.batch.capped.sum())

    def velocity_deviation(self) -> float:
        ok = self.ok
        if not ok.any():
            return 0.0
        return float(np.hypot(*(self.batch.v_plus[ok] - self.v0).T).max())


def breakpoints(profile: Profile) -> np.ndarray:
    """Vertex abscissae: entry offsets whose rays meet a wall endpoint head-on."""
    return np.unique(profile.vertices[:, 0])


def sample_flow(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                strict: bool = True) -> FlowSample:
    """Trace the plan through the profile.

    Offsets within ``cfg.eps_corner`` of a vertex abscissa are excluded up
    front.  With ``strict``, capped trajectories or a degenerate fraction of
    at least ``1e-3`` raise :class:`VerificationError`.
    """
    xs, dx = plan.points(profile)
    bps = breakpoints(profile)
    pos = np.searchsorted(bps, xs)
    near = np.minimum(np.abs(xs - bps[np.clip(pos - 1, 0, len(bps) - 1)]),
                      np.abs(xs - bps[np.clip(pos, 0, len(bps) - 1)]))
    excluded = near < cfg.eps_corner
    batch = scatter_arrays(profile_to_walls(profile), xs, cfg)
    flow = FlowSample(profile, plan, cfg, batch, dx * symmetry_weight(profile, xs), excluded)
    if strict:
        if flow.capped_count:
            raise VerificationError(f"{flow.capped_count} trajectories hit the bounce cap "
                                    f"({cfg.max_bounces})")
        if flow.degenerate_fraction >= MAX_DEGENERATE_FRACTION:
            raise VerificationError(f"degenerate fraction {flow.degenerate_fraction:.2e} "
                                    f">= {MAX_DEGENERATE_FRACTION:g}")
    return flow


@dataclass(frozen=True)
class ResistanceResult:
    R_axial: float
    R_lateral: float
    normalization: float
    degenerate_fraction: float


@dataclass
class VerificationReport:
    check: str
    passed: bool
    max_velocity_deviation: float | None = None
    max_position_deviation: float | None = None
    density_ratio_range: tuple[float, float] | None = None
    m_max: int | None = None
    parity_ok: bool | None = None
    sample_count: int = 0
    degenerate_fraction: float = 0.0
    tolerances: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if d["density_ratio_range"] is not None:
            d["density_ratio_range"] = list(d["density_ratio_range"])
        return d


def resistance(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
               flow: FlowSample | None = None) -> ResistanceResult:
    """Momentum transferred to the body, ``integral of (v0 - v_plus) dmu``.

    ``R_axial`` is the component along the flow axis (+z), ``R_lateral`` the
    horizontal component, which vanishes for mirror-symmetric profiles.
    """
    flow = flow or sample_flow(profile, plan, cfg)
    ok = flow.ok
    dv = flow.v0 - flow.batch.v_plus[ok]
    w = flow.weights[ok]
    return ResistanceResult(float(np.dot(dv[:, 1], w)), float(np.dot(dv[:, 0], w)),
                            hull_measure(profile), flow.degenerate_fraction)


def _d1(flow: FlowSample, tol: float) -> VerificationReport:
    dev = flow.velocity_deviation()
    return VerificationReport(
        "D1", dev <= tol and flow.capped_count == 0, max_velocity_deviation=dev,
        sample_count=len(flow.batch), degenerate_fraction=flow.degenerate_fraction,
        tolerances={"velocity": tol})


def check_zero_resistance(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                          tol: float = DEFAULT_TOL, flow: FlowSample | None = None
                          ) -> VerificationReport:
    """Pass iff every non-degenerate final velocity equals the flow direction."""
    return _d1(flow or sample_flow(profile, plan, cfg), tol)


def _measure_coordinate(profile: Profile, x: np.ndarray) -> np.ndarray:
    return np.abs(x) if profile.symmetry.rotational else x


def _expected_mass(profile: Profile, intervals, edges: np.ndarray) -> np.ndarray:
    """Entry-flow measure whose entry offset falls in each bin (exact)."""
    if profile.symmetry.rotational:
        cum = np.zeros_like(edges)
        for a, b in intervals:
            for lo, hi in ((max(a, 0.0), max(b, 0.0)), (max(-b, 0.0), max(-a, 0.0))):
                if hi > lo:
                    e = np.clip(edges, lo, hi)
                    cum += 0.5 * math.pi * (e ** 2 - lo ** 2)
    else:
        cum = np.zeros_like(edges)
        for a, b in intervals:
            cum += float(profile.symmetry.depth) * (np.clip(edges, a, b) - a)
    return np.diff(cum)


def equal_measure_edges(profile: Profile, intervals, bins: int) -> np.ndarray:
    """Bin edges (in ``|x|`` for rotational, ``x`` for translational profiles)
    splitting the entry flow over ``intervals`` into equal-measure cells."""
    if profile.symmetry.rotational:
        lo = min(0.0 if a < 0 < b else min(abs(a), abs(b)) for a, b in intervals)
        hi = max(max(abs(a), abs(b)) for a, b in intervals)
    else:
        lo, hi = min(a for a, _ in intervals), max(b for _, b in intervals)
    grid = np.linspace(lo, hi, 200_001)
    cum = np.concatenate([[0.0], np.cumsum(_expected_mass(profile, intervals, grid))])
    targets = np.linspace(0.0, cum[-1], bins + 1)
    edges = np.interp(targets, cum, grid)
    edges[0], edges[-1] = lo, hi
    return edges


def pushforward_histogram(flow: FlowSample, bins: int = 100) -> dict:
    """Histogram of the exit offsets weighted by the entry measure.

    Returns edges, observed mass, expected mass (the entry measure of each
    cell), density ratios, counts and the overflow outside the cells.
    """
    if bins < 1:
        raise VerificationError("bins must be >= 1")
    profile = flow.profile
    ivs = flow.plan.intervals(profile)
    edges = equal_measure_edges(profile, ivs, bins)
    expected = _expected_mass(profile, ivs, edges)
    if np.any(expected <= 0):
        raise VerificationError("histogram has cells with zero expected mass")
    ok = flow.ok
    coord = _measure_coordinate(profile, flow.batch.x_tilde[ok])
    w = flow.weights[ok]
    idx = np.searchsorted(edges, coord, side="right") - 1
    idx[coord == edges[-1]] = bins - 1
    inside = (idx >= 0) & (idx < bins)
    mass = np.bincount(idx[inside], weights=w[inside], minlength=bins)
    counts = np.bincount(idx[inside], minlength=bins)
    return {"edges": edges, "mass": mass, "expected": expected, "ratio": mass / expected,
            "counts": counts, "overflow_count": int((~inside).sum()),
            "overflow_mass": float(w[~inside].sum()), "escaped": int(ok.sum())}


def exit_jacobian(profile: Profile, xs: np.ndarray, cfg: SimConfig = SimConfig(),
                  h: float = 1e-7) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobian of the exit map scaled by the symmetry
    weight; equals 1 wherever the map preserves the flow measure.

    Returns ``(J, valid)`` where ``valid`` marks samples whose three traced
    neighbours share the same escape branch (same reflection count).
    """
    walls = profile_to_walls(profile)
    xs = np.asarray(xs, dtype=float)
    mid, lo, hi = (scatter_arrays(walls, xs + d, cfg) for d in (0.0, -h, h))
    valid = mid.escaped & lo.escaped & hi.escaped & (lo.m == mid.m) & (hi.m == mid.m)
    deriv = np.abs((hi.x_tilde - lo.x_tilde) / (2 * h))
    if profile.symmetry.rotational:
        with np.errstate(divide="ignore", invalid="ignore"):
            deriv = deriv * np.abs(mid.x_tilde) / np.abs(xs)
    return np.where(valid, deriv, np.nan), valid


def check_trackless(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                    bins: int = 100, tol: float | None = None, *,
                    velocity_tol: float = DEFAULT_TOL, jacobian: bool = False,
                    flow: FlowSample | None = None) -> VerificationReport:
    """Zero resistance plus a flat pushforward density of the exit map.

    ``tol`` defaults to the Poisson 3-sigma band ``3/sqrt(n/bins)``.  With
    ``jacobian=True`` the report also carries the finite-difference
    Jacobian deviation (``details['max_jacobian_deviation']``).
    """
    flow = flow or sample_flow(profile, plan, cfg)
    if tol is None:
        tol = 3.0 / math.sqrt(plan.n / bins)
    d1 = _d1(flow, velocity_tol)
    hist = pushforward_histogram(flow, bins)
    ratio = hist["ratio"]
    flat = bool(np.all(np.abs(ratio - 1.0) <= tol)) and hist["overflow_count"] == 0
    details = {"density_ratio": ratio.tolist(), "bin_edges": hist["edges"].tolist(),
               "overflow_count": hist["overflow_count"],
               "binned_count": int(hist["counts"].sum()), "escaped_count": hist["escaped"],
               "innermost_ratio": float(ratio[0]), "outermost_ratio": float(ratio[-1])}
    if profile.family == "triangle-pair" and profile.symmetry.rotational:
        # radius ratio of the reflected ring, the density gain at its inner edge
        L, c = triangle_radii(profile.params.alpha)
        details["expected_trace_factor"] = L / c
    if jacobian:
        xs = flow.batch.x[flow.ok]
        J, valid = exit_jacobian(profile, xs, cfg)
        details["max_jacobian_deviation"] = float(np.nanmax(np.abs(J - 1.0))) if valid.any() else None
        details["jacobian_samples"] = int(valid.sum())
    return VerificationReport(
        "D2", d1.passed and flat, max_velocity_deviation=d1.max_velocity_deviation,
        density_ratio_range=(float(ratio.min()), float(ratio.max())),
        sample_count=len(flow.batch), degenerate_fraction=flow.degenerate_fraction,
        tolerances={"velocity": velocity_tol, "density": tol, "bins": bins}, details=details)


def check_invisible(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                    tol: float = DEFAULT_TOL, flow: FlowSample | None = None
                    ) -> VerificationReport:
    """Zero resistance plus every exit line coinciding with its entry line."""
    flow = flow or sample_flow(profile, plan, cfg)
    d1 = _d1(flow, tol)
    ok = flow.ok
    b = flow.batch
    pos_dev = float(np.abs(b.x_tilde[ok] - b.x[ok]).max()) if ok.any() else 0.0
    line_dev = float(np.abs(b.exit_point[ok, 0] - b.x[ok]).max()) if ok.any() else 0.0
    parity = bool(np.all(b.m[ok] % 2 == 0))
    return VerificationReport(
        "D3", d1.passed and pos_dev <= tol and line_dev <= tol,
        max_velocity_deviation=d1.max_velocity_deviation, max_position_deviation=pos_dev,
        m_max=int(b.m[ok].max()) if ok.any() else 0, parity_ok=parity,
        sample_count=len(b), degenerate_fraction=flow.degenerate_fraction,
        tolerances={"velocity": tol, "position": tol},
        details={"exit_line_distance": line_dev,
                 "t_star_range": [float(b.t_star[ok].min()), float(b.t_star[ok].max())]
                 if ok.any() else None})


@dataclass(frozen=True)
class ReflectionStats:
    m_max: int
    histogram: dict[int, int]
    parity_ok: bool


def max_reflections(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                    flow: FlowSample | None = None) -> ReflectionStats:
    """Largest reflection count over non-degenerate samples, with the full
    histogram of counts.  ``parity_ok`` is true iff every count is even."""
    flow = flow or sample_flow(profile, plan, cfg, strict=False)
    if flow.capped_count:
        raise VerificationError(f"{flow.capped_count} capped trajectories; raise max_bounces")
    m = flow.batch.m[flow.ok]
    values, counts = np.unique(m, return_counts=True)
    return ReflectionStats(int(m.max()) if m.size else 0,
                           {int(v): int(c) for v, c in zip(values, counts)},
                           bool(np.all(m % 2 == 0)))


def check_reflections(profile: Profile, plan: SamplingPlan, cfg: SimConfig = SimConfig(),
                      tol: float = DEFAULT_TOL, flow: FlowSample | None = None
                      ) -> VerificationReport:
    """Consistency with the reflection lower bounds: a zero-resistance body
    needs ``m_max >= 2``; an invisible one needs ``m_max >= 4`` and even
    counts throughout."""
    flow = flow or sample_flow(profile, plan, cfg)
    stats = max_reflections(profile, plan, cfg, flow)
    d1 = _d1(flow, tol)
    d3 = check_invisible(profile, plan, cfg, tol, flow)
    ok = True
    if d1.passed:
        ok &= stats.m_max >= 2
    if d3.passed:
        ok &= stats.m_max >= 4 and stats.parity_ok
    return VerificationReport(
        "reflections", bool(ok), m_max=stats.m_max, parity_ok=stats.parity_ok,
        sample_count=len(flow.batch), degenerate_fraction=flow.degenerate_fraction,
        tolerances={"velocity": tol},
        details={"histogram": {str(k): v for k, v in stats.histogram.items()},
                 "zero_resistance": d1.passed, "invisible": d3.passed})


@dataclass(frozen=True)
class CylinderSpec:
    """Cylinder ``Omega x [z0, z0 + h]`` with ``Omega`` a disk (``r_in = 0``)
    or a ring.  ``z0=None`` anchors the slab at the profile's lowest point;
    ``c=None`` searches for a full cross-section level."""

    r_out: float
    h: float
    r_in: float = 0.0
    z0: float | None = None
    c: float | None = None

    def __post_init__(self):
        if not (0.0 <= self.r_in < self.r_out) or self.h <= 0:
            raise ValueError("need 0 <= r_in < r_out and h > 0")

    @classmethod
    def disk(cls, r_out: float, h: float, **kw) -> "CylinderSpec":
        return cls(r_out, h, 0.0, **kw)

    @classmethod
    def ring(cls, r_in: float, r_out: float, h: float, **kw) -> "CylinderSpec":
        return cls(r_out, h, r_in, **kw)


def horizontal_section(profile: Profile, z: float) -> list[tuple[float, float]]:
    """Merged x-intervals covered by the profile at height ``z``."""
    spans = []
    for poly in profile.polygons:
        xs = []
        n = len(poly)
        for i in range(n):
            (x1, z1), (x2, z2) = poly[i], poly[(i + 1) % n]
            if (z1 > z) != (z2 > z):
                xs.append(x1 + (z - z1) * (x2 - x1) / (z2 - z1))
        xs.sort()
        spans.extend(zip(xs[0::2], xs[1::2]))
    spans.sort()
    merged: list[list[float]] = []
    for a, b in spans:
        if merged and a <= merged[-1][1] + 1e-12:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [tuple(s) for s in merged]


def _covers(section, lo: float, hi: float, tol: float) -> bool:
    return any(a <= lo + tol and b >= hi - tol for a, b in section)


def check_inscribed(profile: Profile, cyl: CylinderSpec, tol: float = 1e-9) -> bool:
    """Profile lies inside the cylinder and some horizontal section covers
    the whole of ``Omega`` (both signs of ``x``)."""
    v = profile.vertices
    z_lo = profile.bounds[2] if cyl.z0 is None else cyl.z0
    if v[:, 1].min() < z_lo - tol or v[:, 1].max() > z_lo + cyl.h + tol:
        return False
    ax = np.abs(v[:, 0])
    if ax.max() > cyl.r_out + tol:
        return False
    # a ring excludes |x| < r_in: every polygon must stay on one side of the hole
    for poly in profile.polygons:
        if np.abs(poly[:, 0]).min() < cyl.r_in - tol:
            return False
        if cyl.r_in > 0 and poly[:, 0].min() < 0 < poly[:, 0].max():
            return False
    if cyl.c is not None:
        levels = [cyl.c]
    else:
        zs = np.unique(v[:, 1])
        levels = list((zs[:-1] + zs[1:]) / 2)
    for c in levels:
        sec = horizontal_section(profile, c)
        if cyl.r_in > 0:
            if _covers(sec, -cyl.r_out, -cyl.r_in, tol) and _covers(sec, cyl.r_in, cyl.r_out, tol):
                return True
        elif _covers(sec, -cyl.r_out, cyl.r_out, tol):
            return True
    return False
