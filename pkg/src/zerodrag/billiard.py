"""Elastic billiard in the symmetry plane of a body.

Particles start above the body with velocity ``(0, -1)`` (or below it with
``(0, 1)`` for a reversed flow), reflect specularly off the walls and
escape.  The scattering data follows the usual clock convention: the free
incoming motion is ``(x0, 0) + v0 * t`` and the free outgoing motion is
``x_plus + v_plus * t``, so ``x_tilde = x_plus - <x_plus, v_plus> v_plus``
and ``t_star = -<x_plus, v_plus>``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .geometry import (DOWN, EPS_CORNER, EPS_GEOM, EPS_GRAZING, DegenerateImpact,
                       Direction2, Point2, Wall, dot, first_hit, reflect)

ESCAPED, CAPPED, CORNER, GRAZING = 0, 1, 2, 3
STATUS_NAMES = {ESCAPED: "escaped", CAPPED: "capped", CORNER: "corner", GRAZING: "grazing"}
CHUNK = 1 << 15


@dataclass(frozen=True)
class SimConfig:
    """Tracing parameters.  ``z_start=None`` launches one unit beyond the
    walls on the upstream side."""

    z_start: float | None = None
    max_bounces: int = 10_000
    eps_geom: float = EPS_GEOM
    eps_corner: float = EPS_CORNER
    eps_grazing: float = EPS_GRAZING
    escape_margin: float = 1.0
    flow: Direction2 = DOWN

    def __post_init__(self):
        if self.max_bounces < 1:
            raise ValueError("max_bounces must be >= 1")
        if self.flow not in (Direction2(0.0, -1.0), Direction2(0.0, 1.0)):
            raise ValueError("flow direction must be vertical, (0, -1) or (0, 1)")
        if min(self.eps_geom, self.eps_corner, self.eps_grazing) <= 0:
            raise ValueError("tolerances must be positive")

    def reversed(self) -> "SimConfig":
        return SimConfig(None, self.max_bounces, self.eps_geom, self.eps_corner,
                         self.eps_grazing, self.escape_margin,
                         Direction2(0.0, -self.flow.w))


@dataclass(frozen=True)
class Escaped:
    v_plus: Direction2
    x_plus: Point2
    x_tilde: float
    t_star: float


@dataclass(frozen=True)
class Capped:
    pass


@dataclass(frozen=True)
class Degenerate:
    reason: str  # "corner" or "grazing"


Outcome = Union[Escaped, Capped, Degenerate]


@dataclass
class Trajectory:
    x0: float
    vertices: list[Point2]
    m: int
    outcome: Outcome
    directions: list[Direction2] = field(default_factory=list)

    @property
    def escaped(self) -> bool:
        return isinstance(self.outcome, Escaped)


@dataclass(frozen=True)
class ScatterSample:
    x: float
    v_plus: Direction2 | None
    x_tilde: float | None
    m: int
    degenerate: bool
    status: str = "escaped"


@dataclass
class ScatterBatch:
    """Column arrays of a batch of scattering samples (``status`` codes are
    the module constants ``ESCAPED``, ``CAPPED``, ``CORNER``, ``GRAZING``)."""

    x: np.ndarray
    v_plus: np.ndarray
    x_tilde: np.ndarray
    t_star: np.ndarray
    m: np.ndarray
    status: np.ndarray
    exit_point: np.ndarray

    def __len__(self) -> int:
        return len(self.x)

    @property
    def escaped(self) -> np.ndarray:
        return self.status == ESCAPED

    @property
    def degenerate(self) -> np.ndarray:
        return (self.status == CORNER) | (self.status == GRAZING)

    @property
    def capped(self) -> np.ndarray:
        return self.status == CAPPED

    def samples(self) -> list[ScatterSample]:
        out = []
        for i in range(len(self)):
            ok = self.status[i] == ESCAPED
            out.append(ScatterSample(
                float(self.x[i]),
                Direction2(float(self.v_plus[i, 0]), float(self.v_plus[i, 1])) if ok else None,
                float(self.x_tilde[i]) if ok else None,
                int(self.m[i]), bool(self.degenerate[i]), STATUS_NAMES[int(self.status[i])]))
        return out


def _wall_box(walls: Sequence[Wall]) -> tuple[float, float, float, float] | None:
    if not walls:
        return None
    xs = [c for w in walls for c in (w.a.x, w.b.x)]
    zs = [c for w in walls for c in (w.a.z, w.b.z)]
    return min(xs), max(xs), min(zs), max(zs)


def launch_height(walls: Sequence[Wall], cfg: SimConfig) -> float:
    box = _wall_box(walls)
    if cfg.z_start is not None:
        z = cfg.z_start
        if box is not None:
            ok = z > box[3] if cfg.flow.w < 0 else z < box[2]
            if not ok:
                raise ValueError("z_start must lie upstream of every wall")
        return z
    if box is None:
        return -cfg.flow.w
    return box[3] + 1.0 if cfg.flow.w < 0 else box[2] - 1.0


def _escape_box(walls, cfg, xs_min, xs_max, z_launch):
    box = _wall_box(walls) or (xs_min, xs_max, z_launch, z_launch)
    pad = cfg.escape_margin
    return (min(box[0], xs_min) - pad, max(box[1], xs_max) + pad,
            min(box[2], z_launch) - pad, max(box[3], z_launch) + pad)


def _exit_param(px, pz, dx, dz, box):
    """Ray parameter at which a ray starting inside ``box`` leaves it."""
    px, pz, dx, dz = (np.asarray(q, dtype=float) for q in (px, pz, dx, dz))
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(dx > 0, (box[1] - px) / dx, np.where(dx < 0, (box[0] - px) / dx, np.inf))
        tz = np.where(dz > 0, (box[3] - pz) / dz, np.where(dz < 0, (box[2] - pz) / dz, np.inf))
    return np.maximum(np.minimum(tx, tz), 0.0)


def _offset_axis(u, w):
    """Unit normal to ``(u, w)`` oriented towards +x (towards +z if vertical)."""
    ex, ez = -w, u
    flip = (ex < 0) | ((ex == 0) & (ez < 0))
    return np.where(flip, -ex, ex), np.where(flip, -ez, ez)


def _scatter_data(px, pz, u, w, clock):
    """``x_plus``, signed ``x_tilde`` and ``t_star`` from a point on the final
    ray and the flow-clock time at that point."""
    xpx, xpz = px - u * clock, pz - w * clock
    proj = xpx * u + xpz * w
    tx, tz = xpx - proj * u, xpz - proj * w
    ex, ez = _offset_axis(u, w)
    return xpx, xpz, tx * ex + tz * ez, -proj


def trace_particle(walls: Sequence[Wall], x0: float, cfg: SimConfig = SimConfig()) -> Trajectory:
    """Follow one particle of the flow through its reflections."""
    if not math.isfinite(x0):
        raise ValueError("x0 must be finite")
    z0 = launch_height(walls, cfg)
    box = _escape_box(walls, cfg, x0, x0, z0)
    pos = Point2(float(x0), z0)
    v = cfg.flow
    clock = z0 * cfg.flow.w
    vertices = [pos]
    directions = [v]
    m = 0
    while True:
        hit = first_hit(pos, v, walls, cfg.eps_geom, cfg.eps_corner)
        if hit is None:
            t = float(_exit_param(pos.x, pos.z, v.u, v.w, box))
            exit_pt = Point2(pos.x + t * v.u, pos.z + t * v.w)
            vertices.append(exit_pt)
            xpx, xpz, xt, ts = _scatter_data(exit_pt.x, exit_pt.z, v.u, v.w, clock + t)
            outcome = Escaped(v, Point2(float(xpx), float(xpz)), float(xt), float(ts))
            return Trajectory(float(x0), vertices, m, outcome, directions)
        if m >= cfg.max_bounces:
            return Trajectory(float(x0), vertices, m, Capped(), directions)
        if hit.corner_flag:
            vertices.append(hit.point)
            return Trajectory(float(x0), vertices, m, Degenerate("corner"), directions)
        try:
            v = reflect(v, walls[hit.wall_id].n, cfg.eps_grazing)
        except DegenerateImpact as exc:
            vertices.append(hit.point)
            reason = "grazing" if exc.reason == "grazing" else "corner"
            return Trajectory(float(x0), vertices, m, Degenerate(reason), directions)
        clock += hit.t
        pos = hit.point
        vertices.append(pos)
        directions.append(v)
        m += 1


def _wall_arrays(walls: Sequence[Wall]):
    a = np.array([[w.a.x, w.a.z] for w in walls], dtype=float).reshape(-1, 2)
    b = np.array([[w.b.x, w.b.z] for w in walls], dtype=float).reshape(-1, 2)
    n = np.array([[w.n.u, w.n.w] for w in walls], dtype=float).reshape(-1, 2)
    e = b - a
    return a, e, np.hypot(e[:, 0], e[:, 1]), n


def _trace_chunk(wa, xs, z0, cfg, box):
    a, e, length, normal = wa
    k = len(xs)
    px, pz = xs.astype(float).copy(), np.full(k, z0)
    u, w = np.full(k, cfg.flow.u), np.full(k, cfg.flow.w)
    clock = np.full(k, z0 * cfg.flow.w)
    m = np.zeros(k, dtype=np.int64)
    status = np.full(k, -1, dtype=np.int8)
    exit_t = np.zeros(k)
    active = np.arange(k)
    slack = cfg.eps_geom / length if len(length) else length
    while active.size:
        ox, oz, dx, dz = px[active, None], pz[active, None], u[active, None], w[active, None]
        if len(a):
            denom = dx * e[:, 1] - dz * e[:, 0]
            rx, rz = a[:, 0] - ox, a[:, 1] - oz
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (rx * e[:, 1] - rz * e[:, 0]) / denom
                s = (rx * dz - rz * dx) / denom
            ok = (denom != 0) & (t >= cfg.eps_geom) & (s >= -slack) & (s <= 1.0 + slack)
            t = np.where(ok, t, np.inf)
            j = np.argmin(t, axis=1)
            rows = np.arange(active.size)
            tmin = t[rows, j]
        else:
            tmin = np.full(active.size, np.inf)
        miss = ~np.isfinite(tmin)
        if miss.any():
            idx = active[miss]
            exit_t[idx] = _exit_param(px[idx], pz[idx], u[idx], w[idx], box)
            status[idx] = ESCAPED
        hit = ~miss
        idx = active[hit]
        if idx.size:
            jh, th, sh = j[hit], tmin[hit], s[rows[hit], j[hit]]
            capped = m[idx] >= cfg.max_bounces
            gap = np.minimum(sh, 1.0 - sh) * length[jh]
            ties = np.sum(t[hit] - th[:, None] <= cfg.eps_geom, axis=1) > 1
            corner = (gap < cfg.eps_corner) | ties
            nx, nz = normal[jh, 0], normal[jh, 1]
            vn = u[idx] * nx + w[idx] * nz
            grazing = np.abs(vn) < cfg.eps_grazing
            backface = vn > 0
            status[idx[capped]] = CAPPED
            bad_corner = ~capped & (corner | (backface & ~grazing))
            status[idx[bad_corner]] = CORNER
            bad_graze = ~capped & ~bad_corner & grazing
            status[idx[bad_graze]] = GRAZING
            go = ~(capped | bad_corner | bad_graze)
            g, th, vn, nx, nz = idx[go], th[go], vn[go], nx[go], nz[go]
            px[g] += th * u[g]
            pz[g] += th * w[g]
            clock[g] += th
            u[g] -= 2.0 * vn * nx
            w[g] -= 2.0 * vn * nz
            m[g] += 1
        active = active[status[active] == -1]
    esc = status == ESCAPED
    ex_x = np.where(esc, px + exit_t * u, np.nan)
    ex_z = np.where(esc, pz + exit_t * w, np.nan)
    _, _, xt, ts = _scatter_data(ex_x, ex_z, u, w, clock + exit_t)
    vp = np.column_stack([np.where(esc, u, np.nan), np.where(esc, w, np.nan)])
    return vp, xt, ts, m, status, np.column_stack([ex_x, ex_z])


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("ZERODRAG_THREADS", "1")))
    except ValueError:
        return 1


def scatter_arrays(walls: Sequence[Wall], xs, cfg: SimConfig = SimConfig()) -> ScatterBatch:
    """Vectorized scattering map over an array of entry offsets.

    Equivalent to calling :func:`trace_particle` on every offset; chunks are
    evaluated independently and concatenated in input order, so the result
    does not depend on ``ZERODRAG_THREADS``.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    if not np.all(np.isfinite(xs)):
        raise ValueError("entry offsets must be finite")
    z0 = launch_height(walls, cfg)
    lo, hi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 0.0)
    box = _escape_box(walls, cfg, lo, hi, z0)
    wa = _wall_arrays(walls)
    chunks = [xs[i:i + CHUNK] for i in range(0, xs.size, CHUNK)] or [xs]
    threads = _threads()
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda c: _trace_chunk(wa, c, z0, cfg, box), chunks))
    else:
        parts = [_trace_chunk(wa, c, z0, cfg, box) for c in chunks]
    vp, xt, ts, m, status, ep = (np.concatenate(col) for col in zip(*parts))
    return ScatterBatch(xs, vp, xt, ts, m, status, ep)


def scatter_map(walls: Sequence[Wall], xs, cfg: SimConfig = SimConfig()) -> list[ScatterSample]:
    """One :class:`ScatterSample` per entry offset, in input order."""
    return scatter_arrays(walls, xs, cfg).samples()


def velocity_angles(traj: Trajectory) -> np.ndarray:
    """Unsigned angle between each velocity along the path and the flow axis."""
    d = np.array(traj.directions, dtype=float)
    sign = -1.0 if traj.directions[0].w < 0 else 1.0
    return np.arctan2(np.abs(d[:, 0]), sign * d[:, 1])


def reverse_trajectory(walls: Sequence[Wall], traj: Trajectory,
                       cfg: SimConfig = SimConfig()) -> list[Point2]:
    """Impact points met by a particle sent back along the exit ray of ``traj``."""
    if not isinstance(traj.outcome, Escaped):
        raise ValueError("only escaped trajectories can be reversed")
    v = traj.outcome.v_plus
    pos = traj.vertices[-1]
    v = Direction2(-v.u, -v.w)
    impacts = []
    for _ in range(cfg.max_bounces + 1):
        hit = first_hit(pos, v, walls, cfg.eps_geom, cfg.eps_corner)
        if hit is None:
            return impacts
        impacts.append(hit.point)
        v = reflect(v, walls[hit.wall_id].n, cfg.eps_grazing)
        pos = hit.point
    raise RuntimeError("reversed trajectory did not escape")
