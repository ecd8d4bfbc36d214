"""File formats: profile/metrics/report JSON, trace and sweep CSV, SVG."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bodies import BodyParams, Profile, Symmetry
from .billiard import Capped, Escaped, Trajectory
from .metrics import SWEEP_COLUMNS

TRACE_COLUMNS = ("x0", "m", "outcome", "v_plus_u", "v_plus_w", "x_tilde", "t_star")


def _params_to_dict(p: BodyParams | None) -> dict | None:
    if p is None:
        return None
    return {"family": p.family, "alpha": p.alpha, "k": p.k, "eps": p.eps,
            "inner": _params_to_dict(p.inner)}


def _params_from_dict(d: dict | None, family: str | None = None) -> BodyParams | None:
    if d is None:
        return None
    return BodyParams(d.get("family", family) or "custom", d.get("alpha"), d.get("k"),
                      d.get("eps"), _params_from_dict(d.get("inner")))


def profile_to_dict(p: Profile) -> dict:
    params = _params_to_dict(p.params)
    params.pop("family")
    sym = {"mode": p.symmetry.mode}
    if p.symmetry.depth is not None:
        sym["depth"] = p.symmetry.depth
    return {"family": p.family, "params": params, "symmetry": sym,
            "polygons": [poly.tolist() for poly in p.polygons]}


def profile_from_dict(d: dict) -> Profile:
    sym = d.get("symmetry", {"mode": "rotational"})
    return Profile(tuple(np.array(poly, dtype=float) for poly in d["polygons"]),
                   Symmetry(sym["mode"], sym.get("depth")),
                   _params_from_dict(d.get("params", {}), d.get("family")))


def save_profile(p: Profile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profile_to_dict(p), indent=2) + "\n")


def load_profile(path: str | Path) -> Profile:
    return profile_from_dict(json.loads(Path(path).read_text()))


def dump_json(obj, path: str | Path | None = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def trace_rows(trajectories: Iterable[Trajectory]) -> list[dict]:
    rows = []
    for t in trajectories:
        o = t.outcome
        if isinstance(o, Escaped):
            rows.append({"x0": t.x0, "m": t.m, "outcome": "escaped", "v_plus_u": o.v_plus.u,
                         "v_plus_w": o.v_plus.w, "x_tilde": o.x_tilde, "t_star": o.t_star})
        else:
            name = "capped" if isinstance(o, Capped) else f"degenerate-{o.reason}"
            rows.append({"x0": t.x0, "m": t.m, "outcome": name, "v_plus_u": "",
                         "v_plus_w": "", "x_tilde": "", "t_star": ""})
    return rows


def _fmt(v, fmt: str | None) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v == 0.0:
        v = 0.0  # drop the sign of negative zero
    return format(v, fmt) if fmt else repr(v)


def write_csv(rows: Sequence[dict], columns: Sequence[str], path: str | Path | None = None,
              float_format: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c), float_format) for c in columns])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def write_trace_csv(trajectories: Iterable[Trajectory], path: str | Path | None = None) -> str:
    return write_csv(trace_rows(trajectories), TRACE_COLUMNS, path)


def write_sweep_csv(rows: Sequence[dict], path: str | Path | None = None) -> str:
    return write_csv(rows, SWEEP_COLUMNS, path, float_format=".10g")


def render_svg(profile: Profile, trajectories: Iterable[Trajectory] = (),
               width: int = 480) -> str:
    """Schematic SVG: filled cross-section, particle paths as red polylines."""
    trajectories = list(trajectories)
    x0, x1, z0, z1 = profile.bounds
    for t in trajectories:
        pts = np.array(t.vertices)
        x0, x1 = min(x0, pts[:, 0].min()), max(x1, pts[:, 0].max())
        z0, z1 = min(z0, pts[:, 1].min()), max(z1, pts[:, 1].max())
    pad = 0.05 * max(x1 - x0, z1 - z0)
    x0, x1, z0, z1 = x0 - pad, x1 + pad, z0 - pad, z1 + pad
    scale = width / (x1 - x0)
    height = int(round((z1 - z0) * scale))

    def pt(x, z):
        return f"{(x - x0) * scale:.3f},{(z1 - z) * scale:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>']
    for poly in profile.polygons:
        out.append('<polygon fill="lightgray" stroke="black" stroke-width="1" points="'
                   + " ".join(pt(x, z) for x, z in poly) + '"/>')
    for t in trajectories:
        out.append('<polyline fill="none" stroke="red" stroke-width="1" points="'
                   + " ".join(pt(x, z) for x, z in t.vertices) + '"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
