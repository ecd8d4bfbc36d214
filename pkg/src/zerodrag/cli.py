"""Command-line front end: ``zerodrag build|trace|verify|metrics|sweep``.

Exit codes: 0 success / all checks pass, 1 a check failed (or a trace hit
the bounce cap), 2 configuration or degeneracy error.
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import sys
import warnings
from pathlib import Path

from . import io
from .billiard import Capped, SimConfig, trace_particle
from .bodies import (BodyParameterError, NearDegenerateWarning, Profile, cone_profile,
                     cylinder_profile, double_profile, profile_to_walls,
                     trapezoid_pair_profile, triangle_pair_profile)
from .geometry import GeometryError
from .metrics import shape_metrics, sweep
from .verify import (CylinderSpec, SamplingPlan, VerificationError, check_inscribed,
                     check_invisible, check_reflections, check_trackless,
                     check_zero_resistance, sample_flow, VerificationReport)

FAMILIES = ("triangle-pair", "trapezoid-pair", "doubled", "cone", "cylinder")
CHECKS = ("d1", "d2", "d3", "reflections", "inscribed")
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.USub: operator.neg, ast.UAdd: operator.pos}


class ConfigError(Exception):
    pass


def parse_number(text: str) -> float:
    """Arithmetic over numbers and ``pi``, e.g. ``pi/6`` or ``3*pi/16``."""
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(f"unsupported expression {text!r}")
    try:
        return ev(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad number {text!r}: {exc}") from None
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _body_args(p: argparse.ArgumentParser, positional: bool = True) -> None:
    if positional:
        p.add_argument("family", nargs="?", choices=FAMILIES)
    p.add_argument("--profile", type=Path, help="profile JSON instead of a family")
    p.add_argument("--alpha", type=parse_number)
    p.add_argument("--k", type=parse_number)
    p.add_argument("--eps", type=parse_number, default=0.0)
    p.add_argument("--inner", choices=("triangle-pair", "trapezoid-pair"),
                   help="inner family of a doubled body")
    p.add_argument("--symmetry", choices=("rotational", "translational"))
    p.add_argument("--depth", type=parse_number)
    p.add_argument("--radius", type=parse_number, default=1.0)
    p.add_argument("--height", type=parse_number)


def _need(value, flag):
    if value is None:
        raise ConfigError(f"{flag} is required for this family")
    return value


def _family_profile(family: str, args) -> Profile:
    if family == "triangle-pair":
        return triangle_pair_profile(_need(args.alpha, "--alpha"))
    if family == "trapezoid-pair":
        return trapezoid_pair_profile(_need(args.alpha, "--alpha"), _need(args.k, "--k"))
    if family == "cone":
        return cone_profile(args.radius, args.height)
    if family == "cylinder":
        return cylinder_profile(args.radius, 2.0 if args.height is None else args.height)
    if family == "doubled":
        return double_profile(_family_profile(_need(args.inner, "--inner"), args), args.eps)
    raise ConfigError(f"unknown family {family!r}")


def build_profile(args) -> Profile:
    if args.profile is not None:
        prof = io.load_profile(args.profile)
    elif getattr(args, "family", None):
        prof = _family_profile(args.family, args)
    else:
        raise ConfigError("give a body family or --profile")
    if args.symmetry:
        prof = prof.with_symmetry(args.symmetry, args.depth)
    return prof


def _plan(args) -> SamplingPlan:
    return SamplingPlan(args.n, args.strategy, args.seed)


def cmd_build(args) -> int:
    prof = build_profile(args)
    out = Path(args.out)
    io.save_profile(prof, out)
    out.with_suffix(".svg").write_text(io.render_svg(prof))
    print(f"wrote {out} and {out.with_suffix('.svg')}")
    return EXIT_OK


def cmd_trace(args) -> int:
    prof = build_profile(args)
    walls = profile_to_walls(prof)
    cfg = SimConfig(max_bounces=args.max_bounces)
    if args.reverse:
        cfg = cfg.reversed()
    if args.x0:
        xs = list(args.x0)
    else:
        xs = SamplingPlan(args.n).points(prof)[0].tolist()
    trajs = [trace_particle(walls, x, cfg) for x in xs]
    text = io.write_trace_csv(trajs, args.out)
    if args.out is None:
        sys.stdout.write(text)
    if args.svg:
        shown = trajs if len(trajs) <= 50 else trajs[:: max(1, len(trajs) // 25)]
        Path(args.svg).write_text(io.render_svg(prof, shown))
    capped = [t.x0 for t in trajs if isinstance(t.outcome, Capped)]
    if capped:
        print(f"{len(capped)} trajectories reached the bounce cap "
              f"{args.max_bounces}, first at x0={capped[0]!r}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _inscribed_report(prof: Profile, args) -> VerificationReport:
    x0, x1, z0, z1 = prof.bounds
    r_out = args.r_out if args.r_out is not None else max(abs(x0), abs(x1))
    h = args.cyl_height if args.cyl_height is not None else z1 - z0
    if args.r_in is not None:
        cyl = CylinderSpec.ring(args.r_in, r_out, h)
    else:
        cyl = CylinderSpec.disk(r_out, h)
    ok = check_inscribed(prof, cyl)
    return VerificationReport("inscribed", ok, tolerances={"geometry": 1e-9},
                              details={"r_in": cyl.r_in, "r_out": cyl.r_out, "h": cyl.h})


def run_checks(prof: Profile, checks, plan: SamplingPlan, cfg: SimConfig, tol: float,
               bins: int, density_tol: float | None) -> list[VerificationReport]:
    reports = []
    flow = None
    for check in checks:
        if check in ("d1", "d2", "d3", "reflections") and flow is None:
            flow = sample_flow(prof, plan, cfg)
        if check == "d1":
            reports.append(check_zero_resistance(prof, plan, cfg, tol, flow=flow))
        elif check == "d2":
            reports.append(check_trackless(prof, plan, cfg, bins, density_tol,
                                           velocity_tol=tol, flow=flow))
        elif check == "d3":
            reports.append(check_invisible(prof, plan, cfg, tol, flow=flow))
        elif check == "reflections":
            reports.append(check_reflections(prof, plan, cfg, tol, flow=flow))
    return reports


def cmd_verify(args) -> int:
    prof = build_profile(args)
    checks = [c.strip().lower() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise ConfigError(f"unknown checks: {sorted(unknown)}")
    cfg = SimConfig(max_bounces=args.max_bounces)
    plan = _plan(args)
    flows = [("down", cfg)] + ([("up", cfg.reversed())] if args.both_directions else [])
    if args.reverse:
        flows = [("up", cfg.reversed())]
    dynamic = [c for c in checks if c != "inscribed"]
    results = []
    for label, c in flows:
        for rep in run_checks(prof, dynamic, plan, c, args.tol, args.bins, args.density_tol):
            rep.details["flow"] = label
            results.append(rep)
    if "inscribed" in checks:
        results.append(_inscribed_report(prof, args))
    text = io.dump_json([r.to_dict() for r in results], args.out)
    if args.out is None:
        sys.stdout.write(text)
    for r in results:
        print(f"{r.check:12s} {'PASS' if r.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def cmd_metrics(args) -> int:
    prof = build_profile(args)
    text = io.dump_json(shape_metrics(prof).to_dict(), args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    rows = sweep(args.family, args.alpha_min, args.alpha_max, args.steps, args.k, args.n,
                 args.max_bounces)
    text = io.write_sweep_csv(rows, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zerodrag", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="write a profile JSON and its SVG")
    _body_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("trace", help="trace particles, write scatter CSV (+ SVG)")
    _body_args(p)
    p.add_argument("--x0", type=parse_number, action="append")
    p.add_argument("--n", type=int, default=21)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.add_argument("--reverse", action="store_true", help="flow upward instead")
    p.add_argument("--max-bounces", type=int, default=10_000)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("verify", help="run flow checks, write report JSON")
    _body_args(p)
    p.add_argument("--checks", default="d1")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--strategy", choices=("stratified", "uniform"), default="stratified")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=parse_number, default=1e-9)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--density-tol", type=parse_number)
    p.add_argument("--reverse", action="store_true", help="flow upward instead")
    p.add_argument("--both-directions", action="store_true")
    p.add_argument("--r-in", type=parse_number)
    p.add_argument("--r-out", type=parse_number)
    p.add_argument("--cyl-height", type=parse_number)
    p.add_argument("--max-bounces", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("metrics", help="volume, hull ratio and relative height")
    _body_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("sweep", help="metrics and reflection counts over alpha")
    p.add_argument("family", choices=("triangle-pair", "trapezoid-pair"))
    p.add_argument("--alpha-min", type=parse_number, required=True)
    p.add_argument("--alpha-max", type=parse_number, required=True)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--k", type=parse_number)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--max-bounces", type=int, default=10_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default", NearDegenerateWarning)
            return args.func(args)
    except (ConfigError, BodyParameterError, GeometryError, VerificationError,
            ValueError, OSError) as exc:
        print(f"zerodrag: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
