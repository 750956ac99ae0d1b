"""Command-line entry point.

Exit codes: 0 success, 2 invalid input or configuration, 3 infeasible
instance, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .analysis import extremal_distributions
from .errors import DomainError, InfeasibleError, NumericalError
from .experiments import DEFAULT_BOUNDS_GRID, sweep_antennas, sweep_rotation, validate_bounds
from .geometry import db_to_linear
from .planner import POLICIES, make_plan
from .rates import max_min_rate
from .scenarios import (SCHEMA_VERSION, Scenario, load_scenario, scenario_distribution_I,
                        scenario_distribution_II)

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read_scenario(path) -> Scenario:
    if path in (None, "-"):
        return Scenario.from_json(sys.stdin.read())
    return load_scenario(path)


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def cmd_gen_scenario(args):
    overrides = {}
    if args.B is not None:
        overrides["B"] = args.B
    if args.N is not None:
        overrides["N"] = args.N
    if args.min_rate is not None:
        overrides["min_rate"] = args.min_rate
    if args.gamma0_db is not None:
        overrides["gamma0"] = db_to_linear(args.gamma0_db)
    if args.kind == "dist1":
        scenario = scenario_distribution_I(**overrides)
    else:
        scenario = scenario_distribution_II(cluster_weight=args.dist2_cluster_weight, **overrides)
    if args.seed is not None:
        scenario = Scenario(scenario.name, scenario.cfg, scenario.profile, args.seed,
                            scenario.notes)
    _emit(scenario.to_json(), args.out)


def cmd_optimize(args):
    scenario = _read_scenario(args.scenario)
    cfg = scenario.cfg
    if not args.lenient:
        max_min_rate(cfg.N, scenario.profile.K, cfg.gamma0, required=cfg.min_rate)
    plan = make_plan(args.policy, cfg, scenario.profile, strict=not args.lenient)
    doc = {"schema_version": SCHEMA_VERSION, "scenario": scenario.name, "seed": scenario.seed}
    doc.update(plan.to_dict())
    _emit(_dumps(doc), args.out)


def cmd_sweep_z0(args):
    scenario = _read_scenario(args.scenario)
    result = sweep_rotation(scenario, args.B or [scenario.cfg.B])
    _emit(result.to_csv(), args.out)


def cmd_sweep_n(args):
    scenario = _read_scenario(args.scenario)
    result = sweep_antennas(scenario, args.policies, args.N or None)
    _emit(result.to_csv(), args.out)


def cmd_validate_bounds(args):
    grid = DEFAULT_BOUNDS_GRID
    if args.point:
        grid = [tuple(p) for p in args.point]
    report = validate_bounds(grid, trials=args.trials, seed=args.seed)
    _emit(report.to_csv(), args.out)
    return EXIT_OK if report.all_passed else EXIT_NUMERICAL


def cmd_analyze_extremal(args):
    if args.scenario:
        scenario = _read_scenario(args.scenario)
        K, N, B, gamma0 = scenario.profile.K, scenario.cfg.N, scenario.cfg.B, scenario.cfg.gamma0
    else:
        K, N, B, gamma0 = args.K, args.N, args.B, db_to_linear(args.gamma0_db)
    result = extremal_distributions(K, B, N, gamma0)
    doc = {"schema_version": SCHEMA_VERSION}
    doc.update(result.to_dict())
    _emit(json.dumps(doc, indent=2) + "\n", args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flexsector",
        description="Flexible-sector base station: rotation/antenna planning and rate analysis.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", help="write a reference scenario as JSON")
    p.add_argument("kind", choices=("dist1", "dist2"))
    p.add_argument("--dist2-cluster-weight", type=float, default=0.8,
                   help="fraction of users inside zones 16-25 (dist2 only)")
    p.add_argument("--B", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--min-rate", type=float)
    p.add_argument("--gamma0-db", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("optimize", help="plan rotation and antenna allocation")
    p.add_argument("scenario", nargs="?", default="-", help="scenario JSON (default: stdin)")
    p.add_argument("--policy", choices=POLICIES, default="flexible")
    p.add_argument("--lenient", action="store_true",
                   help="return a flagged plan instead of failing on infeasible instances")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep-z0", help="sum rate versus rotation index (CSV)")
    p.add_argument("scenario", nargs="?", default="-")
    p.add_argument("--B", type=_int_list, help="comma-separated sector counts")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_z0)

    p = sub.add_parser("sweep-n", help="sum rate of each policy versus antenna budget (CSV)")
    p.add_argument("scenario", nargs="?", default="-")
    p.add_argument("--N", type=_int_list, help="comma-separated antenna budgets")
    p.add_argument("--policies", type=lambda s: s.split(","), default=list(POLICIES))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_n)

    p = sub.add_parser("validate-bounds", help="Monte-Carlo check of the rate bounds (CSV)")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--point", nargs=4, type=float, action="append",
                   metavar=("N_B", "Q_B", "B", "GAMMA0_DB"),
                   help="grid point; repeat for several (default: built-in grid)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate_bounds)

    p = sub.add_parser("analyze-extremal", help="best/worst user layouts and rate gap (JSON)")
    p.add_argument("scenario", nargs="?", help="take K, N, B, gamma0 from a scenario file")
    p.add_argument("--K", type=float, default=50.0)
    p.add_argument("--N", type=float, default=90.0)
    p.add_argument("--B", type=int, default=3)
    p.add_argument("--gamma0-db", type=float, default=0.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze_extremal)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "point", None):
        for p in args.point:
            if not all(float(x).is_integer() for x in p[:3]):
                parser.error("N_B, Q_B and B must be integers")
        args.point = [(int(p[0]), int(p[1]), int(p[2]), p[3]) for p in args.point]
    if getattr(args, "policies", None):
        bad = [p for p in args.policies if p not in POLICIES]
        if bad:
            parser.error(f"unknown policy {bad[0]!r}")
    try:
        code = args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
