"""Command line entry point: ``hetmec {validate,solve,sweep,robustness,oracle}``.

Exit codes: 0 ok, 2 config or flag error, 3 congested, 4 oracle budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, dump_json, fmt, load_config
from .constraints import assemble_constraints, constraint_count
from .oracle import DEFAULT_BUDGET, OracleBudgetError, oracle_grid_search
from .robustness import (
    classify_bottleneck,
    evaluate_insertion,
    insertion_from_mapping,
    max_supportable_rate,
)
from .schemes import SchemeId, sweep
from .solver import solve_lma
from .topology import TopologyError

EXIT_OK, EXIT_CONFIG, EXIT_CONGESTED, EXIT_BUDGET = 0, 2, 3, 4

CSV_HEADER = ["scheme", "lambda_scale", "system_latency", "processing_rate_per_ed", "status"]


class UsageError(Exception):
    pass


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    topo = cfg.topology
    k_c, k_t, k = constraint_count(topo)
    sizes = topo.layer_sizes()
    print(f"N={topo.layer_count} M={sizes} EDs={len(topo.eds)} D={topo.dim}")
    print(f"K={k} K_c={k_c} K_t={k_t} rho={cfg.scenario.rho}")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    sol = solve_lma(cfg.topology, cfg.scenario, tol=args.tol)
    cs = assemble_constraints(cfg.topology, cfg.scenario)
    if sol.congested:
        dump_json({"status": "congested", "diagnostics": sol.as_dict(cfg.topology)["diagnostics"]}, args.out)
        print("congested: no feasible vertex", file=sys.stderr)
        return EXIT_CONGESTED
    dump_json(sol.as_dict(cfg.topology, cs), args.out)
    print(f"L*={fmt(sol.latency.total)} s*={[fmt(x) for x in sol.s_star]}")
    return EXIT_OK


def _scales(lo: float, hi: float, steps: int) -> list[float]:
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    if lo > hi:
        raise UsageError("--scale-min must not exceed --scale-max")
    if lo < 0:
        raise UsageError("scales must be nonnegative")
    return [lo] if steps == 1 else [float(x) for x in np.linspace(lo, hi, steps)]


def cmd_sweep(args) -> int:
    try:
        schemes = [SchemeId.parse(s) for s in args.schemes.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"unknown scheme in --schemes: {exc}") from exc
    if not schemes:
        raise UsageError("--schemes is empty")
    if args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    scales = _scales(args.scale_min, args.scale_max, args.steps)
    cfg = load_config(args.config)
    rows = sweep(cfg.topology, cfg.scenario, scales, schemes, jobs=args.jobs)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r.scheme.value,
                fmt(r.lambda_scale),
                "" if r.system_latency is None else fmt(r.system_latency),
                fmt(r.processing_rate_per_ed),
                r.status,
            ])
    return EXIT_OK


def _load_layer(arg: str) -> dict:
    path = Path(arg)
    try:
        text = path.read_text(encoding="utf-8") if path.exists() else arg
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--insert: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def cmd_robustness(args) -> int:
    cfg = load_config(args.config)
    topo, sc = cfg.topology, cfg.scenario
    if (args.insert is None) != (args.position is None):
        raise UsageError("--insert and --position go together")
    if args.insert is not None:
        insertion = insertion_from_mapping(_load_layer(args.insert), args.position)
        insertion.apply(topo)  # wiring errors surface before any solving
        report = evaluate_insertion(topo, insertion, sc.rho, sc.gen_rate, tol=args.tol)
        out = {
            "t_star": report.t_before,
            "bottleneck": report.bottleneck.as_dict(),
            "insertion": report.as_dict(),
        }
    else:
        t_star = max_supportable_rate(topo, sc.rho, sc.gen_rate, tol=args.tol)
        out = {"t_star": t_star,
               "bottleneck": classify_bottleneck(topo, sc.rho, sc.gen_rate, t_star, args.tol).as_dict()}
    out["max_rate_per_ed_mbps"] = [out["t_star"] * x for x in sc.gen_rate]
    dump_json(out, args.out)
    print(f"t*={fmt(out['t_star'])} bottleneck={out['bottleneck']['kind']}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    if not 0.0 < args.grid_step <= 1.0:
        raise UsageError("--grid-step must lie in (0, 1]")
    cfg = load_config(args.config)
    sol = oracle_grid_search(cfg.topology, cfg.scenario, args.grid_step, budget=args.budget)
    dump_json(sol.as_dict(cfg.topology), args.out)
    if sol.congested:
        print("congested: no feasible grid point", file=sys.stderr)
        return EXIT_CONGESTED
    print(f"L_grid={fmt(sol.latency.total)} s={[fmt(x) for x in sol.s_star]}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetmec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a scenario file and print constraint counts")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="latency-optimal split and allocation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="scheme comparison over generation-rate scales (CSV)")
    p.add_argument("--config", required=True)
    p.add_argument("--schemes", default="lma,cloud,local,mec")
    p.add_argument("--scale-min", type=float, required=True)
    p.add_argument("--scale-max", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("robustness", help="maximum supportable rate and bottleneck")
    p.add_argument("--config", required=True)
    p.add_argument("--insert", help="JSON file (or inline JSON) describing a layer to insert")
    p.add_argument("--position", type=int, help="insert between layers K-1 and K")
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("oracle", help="exhaustive grid search for cross-checking solve")
    p.add_argument("--config", required=True)
    p.add_argument("--grid-step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, TopologyError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OracleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
