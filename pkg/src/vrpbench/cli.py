"""Command line entry point: ``vrpbench <subcommand>``."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import generators as gen
from . import harness, normalization, solver
from .instance import GridScale, rescale_instance
from .vrplib import (
    format_routes,
    read_bks_file,
    read_results_file,
    read_vrplib,
    write_bks_file,
    write_vrplib_file,
)

log = logging.getLogger("vrpbench")


def _demand_model(text: str):
    text = text.lower()
    if text == "unitary":
        return gen.Unitary()
    if text in ("x", "xmix", "x-mix"):
        return gen.XTypeMix()
    if text.startswith("gamma"):
        args = text[len("gamma"):].strip("():")
        if not args:
            return gen.Gamma()
        shape, scale = (float(v) for v in args.split(","))
        return gen.Gamma(shape, scale)
    lo, sep, hi = text.partition("-")
    if sep and lo.isdigit() and hi.isdigit():
        return gen.UniformInt(int(lo), int(hi))
    raise argparse.ArgumentTypeError(f"unknown demand model {text!r}")


def _coord_model(args):
    if args.coords == "uniform":
        return gen.Uniform()
    if args.coords == "gm":
        return gen.GaussianMixture(args.modes, args.mode_std)
    if args.customers == "random":
        pos = gen.RandomPositions()
    elif args.customers == "clustered":
        pos = gen.Clustered(args.clusters, args.decay)
    else:
        pos = gen.RandomClustered(args.fraction, args.clusters, args.decay)
    return gen.XType(args.depot, pos)


def cmd_generate(args) -> int:
    capacity = (gen.FromAvgRouteSize(args.route_size) if args.route_size
                else gen.Fixed(args.capacity))
    config = gen.GeneratorConfig(
        n=args.n, seed=args.seed, coord_dist=_coord_model(args),
        demand_dist=args.demands, capacity_rule=capacity, name=args.name,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for inst in gen.generate_many(config, args.count):
        if inst.grid.is_unit_square:
            inst = rescale_instance(inst, GridScale.integer_grid(args.precision))
        if args.time_limit is not None:
            inst = inst.with_changes(time_limit=args.time_limit)
        path = out / f"{inst.id}.vrp"
        write_vrplib_file(inst, path)
        print(path)
    return 0


def cmd_solve_base(args) -> int:
    instance = read_vrplib(args.instance)
    solver.warmup()
    origin = time.perf_counter()

    def emit(t, cost, sol):
        print(harness.format_incumbent(t, cost, sol.routes), flush=True)

    start = solver.savings_construct(instance)
    traj = solver.sa_improve(
        instance, start, args.time_limit, args.seed,
        max_moves=args.max_moves, on_incumbent=emit, clock_start=origin,
    )
    print("DONE", flush=True)
    if args.out:
        sol = traj.final_solution
        Path(args.out).write_text(f"{sol.cost!r} {format_routes(sol.routes)}\n")
    return 0


def _machine(args) -> normalization.MachineSpec:
    if args.machine:
        spec = normalization.load_machine_spec(args.machine)
    else:
        log.warning("no --machine given; assuming the reference CPU (score %g)",
                    normalization.CPU_BASE_SCORE)
        spec = normalization.MachineSpec(normalization.CPU_BASE_SCORE)
    return spec.with_mode(args.mode) if args.mode else spec


def cmd_run(args) -> int:
    if args.solver_cmd:
        cmd = harness.split_command(args.solver_cmd)
        solver_id = args.solver_id or Path(cmd[0]).name
        is_base = False
    else:
        cmd = harness.BASE_SOLVER_CMD
        solver_id = args.solver_id or solver.BASE_SOLVER_ID
        is_base = True
    out = Path(args.out)
    plan = harness.RunPlan(
        sets=harness.collect_files(args.instances, args.set_name),
        solver_cmd=tuple(cmd),
        solver_id=solver_id,
        runs=args.runs,
        budget=harness.parse_budget(args.time_limit),
        machine=_machine(args),
        out_dir=out,
        seed=args.seed,
        bks_path=Path(args.bks) if args.bks else None,
        grace=args.grace,
        workers=args.workers,
        candidate_is_base=is_base,
    )
    result = harness.orchestrate(plan)
    if not result.records:
        log.error("no instance produced results")
        return 1
    bundle = harness.emit_report(result.records, result.skipped)
    bundle.write(out)
    sys.stdout.write(bundle.text)
    for d in result.bks_updates:
        if d.new is not None:
            print(f"BKS improved: {d.instance_id} {d.new.cost!r} by {d.new.algorithm}")
    return 0


def cmd_report(args) -> int:
    records = []
    for path in args.results:
        records.extend(read_results_file(path))
    bundle = harness.emit_report(records)
    if args.out:
        bundle.write(args.out)
    sys.stdout.write(bundle.text)
    return 0


def cmd_bks(args) -> int:
    instances = {}
    for bset in harness.collect_files(args.instances or []):
        for f in bset.files:
            inst = read_vrplib(f)
            instances[inst.id] = inst
    registry = read_bks_file(args.bks, instances or None)
    if args.action == "show":
        ids = args.ids or sorted(registry)
        for inst_id in ids:
            rec = registry.get(inst_id)
            if rec is None:
                print(f"{inst_id} -")
            else:
                flag = "opt" if rec.optimal else "not_opt"
                print(f"{inst_id} {rec.cost!r} {rec.algorithm} {flag} routes={len(rec.routes)}")
        return 0
    candidates = []
    for path in args.results:
        for rec in read_results_file(path):
            if rec.cost is not None and rec.solution:
                candidates.append((rec.instance_id, rec.cost, rec.solution, rec.solver_id))
    delta = harness.update_bks(registry, candidates, instances or None)
    applied = harness.apply_bks_updates(registry, delta)
    for d in delta:
        status = f"-> {d.new.cost!r}" if d.new is not None else "rejected"
        print(f"{d.instance_id}: {status} ({d.reason})")
    if applied:
        write_bks_file(args.bks, registry)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vrpbench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="sample instances and write VRPLIB files")
    p.add_argument("--coords", choices=("uniform", "gm", "x"), default="uniform")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--demands", type=_demand_model, default="1-10",
                   help="unitary, LO-HI, gamma(SHAPE,SCALE) or x")
    p.add_argument("--capacity", type=float, default=50.0)
    p.add_argument("--route-size", type=float, help="derive capacity from average route size")
    p.add_argument("--modes", type=int, help="gaussian-mixture modes (default: random 1..7)")
    p.add_argument("--mode-std", type=float, default=0.07)
    p.add_argument("--depot", choices=gen.DEPOT_POSITIONS, default="random")
    p.add_argument("--customers", choices=("random", "clustered", "random-clustered"),
                   default="random")
    p.add_argument("--clusters", type=int)
    p.add_argument("--decay", type=float, default=40.0)
    p.add_argument("--fraction", type=float, default=0.5)
    p.add_argument("--precision", type=float, default=10000.0,
                   help="integer grid used when writing unit-square instances")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve-base", help="run the reference solver over the adapter protocol")
    p.add_argument("--instance", required=True)
    p.add_argument("--time-limit", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-moves", type=int)
    p.add_argument("--out", help="also write the final solution here")
    p.set_defaults(func=cmd_solve_base)

    p = sub.add_parser("run", help="benchmark a solver on instance files or directories")
    p.add_argument("instances", nargs="+")
    p.add_argument("--solver-cmd", help="adapter command (default: the reference solver)")
    p.add_argument("--solver-id")
    p.add_argument("--set-name", default="default", help="set name for loose files")
    p.add_argument("--time-limit", default="implicit", help="seconds or 'implicit' (2.4 N)")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--machine", help="machine spec TOML file")
    p.add_argument("--mode", choices=[m.value for m in normalization.Mode])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bks", help="BKS registry file (read and updated)")
    p.add_argument("--grace", type=float, default=harness.GRACE_SECONDS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="rebuild the report from results files")
    p.add_argument("results", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("bks", help="inspect or update a BKS registry")
    p.add_argument("action", choices=("show", "update"))
    p.add_argument("ids", nargs="*", help="instance ids to show (place before the options)")
    p.add_argument("--bks", required=True)
    p.add_argument("--instances", nargs="*", help="instance files or directories for validation")
    p.add_argument("--results", nargs="*", default=[])
    p.set_defaults(func=cmd_bks)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
