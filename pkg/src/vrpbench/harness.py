"""Benchmark orchestration: adapter protocol, budgets, base trajectories,
scoring, BKS maintenance and reports.

Solvers run as child processes invoked as
``<cmd> --instance <path> --time-limit <seconds> --seed <u64>`` and stream
``INCUMBENT <elapsed> <cost> [routes]`` lines followed by ``DONE`` on stdout.
Routes use customer indices ``1..N`` (depot first in the file, depot omitted
in the routes), ``;`` between routes and ``,`` between customers.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import queue
import shlex
import subprocess
import sys
import threading
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

from . import metrics, normalization, solver
from .instance import Instance, Solution, check_feasibility, evaluate_cost
from .trajectory import Trajectory
from .vrplib import (
    BksRecord,
    ResultRecord,
    append_results,
    atomic_write,
    format_routes,
    parse_routes,
    read_bks_file,
    read_vrplib,
    write_bks_file,
)

log = logging.getLogger(__name__)

GRACE_SECONDS = 1.0
DIVERGENCE_TOLERANCE = 0.05
IMPLICIT_SECONDS_PER_CUSTOMER = 2.4
COST_RTOL = 1e-6


class ProtocolError(RuntimeError):
    """A solver wrote a line that is not part of the adapter protocol."""


# ---------------------------------------------------------------- adapter


@dataclass(frozen=True)
class AdapterEvent:
    kind: str  # "incumbent", "done" or "error"
    elapsed: float | None = None
    cost: float | None = None
    routes: tuple[tuple[int, ...], ...] | None = None
    wall: float = 0.0
    text: str = ""


def parse_protocol_line(line: str, wall: float = 0.0) -> AdapterEvent:
    parts = line.split()
    if parts == ["DONE"]:
        return AdapterEvent("done", wall=wall, text=line)
    if parts and parts[0] == "INCUMBENT" and len(parts) in (3, 4):
        try:
            elapsed = float(parts[1])
            cost = float(parts[2])
            routes = tuple(tuple(r) for r in parse_routes(parts[3])) if len(parts) == 4 else None
        except ValueError:
            raise ProtocolError(f"malformed incumbent line: {line!r}") from None
        if not (math.isfinite(elapsed) and elapsed >= 0 and math.isfinite(cost)):
            raise ProtocolError(f"malformed incumbent line: {line!r}")
        return AdapterEvent("incumbent", elapsed, cost, routes, wall, line)
    raise ProtocolError(f"unexpected solver output: {line!r}")


def format_incumbent(elapsed: float, cost: float, routes=None) -> str:
    line = f"INCUMBENT {elapsed!r} {cost!r}"
    if routes:
        line += " " + format_routes(routes)
    return line


def _pump(stream, sink: queue.Queue) -> None:
    for raw in stream:
        sink.put((time.perf_counter(), raw))
    sink.put((time.perf_counter(), None))


def run_adapter(
    solver_cmd: Sequence[str],
    instance_file: str | os.PathLike,
    budget: float,
    seed: int,
    *,
    instance: Instance | None = None,
    grace: float = GRACE_SECONDS,
    extra_args: Sequence[str] = (),
    stderr_path: str | os.PathLike | None = None,
    produced_by: str = "",
) -> Trajectory:
    """Run one solver process and collect its incumbents in wall seconds.

    Events past ``budget`` are discarded, non-improving ones rejected and,
    when ``instance`` is given, route payloads are checked for feasibility
    and cost agreement. Diagnostics end up in ``traj.meta["warnings"]``.
    """
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    cmd = [*solver_cmd, "--instance", str(instance_file), "--time-limit", repr(float(budget)),
           "--seed", str(int(seed)), *extra_args]
    warnings: list[str] = []
    accepted: list[AdapterEvent] = []
    solutions: list[Solution | None] = []

    def warn(msg: str) -> None:
        warnings.append(msg)
        log.warning("%s: %s", Path(instance_file).name, msg)

    err_fh = open(stderr_path, "w") if stderr_path else subprocess.DEVNULL
    start = time.perf_counter()
    try:
        proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=err_fh, text=True,
                                encoding="utf-8", bufsize=1)
    except OSError:
        if stderr_path:
            err_fh.close()
        raise
    lines: queue.Queue = queue.Queue()
    reader = threading.Thread(target=_pump, args=(proc.stdout, lines), daemon=True)
    reader.start()
    deadline = start + budget + grace
    killed = False
    done = False
    try:
        while True:
            remaining = deadline - time.perf_counter()
            if remaining <= 0:
                killed = True
                break
            try:
                stamp, raw = lines.get(timeout=remaining)
            except queue.Empty:
                killed = True
                break
            if raw is None:
                break
            line = raw.strip()
            if not line:
                continue
            event = parse_protocol_line(line, stamp - start)
            if event.kind == "done":
                done = True
                break
            _accept(event, accepted, solutions, budget, instance, warn)
    finally:
        if not killed:
            # after DONE or EOF the child gets until the deadline to exit
            try:
                proc.wait(timeout=max(0.0, deadline - time.perf_counter()))
            except subprocess.TimeoutExpired:
                killed = True
        if killed:
            warn(f"killed after exceeding budget {budget:.3f}s + {grace:g}s grace")
            proc.kill()
            proc.wait()
        if stderr_path:
            err_fh.close()

    returncode = proc.returncode
    if not killed and returncode not in (0, None):
        if not accepted:
            warn(f"solver exited with status {returncode} before any incumbent")
        else:
            warn(f"solver exited with status {returncode}")
    if not done and not killed and returncode == 0:
        warn("solver exited without DONE")
    _check_divergence(accepted, warn)

    entries = [(e.elapsed, e.cost, s) for e, s in zip(accepted, solutions)]
    traj = Trajectory.from_entries(entries, budget, produced_by)
    traj.meta.update(warnings=warnings, returncode=returncode, killed=killed,
                     wall=[e.wall for e in accepted])
    return traj


def _accept(event: AdapterEvent, accepted: list, solutions: list, budget: float,
            instance: Instance | None, warn) -> None:
    if event.elapsed > budget:
        warn(f"discarded incumbent reported at {event.elapsed:.3f}s past the budget")
        return
    solution = None
    if event.routes is not None and instance is not None:
        try:
            report = check_feasibility(instance, event.routes)
            cost = evaluate_cost(instance, event.routes) if report.ok else None
        except Exception as exc:  # malformed indices
            warn(f"dropped incumbent with unreadable routes: {exc}")
            return
        if not report.ok:
            warn(f"dropped infeasible incumbent: {'; '.join(report.violations[:3])}")
            return
        if abs(cost - event.cost) > COST_RTOL * max(1.0, abs(cost)):
            warn(f"dropped incumbent: reported cost {event.cost!r}, routes cost {cost!r}")
            return
        solution = Solution(event.routes, event.cost)
    elif event.routes is not None:
        solution = Solution(event.routes, event.cost)
    if accepted:
        last = accepted[-1]
        if event.cost >= last.cost:
            warn(f"rejected non-improving incumbent {event.cost!r} (best {last.cost!r})")
            return
        if event.elapsed < last.elapsed:
            warn(f"rejected incumbent with decreasing elapsed time {event.elapsed!r}")
            return
        if event.elapsed == last.elapsed:
            accepted.pop()
            solutions.pop()
    accepted.append(event)
    solutions.append(solution)


def _check_divergence(accepted: Sequence[AdapterEvent], warn) -> None:
    """Compare solver-reported and harness-observed time spans."""
    if len(accepted) < 2:
        return
    reported = accepted[-1].elapsed - accepted[0].elapsed
    observed = accepted[-1].wall - accepted[0].wall
    if abs(reported - observed) > max(DIVERGENCE_TOLERANCE * observed, 0.05):
        warn(f"solver clock diverges from wall clock: {reported:.3f}s reported, "
             f"{observed:.3f}s observed")


# --------------------------------------------------------------- planning


@dataclass(frozen=True)
class FixedBudget:
    seconds: float

    def __post_init__(self):
        if not self.seconds > 0:
            raise ValueError("budget must be positive")

    def seconds_for(self, instance: Instance) -> float:
        return float(self.seconds)


@dataclass(frozen=True)
class ImplicitBudget:
    """``2.4 * N`` reference seconds."""

    def seconds_for(self, instance: Instance) -> float:
        return IMPLICIT_SECONDS_PER_CUSTOMER * instance.n


BudgetRule = Union[FixedBudget, ImplicitBudget]


def parse_budget(text: str) -> BudgetRule:
    if text.strip().lower() == "implicit":
        return ImplicitBudget()
    return FixedBudget(float(text))


@dataclass(frozen=True)
class BenchmarkSet:
    name: str
    files: tuple[Path, ...]


BASE_SOLVER_CMD = (sys.executable, "-m", "vrpbench", "solve-base")


@dataclass(frozen=True)
class RunPlan:
    sets: tuple[BenchmarkSet, ...]
    solver_cmd: tuple[str, ...] = BASE_SOLVER_CMD
    solver_id: str = solver.BASE_SOLVER_ID
    runs: int = 3
    budget: BudgetRule = ImplicitBudget()
    machine: normalization.MachineSpec = normalization.MachineSpec(
        normalization.CPU_BASE_SCORE)
    out_dir: Path = Path("results")
    seed: int = 0
    bks_path: Path | None = None
    base_cache_dir: Path | None = None
    grace: float = GRACE_SECONDS
    workers: int = 1
    # the candidate is the in-repo base solver, so its runs can stand in for
    # base runs with the same seed and budget
    candidate_is_base: bool = True

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if not self.sets or not any(s.files for s in self.sets):
            raise ValueError("the plan contains no instances")

    @property
    def candidate_score(self) -> tuple[float, float]:
        return (normalization.machine_score(self.machine),
                normalization.reference_base(self.machine.mode).score)

    @property
    def base_score(self) -> tuple[float, float]:
        # the base solver is single-threaded CPU code
        return self.machine.cpu_mark_single, normalization.CPU_BASE_SCORE

    def cache_dir(self) -> Path:
        return solver.cache_dir_from_env(self.base_cache_dir or self.out_dir / "base_cache")


# ----------------------------------------------------------- base cache


def _base_key(instance: Instance, budget: float, seed: int, score: tuple[float, float]) -> str:
    payload = json.dumps([instance.fingerprint(), repr(float(budget)), int(seed),
                          [repr(float(s)) for s in score], solver.BASE_SOLVER_ID])
    return hashlib.sha256(payload.encode()).hexdigest()[:32]


class BaseTrajectoryCache:
    """Normalized base trajectories keyed by instance, reference budget,
    seed and machine score. Thread-safe; persisted as one JSON file each."""

    def __init__(self, directory: Path | None):
        self.directory = directory
        self._memory: dict[str, Trajectory] = {}
        self._lock = threading.Lock()

    def _path(self, key: str) -> Path | None:
        return None if self.directory is None else self.directory / f"{key}.json"

    def get(self, key: str) -> Trajectory | None:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
            path = self._path(key)
            if path is not None and path.exists():
                traj = Trajectory.from_dict(json.loads(path.read_text()))
                self._memory[key] = traj
                return traj
        return None

    def put(self, key: str, traj: Trajectory) -> Trajectory:
        """Store unless present; returns the cached trajectory."""
        with self._lock:
            if key in self._memory:
                return self._memory[key]
            self._memory[key] = traj
            path = self._path(key)
            if path is not None:
                atomic_write(path, json.dumps(traj.to_dict()))
            return traj


def base_trajectory(instance: Instance, t_ref: float, seed: int, plan: RunPlan,
                    cache: BaseTrajectoryCache) -> Trajectory:
    key = _base_key(instance, t_ref, seed, plan.base_score)
    cached = cache.get(key)
    if cached is not None:
        return cached
    s, s_base = plan.base_score
    wall = normalization.normalize_budget(t_ref, s, s_base)
    solver.warmup()
    raw = solver.solve_base(instance, wall, seed, use_cache=False)
    return cache.put(key, normalization.renormalize_trajectory(raw, s, s_base, budget=t_ref))


# -------------------------------------------------------------- BKS update


@dataclass(frozen=True)
class BksUpdate:
    instance_id: str
    old: BksRecord | None
    new: BksRecord | None  # None when rejected
    reason: str


def update_bks(registry: Mapping[str, BksRecord], candidates: Sequence[tuple],
               instances: Mapping[str, Instance] | None = None) -> list[BksUpdate]:
    """Decide registry changes from ``(instance_id, cost, routes, solver_id)``.

    A candidate replaces the stored record when it is cheaper by more than
    1e-6, carries routes, and (if the instance is known) those routes are
    feasible with matching cost. Optimal records are never replaced.
    """
    best: dict[str, tuple] = {}
    for inst_id, cost, routes, solver_id in candidates:
        if inst_id not in best or cost < best[inst_id][0]:
            best[inst_id] = (cost, routes, solver_id)
    delta = []
    for inst_id in sorted(best):
        cost, routes, solver_id = best[inst_id]
        old = registry.get(inst_id)
        if old is not None and not cost < old.cost - 1e-6:
            continue
        if not routes:
            delta.append(BksUpdate(inst_id, old, None, "improvement claimed without routes"))
            continue
        if instances is not None and inst_id in instances:
            inst = instances[inst_id]
            report = check_feasibility(inst, routes)
            actual = evaluate_cost(inst, routes) if report.ok else math.nan
            if not report.ok or abs(actual - cost) > COST_RTOL * max(1.0, abs(cost)):
                delta.append(BksUpdate(inst_id, old, None, "routes infeasible or cost mismatch"))
                continue
        if old is not None and old.optimal:
            delta.append(BksUpdate(inst_id, old, None,
                                   "beats a record flagged optimal; feasibility suspect"))
            continue
        new = BksRecord(inst_id, cost, routes, solver_id or "unknown", False)
        delta.append(BksUpdate(inst_id, old, new, "improved"))
    for d in delta:
        if d.new is None:
            log.warning("BKS update for %s rejected: %s", d.instance_id, d.reason)
    return delta


def apply_bks_updates(registry: dict[str, BksRecord], delta: Sequence[BksUpdate]) -> int:
    applied = 0
    for d in delta:
        if d.new is not None:
            registry[d.instance_id] = d.new
            applied += 1
    return applied


# ------------------------------------------------------------ orchestrate


@dataclass
class InstanceOutcome:
    set_id: str
    instance_id: str
    records: list[ResultRecord] = field(default_factory=list)
    skipped: str | None = None
    bks_candidates: list[tuple] = field(default_factory=list)


@dataclass
class ResultSet:
    records: list[ResultRecord]
    skipped: list[tuple[str, str, str]]  # (set, instance, reason)
    bks_updates: list[BksUpdate]


def _bks_for(instance: Instance, registry: Mapping[str, BksRecord]) -> float | None:
    known = [c for c in (instance.bks_cost,
                         registry[instance.id].cost if instance.id in registry else None)
             if c is not None]
    return min(known) if known else None


def _run_instance(plan: RunPlan, set_id: str, path: Path, registry: Mapping[str, BksRecord],
                  cache: BaseTrajectoryCache) -> InstanceOutcome:
    try:
        instance = read_vrplib(path)
    except Exception as exc:
        return InstanceOutcome(set_id, path.stem, skipped=f"unreadable instance: {exc}")
    outcome = InstanceOutcome(set_id, instance.id)
    t_ref = plan.budget.seconds_for(instance)
    s, s_base = plan.candidate_score
    wall = normalization.normalize_budget(t_ref, s, s_base)
    log_dir = plan.out_dir / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    shares_base = plan.candidate_is_base and (s, s_base) == plan.base_score

    cands, bases = [], []
    for r in range(plan.runs):
        seed = plan.seed + r
        try:
            raw = run_adapter(plan.solver_cmd, path, wall, seed, instance=instance,
                              grace=plan.grace, produced_by=plan.solver_id,
                              stderr_path=log_dir / f"{instance.id}.run{r}.stderr")
        except ProtocolError as exc:
            log.error("%s run %d: %s", instance.id, r, exc)
            raw = Trajectory.empty(wall, plan.solver_id)
        except OSError as exc:
            return InstanceOutcome(set_id, instance.id, skipped=f"cannot start solver: {exc}")
        cand = normalization.renormalize_trajectory(raw, s, s_base, budget=t_ref)
        if shares_base and not cand.is_empty:
            key = _base_key(instance, t_ref, seed, plan.base_score)
            base = cache.put(key, cand)
        else:
            try:
                base = base_trajectory(instance, t_ref, seed, plan, cache)
            except Exception as exc:
                if _bks_for(instance, registry) is None:
                    return InstanceOutcome(set_id, instance.id,
                                           skipped=f"no BKS and base solver failed: {exc}")
                raise
        cands.append(cand)
        bases.append(base)

    finals = [t.final_cost for t in cands + bases if not t.is_empty]
    known = _bks_for(instance, registry)
    if known is not None:
        finals.append(known)
    if not finals:
        return InstanceOutcome(set_id, instance.id, skipped="no BKS and no solution found")
    bks = min(finals)

    for r, (cand, base) in enumerate(zip(cands, bases)):
        m = metrics.evaluate_run(cand, base, bks)
        final = cand.final_solution
        outcome.records.append(ResultRecord(
            instance_id=instance.id,
            solver_id=plan.solver_id,
            run_index=r,
            cost=cand.final_cost,
            gap=m.gap,
            pi_score=m.pi,
            wrap_score=m.wrap,
            num_vehicles=final.num_vehicles if final is not None else 0,
            normalized_budget=t_ref,
            running_costs=list(cand.costs),
            running_times=list(cand.times),
            machine=plan.machine.fingerprint(),
            set_id=set_id,
            seed=plan.seed + r,
            solution=final.as_lists() if final is not None else None,
            bks=bks,
        ))
    for traj, who in [(t, plan.solver_id) for t in cands] + \
                     [(t, solver.BASE_SOLVER_ID) for t in bases]:
        sol = traj.final_solution
        if sol is not None:
            outcome.bks_candidates.append((instance.id, sol.cost, sol.routes, who))
    return outcome


def orchestrate(plan: RunPlan) -> ResultSet:
    """Run every instance of the plan, score, persist and update the BKS."""
    plan.out_dir.mkdir(parents=True, exist_ok=True)
    results_path = plan.out_dir / "results.jsonl"
    if results_path.exists():
        results_path.unlink()
    registry = read_bks_file(plan.bks_path) if plan.bks_path else {}
    cache = BaseTrajectoryCache(plan.cache_dir())
    solver.warmup()  # also fills numba's on-disk cache for child processes

    jobs = [(bset.name, Path(f)) for bset in plan.sets for f in bset.files]
    if plan.workers == 1:
        outcomes = [_run_instance(plan, sid, p, registry, cache) for sid, p in jobs]
    else:
        with ThreadPoolExecutor(plan.workers) as pool:
            outcomes = list(pool.map(lambda j: _run_instance(plan, j[0], j[1], registry, cache),
                                     jobs))

    records = [r for o in outcomes for r in o.records]
    append_results(results_path, records)
    skipped = [(o.set_id, o.instance_id, o.skipped) for o in outcomes if o.skipped]

    instances = {}
    for _, p in jobs:
        try:
            inst = read_vrplib(p)
            instances[inst.id] = inst
        except Exception:
            pass
    delta = update_bks(registry, [c for o in outcomes for c in o.bks_candidates], instances)
    if plan.bks_path is not None and apply_bks_updates(registry, delta):
        write_bks_file(plan.bks_path, registry)
    return ResultSet(records, skipped, delta)


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class ReportBundle:
    text: str
    data: dict
    curve_csv: str

    def write(self, out_dir: str | os.PathLike) -> None:
        out = Path(out_dir)
        atomic_write(out / "report.txt", self.text)
        atomic_write(out / "report.json", json.dumps(self.data, indent=2, sort_keys=True) + "\n")
        atomic_write(out / "gap_curve.csv", self.curve_csv)


def _record_metrics(rec: ResultRecord, fractions: Sequence[float]) -> metrics.RunMetrics:
    traj = Trajectory(rec.running_times, rec.running_costs, rec.normalized_budget)
    curve = ()
    if rec.bks is not None:
        curve = tuple((f, metrics.gap_at_budget(traj, f * traj.budget, rec.bks))
                      for f in fractions)
    return metrics.RunMetrics(rec.gap, rec.pi_score, rec.wrap_score, curve)


def _stat_json(stat: metrics.Stat) -> dict:
    return {"mean": stat.mean, "std": stat.std, "count": stat.count}


def _report_json(rep: metrics.MetricReport) -> dict:
    return {
        "gap": _stat_json(rep.gap),
        "pi": _stat_json(rep.pi),
        "wrap": _stat_json(rep.wrap),
        "curve": [[f, _stat_json(s)] for f, s in rep.curve],
    }


def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[k]) for r in rows) for k in range(len(rows[0]))]
    out = io.StringIO()
    for k, row in enumerate(rows):
        out.write("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() + "\n")
        if k == 0:
            out.write("  ".join("-" * w for w in widths) + "\n")
    return out.getvalue()


def emit_report(records: Sequence[ResultRecord], skipped: Sequence[tuple] = (),
                fractions: Sequence[float] = metrics.CURVE_FRACTIONS) -> ReportBundle:
    """Per-set and per-instance tables, AVG row and gap-vs-budget curve.

    Output depends only on the records (sorted internally), so identical
    result sets give identical bytes.
    """
    if not records:
        raise ValueError("no results to report")
    grouped: dict[str, dict[str, dict[str, list]]] = defaultdict(lambda: defaultdict(dict))
    for rec in sorted(records, key=lambda r: (r.solver_id, r.set_id, r.instance_id, r.run_index)):
        grouped[rec.solver_id][rec.set_id].setdefault(rec.instance_id, []).append(
            _record_metrics(rec, fractions))

    text = io.StringIO()
    data: dict = {"solvers": {}, "skipped": [list(s) for s in sorted(skipped)]}
    curve_rows = [["solver", "set", "fraction", "gap_mean", "gap_std", "count"]]
    header = ["set", "instances", "runs", "Gap (%)", "PI", "WRAP"]
    for solver_id in sorted(grouped):
        sets = grouped[solver_id]
        set_reports = {}
        rows = [header]
        for set_id in sorted(sets):
            runs = sets[set_id]
            rep = metrics.aggregate(runs)
            set_reports[set_id] = rep
            n_runs = max(len(v) for v in runs.values())
            rows.append([set_id or "-", str(len(runs)), str(n_runs),
                         rep.gap.format(4), rep.pi.format(3), rep.wrap.format(3)])
        avg = metrics.average_reports(list(set_reports.values()))
        rows.append(["AVG", str(sum(len(v) for v in sets.values())), "",
                     avg.gap.format(4), avg.pi.format(3), avg.wrap.format(3)])
        text.write(f"solver: {solver_id}\n\n")
        text.write(_table(rows))

        inst_rows = [["set", "instance", "runs", "Gap (%)", "PI", "WRAP"]]
        inst_json = {}
        for set_id in sorted(sets):
            for inst_id, runs in sorted(sets[set_id].items()):
                rep = metrics.aggregate({inst_id: runs})
                inst_json[inst_id] = {"set": set_id, **_report_json(rep)}
                inst_rows.append([set_id or "-", inst_id, str(len(runs)),
                                  rep.gap.format(4), rep.pi.format(3), rep.wrap.format(3)])
        text.write("\nper instance\n\n")
        text.write(_table(inst_rows))

        text.write("\ngap vs budget fraction (mean over sets)\n\n")
        crow = [["fraction", "Gap (%)"]]
        for f, stat in avg.curve:
            crow.append([f"{f:g}", stat.format(4)])
        text.write(_table(crow))
        text.write("\n")

        for set_id, rep in [*sorted(set_reports.items()), ("AVG", avg)]:
            for f, stat in rep.curve:
                curve_rows.append([solver_id, set_id or "-", f"{f:g}",
                                   "" if stat.mean is None else repr(stat.mean),
                                   "" if stat.std is None else repr(stat.std), str(stat.count)])
        data["solvers"][solver_id] = {
            "sets": {k: _report_json(v) for k, v in sorted(set_reports.items())},
            "avg": _report_json(avg),
            "instances": inst_json,
        }
    if skipped:
        text.write("skipped\n\n")
        text.write(_table([["set", "instance", "reason"]]
                          + [[s, i, why] for s, i, why in sorted(skipped)]))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(curve_rows)
    return ReportBundle(text.getvalue(), data, buf.getvalue())


def collect_files(paths: Sequence[str | os.PathLike], default_set: str = "default",
                  pattern: str = "*.vrp") -> tuple[BenchmarkSet, ...]:
    """Directories become sets named after them; loose files share ``default_set``."""
    sets: dict[str, list[Path]] = defaultdict(list)
    for p in map(Path, paths):
        if p.is_dir():
            sets[p.name].extend(sorted(p.glob(pattern)))
        elif p.exists():
            sets[default_set].append(p)
        else:
            raise FileNotFoundError(p)
    return tuple(BenchmarkSet(name, tuple(files)) for name, files in sorted(sets.items()))


def split_command(text: str) -> tuple[str, ...]:
    return tuple(shlex.split(text))
