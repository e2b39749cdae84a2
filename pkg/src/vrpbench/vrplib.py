"""Reading and writing VRPLIB instances, BKS registries and result records."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .instance import (
    GridScale,
    Instance,
    InstanceError,
    Rounding,
    Solution,
    check_feasibility,
    evaluate_cost,
)


class VrplibError(ValueError):
    """Malformed VRPLIB text."""


class UnsupportedFormatError(VrplibError):
    """Valid VRPLIB, but a variant this package does not handle."""


class BksFormatError(ValueError):
    pass


class BksValidationError(ValueError):
    pass


class ResultFormatError(ValueError):
    pass


DEFAULT_PRECISION = 1000.0

_SECTIONS = ("NODE_COORD_SECTION", "DEMAND_SECTION", "DEPOT_SECTION")
_HEADER_ORDER = ("NAME", "COMMENT", "TYPE", "DIMENSION", "EDGE_WEIGHT_TYPE", "CAPACITY")
# extension keys carrying Instance fields, written in this order after CAPACITY
_FIELD_KEYS = {
    "PRECISION": "grid",
    "ROUNDING": "rounding",
    "TIME_LIMIT": "time_limit",
    "BKS": "bks_cost",
    "COORDS_DIST": "coords_dist",
    "DEPOT_TYPE": "depot_type",
    "DEMANDS_DIST": "demands_dist",
}


def format_number(x: float) -> str:
    """Integers without a decimal point, everything else round-trippable."""
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _parse_number(token: str, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise VrplibError(f"bad number {token!r} in {what}") from None


def parse_vrplib(text: str) -> Instance:
    """Parse a CVRP file with EUC_2D edge weights into an :class:`Instance`."""
    specs: dict[str, str] = {}
    sections: dict[str, list[list[str]]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        head = line.split()[0].rstrip(":")
        if head in _SECTIONS:
            current = head
            if current in sections:
                raise VrplibError(f"line {lineno}: duplicate {current}")
            sections[current] = []
            continue
        if ":" in line and not line[0].isdigit() and not line[0] == "-":
            key, _, value = line.partition(":")
            key = key.strip()
            if key in specs:
                raise VrplibError(f"line {lineno}: duplicate key {key}")
            specs[key] = value.strip()
            current = None
            continue
        if current is None:
            raise VrplibError(f"line {lineno}: unexpected content {line!r}")
        sections[current].append(line.split())

    for key in ("NAME", "DIMENSION", "CAPACITY", "EDGE_WEIGHT_TYPE"):
        if key not in specs:
            raise VrplibError(f"missing mandatory key {key}")
    for sec in ("NODE_COORD_SECTION", "DEMAND_SECTION"):
        if sec not in sections:
            raise VrplibError(f"missing mandatory section {sec}")
    if specs["EDGE_WEIGHT_TYPE"] != "EUC_2D":
        raise UnsupportedFormatError(
            f"edge weight type {specs['EDGE_WEIGHT_TYPE']} is not supported (only EUC_2D)"
        )
    if specs.get("TYPE", "CVRP") != "CVRP":
        raise UnsupportedFormatError(f"problem type {specs['TYPE']} is not supported")

    try:
        dim = int(specs["DIMENSION"])
    except ValueError:
        raise VrplibError(f"bad DIMENSION {specs['DIMENSION']!r}") from None
    coords = np.full((dim, 2), np.nan)
    demands = np.full(dim, np.nan)
    rows = sections["NODE_COORD_SECTION"]
    if len(rows) != dim:
        raise VrplibError(f"DIMENSION is {dim} but NODE_COORD_SECTION has {len(rows)} rows")
    for row in rows:
        if len(row) != 3:
            raise VrplibError(f"coordinate row {' '.join(row)!r} needs 3 fields")
        idx = int(row[0]) - 1
        if not 0 <= idx < dim or not np.isnan(coords[idx, 0]):
            raise VrplibError(f"bad or repeated node id {row[0]} in NODE_COORD_SECTION")
        coords[idx] = (_parse_number(row[1], "NODE_COORD_SECTION"),
                       _parse_number(row[2], "NODE_COORD_SECTION"))
    rows = sections["DEMAND_SECTION"]
    if len(rows) != dim:
        raise VrplibError(f"DIMENSION is {dim} but DEMAND_SECTION has {len(rows)} rows")
    for row in rows:
        if len(row) != 2:
            raise VrplibError(f"demand row {' '.join(row)!r} needs 2 fields")
        idx = int(row[0]) - 1
        if not 0 <= idx < dim or not np.isnan(demands[idx]):
            raise VrplibError(f"bad or repeated node id {row[0]} in DEMAND_SECTION")
        demands[idx] = _parse_number(row[1], "DEMAND_SECTION")

    depot = 0
    if "DEPOT_SECTION" in sections:
        ids = [int(tok) for row in sections["DEPOT_SECTION"] for tok in row]
        ids = [i for i in ids if i != -1]
        if len(ids) != 1:
            raise UnsupportedFormatError(f"exactly one depot supported, got {ids}")
        depot = ids[0] - 1
        if not 0 <= depot < dim:
            raise VrplibError(f"depot id {ids[0]} out of range")
    order = [depot] + [i for i in range(dim) if i != depot]
    coords = coords[order]
    demands = demands[order]

    fields: dict = {}
    tags: dict[str, str] = {}
    for key, value in specs.items():
        if key in ("NAME", "TYPE", "DIMENSION", "EDGE_WEIGHT_TYPE", "CAPACITY"):
            continue
        if key not in _FIELD_KEYS:
            tags[key] = value
            continue
        name = _FIELD_KEYS[key]
        if name == "grid":
            fields["grid"] = GridScale.integer_grid(_parse_number(value, key))
        elif name == "rounding":
            try:
                fields["rounding"] = Rounding(value.lower())
            except ValueError:
                raise VrplibError(f"unknown ROUNDING {value!r}") from None
        elif name in ("time_limit", "bks_cost"):
            fields[name] = _parse_number(value, key)
        else:
            fields[name] = value
    fields.setdefault("grid", GridScale.integer_grid(DEFAULT_PRECISION))
    fields.setdefault("rounding", Rounding.NEAREST)
    try:
        return Instance(
            id=specs["NAME"],
            coords=coords,
            demands=demands,
            capacity=_parse_number(specs["CAPACITY"], "CAPACITY"),
            tags=tags,
            **fields,
        )
    except InstanceError as exc:
        raise VrplibError(str(exc)) from exc


def read_vrplib(path: str | os.PathLike) -> Instance:
    return parse_vrplib(Path(path).read_text(encoding="utf-8"))


def write_vrplib(instance: Instance) -> str:
    """Canonical VRPLIB text. Requires an integer-grid instance."""
    if instance.grid.is_unit_square:
        raise VrplibError("unit-square instances must be rescaled to an integer grid first")
    lines = [f"NAME : {instance.id}"]
    if "COMMENT" in instance.tags:
        lines.append(f"COMMENT : {instance.tags['COMMENT']}")
    lines += [
        "TYPE : CVRP",
        f"DIMENSION : {instance.n + 1}",
        "EDGE_WEIGHT_TYPE : EUC_2D",
        f"CAPACITY : {format_number(instance.capacity)}",
        f"PRECISION : {format_number(instance.grid.precision)}",
        f"ROUNDING : {instance.rounding.value.upper()}",
    ]
    if instance.time_limit is not None:
        lines.append(f"TIME_LIMIT : {format_number(instance.time_limit)}")
    if instance.bks_cost is not None:
        lines.append(f"BKS : {format_number(instance.bks_cost)}")
    for key, attr in (("COORDS_DIST", "coords_dist"), ("DEPOT_TYPE", "depot_type"),
                      ("DEMANDS_DIST", "demands_dist")):
        value = getattr(instance, attr)
        if value is not None:
            lines.append(f"{key} : {value}")
    for key in sorted(k for k in instance.tags if k != "COMMENT"):
        lines.append(f"{key} : {instance.tags[key]}")
    lines.append("NODE_COORD_SECTION")
    for i, (x, y) in enumerate(instance.coords, start=1):
        lines.append(f"{i} {format_number(x)} {format_number(y)}")
    lines.append("DEMAND_SECTION")
    for i, d in enumerate(instance.demands, start=1):
        lines.append(f"{i} {format_number(d)}")
    lines += ["DEPOT_SECTION", "1", "-1", "EOF", ""]
    return "\n".join(lines)


def atomic_write(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_vrplib_file(instance: Instance, path: str | os.PathLike) -> None:
    atomic_write(path, write_vrplib(instance))


# -------------------------------------------------------------- BKS registry


@dataclass(frozen=True)
class BksRecord:
    instance_id: str
    cost: float
    routes: tuple[tuple[int, ...], ...] = ()
    algorithm: str = "unknown"
    optimal: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cost", float(self.cost))
        object.__setattr__(self, "routes", tuple(tuple(int(v) for v in r) for r in self.routes))
        if not self.cost > 0:
            raise BksFormatError(f"{self.instance_id}: BKS cost must be positive")
        for name, value in (("instance id", self.instance_id), ("algorithm", self.algorithm)):
            if not value or any(ch.isspace() for ch in value):
                raise BksFormatError(f"{name} {value!r} must be non-empty without whitespace")


def format_routes(routes) -> str:
    return ";".join(",".join(str(int(v)) for v in r) for r in routes)


def parse_routes(text: str) -> list[list[int]]:
    if not text:
        return []
    return [[int(v) for v in part.split(",")] for part in text.split(";")]


def validate_bks_record(record: BksRecord, instance: Instance) -> None:
    """Raise if the record's routes are infeasible or disagree with its cost."""
    if not record.routes:
        return
    report = check_feasibility(instance, record.routes)
    if not report.ok:
        raise BksValidationError(
            f"{record.instance_id}: BKS routes infeasible: {'; '.join(report.violations)}"
        )
    actual = evaluate_cost(instance, record.routes)
    if abs(actual - record.cost) > 1e-6 * max(1.0, abs(record.cost)):
        raise BksValidationError(
            f"{record.instance_id}: routes cost {actual!r} but record declares {record.cost!r}"
        )


def load_bks_registry(
    text: str, instances: Mapping[str, Instance] | None = None
) -> dict[str, BksRecord]:
    """Parse ``<id> <cost> <algorithm> <opt|not_opt> [routes]`` lines."""
    registry: dict[str, BksRecord] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (4, 5):
            raise BksFormatError(f"line {lineno}: expected 4 or 5 fields, got {len(parts)}")
        inst_id, cost, algorithm, flag = parts[:4]
        if flag not in ("opt", "not_opt"):
            raise BksFormatError(f"line {lineno}: optimality flag must be opt|not_opt, got {flag!r}")
        try:
            record = BksRecord(
                inst_id,
                float(cost),
                parse_routes(parts[4]) if len(parts) == 5 else (),
                algorithm,
                flag == "opt",
            )
        except (ValueError, BksFormatError) as exc:
            raise BksFormatError(f"line {lineno}: {exc}") from None
        if inst_id in registry:
            raise BksFormatError(f"line {lineno}: duplicate record for {inst_id}")
        if instances is not None and inst_id in instances:
            validate_bks_record(record, instances[inst_id])
        registry[inst_id] = record
    return registry


def store_bks_registry(registry: Mapping[str, BksRecord]) -> str:
    lines = []
    for inst_id in sorted(registry):
        rec = registry[inst_id]
        fields = [rec.instance_id, repr(rec.cost), rec.algorithm, "opt" if rec.optimal else "not_opt"]
        if rec.routes:
            fields.append(format_routes(rec.routes))
        lines.append(" ".join(fields))
    return "".join(line + "\n" for line in lines)


def read_bks_file(path, instances=None) -> dict[str, BksRecord]:
    path = Path(path)
    if not path.exists():
        return {}
    return load_bks_registry(path.read_text(encoding="utf-8"), instances)


def write_bks_file(path, registry) -> None:
    atomic_write(path, store_bks_registry(registry))


# ------------------------------------------------------------------ results


@dataclass
class ResultRecord:
    """One solver run on one instance; field names follow the solution format
    used by the harness (``running_costs`` / ``running_times``)."""

    instance_id: str
    solver_id: str
    run_index: int
    cost: float | None
    gap: float | None
    pi_score: float
    wrap_score: float
    num_vehicles: int
    normalized_budget: float
    running_costs: list[float] = field(default_factory=list)
    running_times: list[float] = field(default_factory=list)
    machine: dict = field(default_factory=dict)
    set_id: str = ""
    seed: int = 0
    solution: list[list[int]] | None = None
    bks: float | None = None

    def __post_init__(self):
        self.running_costs = [float(z) for z in self.running_costs]
        self.running_times = [float(t) for t in self.running_times]
        if len(self.running_costs) != len(self.running_times):
            raise ResultFormatError(
                f"{self.instance_id}: {len(self.running_costs)} costs "
                f"but {len(self.running_times)} times"
            )
        if any(b <= a for a, b in zip(self.running_times, self.running_times[1:])):
            raise ResultFormatError(f"{self.instance_id}: running_times must strictly increase")
        if any(b >= a for a, b in zip(self.running_costs, self.running_costs[1:])):
            raise ResultFormatError(f"{self.instance_id}: running_costs must strictly decrease")


def _result_to_json(record: ResultRecord) -> str:
    return json.dumps(asdict(record), sort_keys=True, allow_nan=False)


def write_results(records: Iterable[ResultRecord]) -> str:
    return "".join(_result_to_json(r) + "\n" for r in records)


def read_results(text: str) -> list[ResultRecord]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            data = json.loads(raw)
            out.append(ResultRecord(**data))
        except (json.JSONDecodeError, TypeError) as exc:
            raise ResultFormatError(f"line {lineno}: {exc}") from None
    return out


def append_results(path: str | os.PathLike, records: Iterable[ResultRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(write_results(records))
        fh.flush()


def read_results_file(path: str | os.PathLike) -> list[ResultRecord]:
    return read_results(Path(path).read_text(encoding="utf-8"))


def nan_to_none(x):
    return None if x is None or (isinstance(x, float) and math.isnan(x)) else x
