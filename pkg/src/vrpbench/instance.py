"""CVRP instance and solution model, cost evaluation and feasibility checks."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .kernels import CAPACITY_RTOL


class InstanceError(ValueError):
    """An instance violates a structural invariant."""


class StructureError(ValueError):
    """A route references a node that does not exist."""


class Rounding(enum.Enum):
    EXACT = "exact"
    NEAREST = "nearest"  # each leg rounded to the nearest integer (CVRPLib)


@dataclass(frozen=True)
class GridScale:
    """``precision=None`` is the unit square; otherwise an integer grid whose
    values are unit-square values multiplied by ``precision``."""

    precision: float | None = None

    def __post_init__(self):
        if self.precision is not None and not self.precision > 0:
            raise InstanceError(f"grid precision must be positive, got {self.precision}")

    @classmethod
    def unit_square(cls) -> "GridScale":
        return cls(None)

    @classmethod
    def integer_grid(cls, precision: float) -> "GridScale":
        return cls(float(precision))

    @property
    def is_unit_square(self) -> bool:
        return self.precision is None

    def __str__(self):
        if self.precision is None:
            return "UnitSquare"
        return f"IntegerGrid({self.precision:g})"


UNIT_SQUARE = GridScale.unit_square()


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One CVRP instance. Node 0 is the depot; customers are ``1..n``."""

    id: str
    coords: np.ndarray
    demands: np.ndarray
    capacity: float
    time_limit: float | None = None
    bks_cost: float | None = None
    coords_dist: str | None = None
    depot_type: str | None = None
    demands_dist: str | None = None
    grid: GridScale = UNIT_SQUARE
    rounding: Rounding = Rounding.EXACT
    tags: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        coords = _frozen_array(self.coords)
        demands = _frozen_array(self.demands)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "demands", demands)
        object.__setattr__(self, "capacity", float(self.capacity))
        object.__setattr__(self, "tags", dict(self.tags))

        if coords.ndim != 2 or coords.shape[1] != 2:
            raise InstanceError(f"coords must have shape (n+1, 2), got {coords.shape}")
        if demands.shape != (coords.shape[0],):
            raise InstanceError(
                f"{coords.shape[0]} coordinates but {demands.shape[0]} demands"
            )
        if coords.shape[0] < 2:
            raise InstanceError("an instance needs a depot and at least one customer")
        if not np.all(np.isfinite(coords)):
            raise InstanceError("coordinates must be finite")
        if not self.capacity > 0:
            raise InstanceError(f"capacity must be positive, got {self.capacity}")
        if demands[0] != 0:
            raise InstanceError(f"depot demand must be 0, got {demands[0]:g}")
        customers = demands[1:]
        if np.any(customers <= 0):
            bad = int(np.argmax(customers <= 0)) + 1
            raise InstanceError(f"customer {bad} has non-positive demand {demands[bad]:g}")
        if np.any(customers > self.capacity * (1 + CAPACITY_RTOL)):
            bad = int(np.argmax(customers > self.capacity)) + 1
            raise InstanceError(
                f"customer {bad} demand {demands[bad]:g} exceeds capacity {self.capacity:g}"
            )

    @property
    def n(self) -> int:
        """Number of customers."""
        return self.coords.shape[0] - 1

    @property
    def rounded(self) -> bool:
        return self.rounding is Rounding.NEAREST

    @cached_property
    def distances(self) -> np.ndarray:
        dist = kernels.distance_matrix(self.coords, self.rounded)
        dist.setflags(write=False)
        return dist

    def fingerprint(self) -> str:
        """Content hash of everything that influences a solver run."""
        h = hashlib.sha256()
        h.update(self.id.encode())
        h.update(self.coords.tobytes())
        h.update(self.demands.tobytes())
        h.update(repr((self.capacity, str(self.grid), self.rounding.value)).encode())
        return h.hexdigest()

    def with_changes(self, **changes) -> "Instance":
        return replace(self, **changes)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.coords, other.coords)
            and np.array_equal(self.demands, other.demands)
            and self.capacity == other.capacity
            and self.time_limit == other.time_limit
            and self.bks_cost == other.bks_cost
            and self.coords_dist == other.coords_dist
            and self.depot_type == other.depot_type
            and self.demands_dist == other.demands_dist
            and self.grid == other.grid
            and self.rounding == other.rounding
            and dict(self.tags) == dict(other.tags)
        )

    __hash__ = None


Routes = Sequence[Sequence[int]]


def _normalise_routes(routes: Routes) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(int(node) for node in route) for route in routes if len(route) > 0)


@dataclass(frozen=True)
class Solution:
    """Depot-free routes plus their total cost. Empty routes are dropped."""

    routes: tuple[tuple[int, ...], ...]
    cost: float

    def __post_init__(self):
        object.__setattr__(self, "routes", _normalise_routes(self.routes))
        object.__setattr__(self, "cost", float(self.cost))

    @classmethod
    def from_routes(cls, instance: Instance, routes: Routes) -> "Solution":
        return cls(_normalise_routes(routes), evaluate_cost(instance, routes))

    @property
    def num_vehicles(self) -> int:
        return len(self.routes)

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.routes]


def evaluate_cost(instance: Instance, routes: Routes) -> float:
    """Total length of ``routes``, each leg rounded first under NEAREST."""
    tails: list[int] = []
    heads: list[int] = []
    n = instance.n
    for route in routes:
        if len(route) == 0:
            continue
        stops = [0, *(int(v) for v in route), 0]
        for v in stops[1:-1]:
            if v < 1 or v > n:
                raise StructureError(f"node {v} is not a customer index in 1..{n}")
        tails.extend(stops[:-1])
        heads.extend(stops[1:])
    if not tails:
        return 0.0
    legs = kernels.leg_lengths(
        instance.coords, np.asarray(tails), np.asarray(heads), instance.rounded
    )
    return float(legs.sum())


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    missing: tuple[int, ...] = ()
    duplicated: tuple[int, ...] = ()
    invalid: tuple[int, ...] = ()
    overloaded: tuple[tuple[int, float], ...] = ()  # (route index, load)
    depot_in_route: tuple[int, ...] = ()

    @property
    def violations(self) -> list[str]:
        out = [f"customer {c} missing" for c in self.missing]
        out += [f"customer {c} duplicated" for c in self.duplicated]
        out += [f"node {c} is not a customer" for c in self.invalid]
        out += [f"route {r} visits the depot" for r in self.depot_in_route]
        out += [f"route {r} load {load:g} exceeds capacity" for r, load in self.overloaded]
        return out


def check_feasibility(instance: Instance, solution: Solution | Routes) -> FeasibilityReport:
    """Report every exactly-once and capacity violation; never raises."""
    routes = solution.routes if isinstance(solution, Solution) else solution
    n = instance.n
    counts = np.zeros(n + 1, dtype=np.int64)
    invalid: list[int] = []
    depot_routes: list[int] = []
    overloaded: list[tuple[int, float]] = []
    limit = instance.capacity * (1 + CAPACITY_RTOL)
    for k, route in enumerate(routes):
        load = 0.0
        for v in route:
            v = int(v)
            if v == 0:
                if k not in depot_routes:
                    depot_routes.append(k)
            elif 1 <= v <= n:
                counts[v] += 1
                load += instance.demands[v]
            else:
                invalid.append(v)
        if load > limit:
            overloaded.append((k, float(load)))
    missing = tuple(int(c) for c in np.flatnonzero(counts[1:] == 0) + 1)
    duplicated = tuple(int(c) for c in np.flatnonzero(counts[1:] > 1) + 1)
    ok = not (missing or duplicated or invalid or overloaded or depot_routes)
    return FeasibilityReport(
        ok=ok,
        missing=missing,
        duplicated=duplicated,
        invalid=tuple(invalid),
        overloaded=tuple(overloaded),
        depot_in_route=tuple(depot_routes),
    )


def rescale_instance(instance: Instance, target: GridScale) -> Instance:
    """Convert between the unit square and an integer grid.

    Coordinates, demands and capacity are all multiplied (or divided) by the
    grid precision; integer-grid values are rounded to integers.
    """
    source = instance.grid
    if source == target:
        raise InstanceError(f"instance is already on {target}")
    if source.is_unit_square:
        p = target.precision
        coords = np.rint(instance.coords * p)
        demands = np.rint(instance.demands * p)
        capacity = float(np.rint(instance.capacity * p))
    elif target.is_unit_square:
        p = source.precision
        coords = instance.coords / p
        demands = instance.demands / p
        capacity = instance.capacity / p
    else:
        # grid to grid goes through the unit square
        return rescale_instance(rescale_instance(instance, UNIT_SQUARE), target)
    factor = (target.precision if source.is_unit_square else 1.0 / source.precision)
    bks = instance.bks_cost
    if bks is not None:
        # only exact Euclidean costs scale linearly with the grid
        bks = bks * factor if instance.rounding is Rounding.EXACT else None
    return replace(
        instance, coords=coords, demands=demands, capacity=capacity, grid=target, bks_cost=bks
    )
