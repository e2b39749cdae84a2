"""Seeded CVRP instance samplers.

Uniform and Gaussian-mixture instances live on the unit square with demands
normalized by the capacity (capacity 1.0) and exact distances. X-type
instances live on the integer grid ``[0, 1000]^2`` with integer demands and
per-leg rounded distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .instance import GridScale, Instance, Rounding, UNIT_SQUARE

X_GRID = 1000
X_CENTER = (X_GRID / 2, X_GRID / 2)


class GeneratorConfigError(ValueError):
    pass


# --------------------------------------------------------- coordinate models


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class GaussianMixture:
    num_modes: int | None = None  # None: drawn from 1..7
    mode_std: float = 0.07

    def __post_init__(self):
        if self.num_modes is not None and self.num_modes < 1:
            raise GeneratorConfigError("num_modes must be at least 1")
        if not self.mode_std > 0:
            raise GeneratorConfigError("mode_std must be positive")


@dataclass(frozen=True)
class RandomPositions:
    pass


@dataclass(frozen=True)
class Clustered:
    num_clusters: int | None = None  # None: drawn from 3..8
    decay: float = 40.0

    def __post_init__(self):
        if self.num_clusters is not None and self.num_clusters < 1:
            raise GeneratorConfigError("num_clusters must be at least 1")
        if not self.decay > 0:
            raise GeneratorConfigError("decay must be positive")


@dataclass(frozen=True)
class RandomClustered:
    """``fraction`` of the customers placed at random, the rest clustered."""

    fraction: float = 0.5
    num_clusters: int | None = None
    decay: float = 40.0

    def __post_init__(self):
        if not 0 <= self.fraction <= 1:
            raise GeneratorConfigError("fraction must lie in [0, 1]")
        Clustered(self.num_clusters, self.decay)


DEPOT_POSITIONS = ("central", "eccentric", "random")


@dataclass(frozen=True)
class XType:
    depot_pos: str = "random"
    customer_pos: Union[RandomPositions, Clustered, RandomClustered] = RandomPositions()

    def __post_init__(self):
        if self.depot_pos not in DEPOT_POSITIONS:
            raise GeneratorConfigError(
                f"depot_pos must be one of {DEPOT_POSITIONS}, got {self.depot_pos!r}"
            )


CoordDist = Union[Uniform, GaussianMixture, XType]

# ------------------------------------------------------------- demand models


@dataclass(frozen=True)
class Unitary:
    pass


@dataclass(frozen=True)
class UniformInt:
    lo: int = 1
    hi: int = 10

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise GeneratorConfigError(f"need 1 <= lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Gamma:
    shape: float = 2.0
    scale: float = 5.0

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise GeneratorConfigError("gamma shape and scale must be positive")


@dataclass(frozen=True)
class XTypeMix:
    pass


DemandDist = Union[Unitary, UniformInt, Gamma, XTypeMix]

# the X-design demand variants, chosen uniformly by XTypeMix
X_DEMAND_VARIANTS = ("unitary", "1-10", "5-10", "1-100", "quadrant", "many-small-few-large")

# ------------------------------------------------------------ capacity rules


@dataclass(frozen=True)
class Fixed:
    capacity: float = 50.0

    def __post_init__(self):
        if not self.capacity > 0:
            raise GeneratorConfigError("capacity must be positive")


@dataclass(frozen=True)
class FromAvgRouteSize:
    """Capacity giving routes of about ``r`` customers on average."""

    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise GeneratorConfigError("average route size must be positive")


CapacityRule = Union[Fixed, FromAvgRouteSize]


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    seed: int = 0
    coord_dist: CoordDist = field(default_factory=Uniform)
    demand_dist: DemandDist = field(default_factory=UniformInt)
    capacity_rule: CapacityRule = field(default_factory=Fixed)
    name: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise GeneratorConfigError(f"n must be at least 1, got {self.n}")
        if not 0 <= self.seed < 2**64:
            raise GeneratorConfigError("seed must be an unsigned 64-bit integer")

    @property
    def instance_id(self) -> str:
        if self.name:
            return self.name
        kind = {Uniform: "uniform", GaussianMixture: "gm", XType: "x"}[type(self.coord_dist)]
        return f"{kind}{self.n}_s{self.seed}"


# ------------------------------------------------------------------ sampling


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_demands(kind: DemandDist, n: int, seed, quadrant_info=None) -> tuple[np.ndarray, str]:
    """Customer demands (length ``n``) and a tag naming the model used.

    ``quadrant_info`` is ``(customer_coords, center)``; it is only needed
    when the X-type mix selects its quadrant-dependent variant.
    """
    if n < 1:
        raise GeneratorConfigError("n must be at least 1")
    rng = _rng(seed)
    if isinstance(kind, Unitary):
        return np.ones(n), "unitary"
    if isinstance(kind, UniformInt):
        return rng.integers(kind.lo, kind.hi + 1, size=n).astype(np.float64), f"{kind.lo}-{kind.hi}"
    if isinstance(kind, Gamma):
        raw = rng.gamma(kind.shape, kind.scale, size=n)
        return np.maximum(1.0, np.ceil(raw)), f"gamma({kind.shape:g},{kind.scale:g})"
    if isinstance(kind, XTypeMix):
        variant = X_DEMAND_VARIANTS[int(rng.integers(len(X_DEMAND_VARIANTS)))]
        return _x_variant(variant, n, rng, quadrant_info), variant
    raise GeneratorConfigError(f"unknown demand model {kind!r}")


def _x_variant(variant: str, n: int, rng: np.random.Generator, quadrant_info) -> np.ndarray:
    if variant == "unitary":
        return np.ones(n)
    if variant in ("1-10", "5-10", "1-100"):
        lo, hi = (int(v) for v in variant.split("-"))
        return rng.integers(lo, hi + 1, size=n).astype(np.float64)
    if variant == "quadrant":
        if quadrant_info is None:
            raise GeneratorConfigError("quadrant demands need customer coordinates")
        coords, center = quadrant_info
        coords = np.asarray(coords, dtype=np.float64)
        right = coords[:, 0] >= center[0]
        upper = coords[:, 1] >= center[1]
        large = right == upper  # first and third quadrants
        small = rng.integers(1, 51, size=n)
        big = rng.integers(51, 101, size=n)
        return np.where(large, big, small).astype(np.float64)
    if variant == "many-small-few-large":
        share_small = rng.uniform(0.70, 0.95)
        is_small = rng.random(n) < share_small
        small = rng.integers(1, 11, size=n)
        big = rng.integers(50, 101, size=n)
        return np.where(is_small, small, big).astype(np.float64)
    raise GeneratorConfigError(f"unknown X demand variant {variant!r}")


def _clustered_points(count: int, seeds: np.ndarray, decay: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Points at exponential distance (truncated at ``3 * decay``) from a
    random seed; off-grid or too-far points are redrawn."""
    out = np.empty((count, 2))
    limit = 3.0 * decay
    filled = 0
    while filled < count:
        need = count - filled
        centers = seeds[rng.integers(len(seeds), size=need)]
        radius = rng.exponential(decay, size=need)
        angle = rng.uniform(0.0, 2.0 * np.pi, size=need)
        pts = np.rint(centers + radius[:, None] * np.column_stack((np.cos(angle), np.sin(angle))))
        ok = (radius <= limit) & np.all((pts >= 0) & (pts <= X_GRID), axis=1)
        ok &= np.hypot(pts[:, 0] - centers[:, 0], pts[:, 1] - centers[:, 1]) <= limit
        pts = pts[ok]
        out[filled:filled + len(pts)] = pts
        filled += len(pts)
    return out


def _x_coords(dist: XType, n: int, rng: np.random.Generator) -> tuple[np.ndarray, str, str]:
    if dist.depot_pos == "central":
        depot, depot_tag = np.array(X_CENTER), "C"
    elif dist.depot_pos == "eccentric":
        depot, depot_tag = np.zeros(2), "E"
    else:
        depot, depot_tag = rng.integers(0, X_GRID + 1, size=2).astype(np.float64), "R"

    pos = dist.customer_pos
    if isinstance(pos, RandomPositions):
        customers = rng.integers(0, X_GRID + 1, size=(n, 2)).astype(np.float64)
        tag = "random"
    else:
        k = pos.num_clusters or int(rng.integers(3, 9))
        seeds = rng.integers(0, X_GRID + 1, size=(k, 2)).astype(np.float64)
        n_random = int(round(pos.fraction * n)) if isinstance(pos, RandomClustered) else 0
        clustered = _clustered_points(n - n_random, seeds, pos.decay, rng)
        scattered = rng.integers(0, X_GRID + 1, size=(n_random, 2)).astype(np.float64)
        customers = np.vstack((clustered, scattered))
        customers = customers[rng.permutation(n)]
        tag = "clustered" if n_random == 0 else "random_clustered"
    return np.vstack((depot, customers)), tag, depot_tag


def _unit_coords(dist, n: int, rng: np.random.Generator) -> tuple[np.ndarray, str]:
    depot = rng.random(2)
    if isinstance(dist, Uniform):
        return np.vstack((depot, rng.random((n, 2)))), "uniform"
    k = dist.num_modes or int(rng.integers(1, 8))
    centers = rng.random((k, 2))
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        need = n - filled
        pts = centers[rng.integers(k, size=need)] + rng.normal(0.0, dist.mode_std, size=(need, 2))
        pts = pts[np.all((pts >= 0) & (pts <= 1), axis=1)]
        out[filled:filled + len(pts)] = pts
        filled += len(pts)
    return np.vstack((depot, out)), "gaussian_mixture"


def _capacity(rule: CapacityRule, demands: np.ndarray) -> float:
    if isinstance(rule, Fixed):
        q = float(rule.capacity)
    else:
        q = float(math.ceil(rule.r * demands.sum() / demands.size))
    if q < demands.max():
        raise GeneratorConfigError(
            f"capacity {q:g} is below the largest demand {demands.max():g}"
        )
    return q


def generate(config: GeneratorConfig) -> Instance:
    """Deterministic instance for ``config`` (including its seed)."""
    rng = np.random.default_rng(config.seed)
    dist = config.coord_dist
    n = config.n
    if isinstance(dist, XType):
        coords, coords_tag, depot_tag = _x_coords(dist, n, rng)
        demands, demand_tag = sample_demands(config.demand_dist, n, rng, (coords[1:], X_CENTER))
        capacity = _capacity(config.capacity_rule, demands)
        return Instance(
            id=config.instance_id,
            coords=coords,
            demands=np.concatenate(([0.0], demands)),
            capacity=capacity,
            coords_dist=coords_tag,
            depot_type=depot_tag,
            demands_dist=demand_tag,
            grid=GridScale.integer_grid(X_GRID),
            rounding=Rounding.NEAREST,
        )
    if not isinstance(dist, (Uniform, GaussianMixture)):
        raise GeneratorConfigError(f"unknown coordinate model {dist!r}")
    coords, coords_tag = _unit_coords(dist, n, rng)
    demands, demand_tag = sample_demands(config.demand_dist, n, rng, (coords[1:], (0.5, 0.5)))
    capacity = _capacity(config.capacity_rule, demands)
    return Instance(
        id=config.instance_id,
        coords=coords,
        demands=np.concatenate(([0.0], demands / capacity)),
        capacity=1.0,
        coords_dist=coords_tag,
        depot_type="R",
        demands_dist=demand_tag,
        grid=UNIT_SQUARE,
        rounding=Rounding.EXACT,
    )


def generate_many(config: GeneratorConfig, count: int) -> list[Instance]:
    """``count`` instances with seeds ``seed, seed + 1, ...``."""
    base = config.instance_id if config.name else None
    out = []
    for k in range(count):
        cfg = replace(config, seed=config.seed + k)
        if base is not None:
            cfg = replace(cfg, name=f"{base}_{k}")
        out.append(generate(cfg))
    return out
