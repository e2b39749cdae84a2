"""Fixed-budget and any-time evaluation metrics plus multi-run aggregation.

Every any-time metric integrates a right-continuous step function over
``[0, budget]``: the value on ``[t_k, t_{k+1})`` is the one taken at ``t_k``
and the last event's value extends to the budget. Adjacent segments with the
same value are merged before summing, so a function that is constant on the
whole interval integrates to exactly that constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .trajectory import Trajectory

PI_CAP = 10.0
CURVE_FRACTIONS = (0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0)


class StaleBksError(ValueError):
    """A cost below the best known solution reached a metric; update the BKS."""


def gap(z: float, z_bks: float) -> float:
    """Percentage gap of ``z`` over ``z_bks``; negative means a new BKS."""
    if not z_bks > 0:
        raise ValueError(f"BKS cost must be positive, got {z_bks}")
    return 100.0 * (z - z_bks) / z_bks


def improves_bks(z: float, z_bks: float, tol: float = 1e-6) -> bool:
    return z < z_bks - tol


def gap_at_budget(traj: Trajectory, tau: float, z_bks: float) -> float | None:
    """Gap of the best incumbent found by ``tau``; ``None`` if there is none."""
    if not 0 < tau <= traj.budget:
        raise ValueError(f"tau must lie in (0, {traj.budget}], got {tau}")
    z = traj.best_at(tau)
    return None if z is None else gap(z, z_bks)


def primal_gap(z: float, z_opt: float) -> float:
    """Bounded primal gap in [0, 1]."""
    if z == 0 and z_opt == 0:
        return 0.0
    if z * z_opt < 0:
        return 1.0
    return abs(z_opt - z) / max(abs(z_opt), abs(z))


def integrate_steps(starts: np.ndarray, values: np.ndarray, budget: float) -> float:
    """Time-average over ``[0, budget]`` of the step function taking
    ``values[k]`` on ``[starts[k], starts[k+1])`` and ``values[-1]`` up to
    the budget. ``starts[0]`` must be 0."""
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    starts = np.asarray(starts, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    keep = np.ones(values.size, dtype=bool)
    keep[1:] = values[1:] != values[:-1]
    starts = starts[keep]
    values = values[keep]
    if values.size == 1:
        return float(values[0])
    widths = np.diff(np.append(starts, budget))
    return float(np.dot(values, widths) / budget)


def _check_not_below(costs: np.ndarray, z_bks: float) -> None:
    if costs.size and costs.min() < z_bks:
        raise StaleBksError(
            f"cost {costs.min()!r} is below the BKS {z_bks!r}; update the registry first"
        )


def _step_starts(traj: Trajectory) -> tuple[np.ndarray, bool]:
    """Event times with 0 prepended when the first event is later.
    The flag says whether a pre-incumbent segment was added."""
    if traj.times.size and traj.times[0] == 0:
        return traj.times, False
    return np.concatenate(([0.0], traj.times)), True


def primal_integral(traj: Trajectory, z_bks: float) -> float:
    """Time-averaged percentage gap, capped at 10 and taken as 10 before the
    first incumbent. Result lies in [0, 10]."""
    if not z_bks > 0:
        raise ValueError(f"BKS cost must be positive, got {z_bks}")
    _check_not_below(traj.costs, z_bks)
    if traj.is_empty:
        return PI_CAP
    gaps = np.minimum(PI_CAP, 100.0 * (traj.costs - z_bks) / z_bks)
    starts, padded = _step_starts(traj)
    values = np.concatenate(([PI_CAP], gaps)) if padded else gaps
    return integrate_steps(starts, values, traj.budget)


def primal_gap_integral(traj: Trajectory, z_opt: float) -> float:
    """Time average of the bounded primal gap (1 before the first incumbent)."""
    if traj.is_empty:
        return 1.0
    gaps = np.array([primal_gap(z, z_opt) for z in traj.costs])
    starts, padded = _step_starts(traj)
    values = np.concatenate(([1.0], gaps)) if padded else gaps
    return integrate_steps(starts, values, traj.budget)


@dataclass(frozen=True)
class SyncedPair:
    """Both best-so-far step functions sampled on a merged event grid.

    ``base[k]`` and ``cand[k]`` hold the value on ``[grid[k], grid[k+1])``;
    NaN marks a solver without an incumbent yet. The last grid point is the
    budget.
    """

    grid: np.ndarray
    base: np.ndarray
    cand: np.ndarray
    z_bks: float

    @property
    def budget(self) -> float:
        return float(self.grid[-1])


def _best_so_far(traj: Trajectory, grid: np.ndarray) -> np.ndarray:
    k = np.searchsorted(traj.times, grid, side="right") - 1
    out = np.full(grid.size, np.nan)
    hit = k >= 0
    out[hit] = traj.costs[k[hit]]
    return out


def synchronize(base: Trajectory, cand: Trajectory, z_bks: float) -> SyncedPair:
    if not math.isclose(base.budget, cand.budget, rel_tol=1e-9, abs_tol=0.0):
        raise ValueError(f"budgets differ: base {base.budget}, candidate {cand.budget}")
    budget = cand.budget
    if not budget > 0:
        raise ValueError("budget must be positive")
    grid = np.union1d(np.union1d(base.times, cand.times), [0.0, budget])
    grid = grid[grid <= budget]
    return SyncedPair(grid, _best_so_far(base, grid), _best_so_far(cand, grid), float(z_bks))


def rpi(z_t: float | None, z_t_base: float | None, z_bks: float) -> float:
    """Relative position of the candidate between the base cost (1) and the
    BKS (0).

    1 when either solver has no incumbent yet, and 1 whenever the candidate
    does not beat the base (this also settles the case base = BKS).
    """
    if z_t is None or z_t_base is None or math.isnan(z_t) or math.isnan(z_t_base):
        return 1.0
    if z_t_base < z_bks or z_t < z_bks:
        raise StaleBksError(
            f"cost {min(z_t, z_t_base)!r} is below the BKS {z_bks!r}; update the registry first"
        )
    if z_t >= z_t_base:
        return 1.0
    return (z_t - z_bks) / (z_t_base - z_bks)


def rpi_curve(pair: SyncedPair) -> np.ndarray:
    return np.array([rpi(c, b, pair.z_bks) for c, b in zip(pair.cand, pair.base)])


def wrap(cand: Trajectory, base: Trajectory, z_bks: float) -> float:
    """Time average of the RPI over the budget, in [0, 1]."""
    pair = synchronize(base, cand, z_bks)
    values = rpi_curve(pair)
    # the last grid point is the budget and carries no width
    return integrate_steps(pair.grid[:-1], values[:-1], pair.budget) if pair.grid.size > 1 \
        else float(values[0])


# ------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class RunMetrics:
    """Scores of one candidate run on one instance."""

    gap: float | None
    pi: float
    wrap: float
    curve: tuple[tuple[float, float | None], ...] = ()


def evaluate_run(cand: Trajectory, base: Trajectory, z_bks: float,
                 fractions: Sequence[float] = CURVE_FRACTIONS) -> RunMetrics:
    final = cand.final_cost
    curve = tuple((f, gap_at_budget(cand, f * cand.budget, z_bks)) for f in fractions)
    return RunMetrics(
        gap=None if final is None else gap(final, z_bks),
        pi=primal_integral(cand, z_bks),
        wrap=wrap(cand, base, z_bks),
        curve=curve,
    )


@dataclass(frozen=True)
class Stat:
    mean: float | None
    std: float | None
    count: int  # number of values that entered the mean

    def format(self, digits: int = 3) -> str:
        if self.mean is None:
            return "-"
        return f"{self.mean:.{digits}f} ± {(self.std or 0.0):.{digits}f}"


def _mean(values: Iterable[float]) -> float | None:
    values = list(values)
    return math.fsum(values) / len(values) if values else None


def sample_std(values: Sequence[float]) -> float:
    """Standard deviation with the n-1 denominator; 0 for a single value."""
    if len(values) < 2:
        return 0.0
    return float(np.std(np.asarray(values, dtype=np.float64), ddof=1))


def aggregate_values(per_instance: Mapping[str, Sequence[float | None]]) -> Stat:
    """One set: mean over runs per instance, then unweighted mean over
    instances. The std is taken over the per-run set means (run ``r`` of
    every instance forms one replicate of the whole set)."""
    if not per_instance:
        raise ValueError("cannot aggregate an empty group")
    inst_means = [_mean(v for v in runs if v is not None) for runs in per_instance.values()]
    inst_means = [m for m in inst_means if m is not None]
    n_runs = max(len(runs) for runs in per_instance.values())
    replicate_means = []
    for r in range(n_runs):
        m = _mean(runs[r] for runs in per_instance.values()
                  if r < len(runs) and runs[r] is not None)
        if m is not None:
            replicate_means.append(m)
    count = sum(v is not None for runs in per_instance.values() for v in runs)
    mean = _mean(inst_means)
    return Stat(mean, sample_std(replicate_means) if mean is not None else None, count)


def average_stats(stats: Sequence[Stat]) -> Stat:
    """AVG row: unweighted mean of set means and of set standard deviations."""
    if not stats:
        raise ValueError("cannot average an empty list of sets")
    present = [s for s in stats if s.mean is not None]
    if not present:
        return Stat(None, None, 0)
    return Stat(
        _mean(s.mean for s in present),
        _mean(s.std or 0.0 for s in present),
        sum(s.count for s in present),
    )


@dataclass(frozen=True)
class MetricReport:
    gap: Stat
    pi: Stat
    wrap: Stat
    curve: tuple[tuple[float, Stat], ...] = ()

    @property
    def gap_percent(self) -> float | None:
        return self.gap.mean

    @property
    def pi_score(self) -> float | None:
        return self.pi.mean

    @property
    def wrap_score(self) -> float | None:
        return self.wrap.mean


def aggregate(runs: Mapping[str, Sequence[RunMetrics]]) -> MetricReport:
    """Set-level report from ``instance id -> runs``."""
    if not runs or any(len(r) == 0 for r in runs.values()):
        raise ValueError("every instance needs at least one run")
    fractions = next(iter(runs.values()))[0].curve
    curve = []
    for k, (f, _) in enumerate(fractions):
        curve.append((f, aggregate_values(
            {i: [m.curve[k][1] for m in rs] for i, rs in runs.items()})))
    return MetricReport(
        gap=aggregate_values({i: [m.gap for m in rs] for i, rs in runs.items()}),
        pi=aggregate_values({i: [m.pi for m in rs] for i, rs in runs.items()}),
        wrap=aggregate_values({i: [m.wrap for m in rs] for i, rs in runs.items()}),
        curve=tuple(curve),
    )


def average_reports(reports: Sequence[MetricReport]) -> MetricReport:
    if not reports:
        raise ValueError("cannot average an empty list of reports")
    curve = []
    for k, (f, _) in enumerate(reports[0].curve):
        curve.append((f, average_stats([r.curve[k][1] for r in reports])))
    return MetricReport(
        gap=average_stats([r.gap for r in reports]),
        pi=average_stats([r.pi for r in reports]),
        wrap=average_stats([r.wrap for r in reports]),
        curve=tuple(curve),
    )
