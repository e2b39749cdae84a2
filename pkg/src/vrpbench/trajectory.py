"""Time-ordered incumbent streams."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .instance import Solution


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Incumbents ``(times[i], costs[i])`` found within ``budget`` seconds.

    Times strictly increase, costs strictly decrease. ``solutions`` is either
    empty or holds one entry (possibly ``None``) per incumbent.
    """

    times: np.ndarray
    costs: np.ndarray
    budget: float
    solutions: tuple[Solution | None, ...] = ()
    produced_by: str = ""
    normalized: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64, copy=True).reshape(-1)
        costs = np.array(self.costs, dtype=np.float64, copy=True).reshape(-1)
        times.setflags(write=False)
        costs.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "budget", float(self.budget))
        object.__setattr__(self, "solutions", tuple(self.solutions))

        if times.shape != costs.shape:
            raise TrajectoryError(f"{times.size} times but {costs.size} costs")
        if self.solutions and len(self.solutions) != times.size:
            raise TrajectoryError("solutions must be empty or match the incumbents")
        if self.budget < 0:
            raise TrajectoryError(f"negative budget {self.budget}")
        if times.size:
            if times[0] < 0 or times[-1] > self.budget:
                raise TrajectoryError(
                    f"incumbent times must lie in [0, {self.budget}], "
                    f"got [{times[0]}, {times[-1]}]"
                )
            if np.any(np.diff(times) <= 0):
                raise TrajectoryError("incumbent times must strictly increase")
            if np.any(np.diff(costs) >= 0):
                raise TrajectoryError("incumbent costs must strictly decrease")

    @classmethod
    def empty(cls, budget: float, produced_by: str = "", normalized: bool = False) -> "Trajectory":
        return cls(np.empty(0), np.empty(0), budget, produced_by=produced_by, normalized=normalized)

    @classmethod
    def from_entries(
        cls,
        entries: Sequence[tuple],
        budget: float,
        produced_by: str = "",
        normalized: bool = False,
    ) -> "Trajectory":
        """Build from ``(t, z)`` or ``(t, z, solution)`` tuples."""
        times = [e[0] for e in entries]
        costs = [e[1] for e in entries]
        sols = tuple(e[2] if len(e) > 2 else None for e in entries)
        if all(s is None for s in sols):
            sols = ()
        return cls(np.asarray(times, float), np.asarray(costs, float), budget, sols,
                   produced_by, normalized)

    def __len__(self):
        return int(self.times.size)

    @property
    def is_empty(self) -> bool:
        return self.times.size == 0

    @property
    def final_cost(self) -> float | None:
        return float(self.costs[-1]) if self.times.size else None

    @property
    def final_solution(self) -> Solution | None:
        return self.solutions[-1] if self.solutions else None

    def solution_at(self, k: int) -> Solution | None:
        return self.solutions[k] if self.solutions else None

    def best_at(self, t: float) -> float | None:
        """Best cost found at or before ``t``; ``None`` before the first incumbent."""
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.costs[k]) if k >= 0 else None

    def rescaled(self, factor: float, budget: float | None = None,
                 normalized: bool = True) -> "Trajectory":
        """All times multiplied by ``factor``; budget too unless given."""
        new_budget = self.budget * factor if budget is None else budget
        times = np.minimum(self.times * factor, new_budget)
        if times.size > 1 and np.any(np.diff(times) <= 0):
            # clamping at the budget can collapse the tail; keep the last
            # (best) incumbent of every collapsed group
            keep = np.append(np.diff(times) > 0, True)
            sols = tuple(s for s, k in zip(self.solutions, keep) if k) if self.solutions else ()
            return replace(self, times=times[keep], costs=self.costs[keep], solutions=sols,
                           budget=new_budget, normalized=normalized)
        return replace(self, times=times, budget=new_budget, normalized=normalized)

    def to_dict(self) -> dict:
        return {
            "times": [float(t) for t in self.times],
            "costs": [float(z) for z in self.costs],
            "budget": self.budget,
            "produced_by": self.produced_by,
            "normalized": self.normalized,
            "solutions": [s.as_lists() if s is not None else None for s in self.solutions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Trajectory":
        costs = data["costs"]
        sols = tuple(
            Solution(routes, cost) if routes is not None else None
            for routes, cost in zip(data.get("solutions") or [], costs)
        )
        return cls(data["times"], costs, data["budget"], sols,
                   data.get("produced_by", ""), data.get("normalized", False))

    def same_as(self, other: "Trajectory") -> bool:
        return (
            np.array_equal(self.times, other.times)
            and np.array_equal(self.costs, other.costs)
            and self.budget == other.budget
            and self.solutions == other.solutions
        )
