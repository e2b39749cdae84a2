"""Benchmarking harness for capacitated vehicle routing solvers."""

from .instance import (
    FeasibilityReport,
    GridScale,
    Instance,
    Rounding,
    Solution,
    check_feasibility,
    evaluate_cost,
    rescale_instance,
)
from .trajectory import Trajectory

__version__ = "0.1.0"

__all__ = [
    "FeasibilityReport",
    "GridScale",
    "Instance",
    "Rounding",
    "Solution",
    "Trajectory",
    "check_feasibility",
    "evaluate_cost",
    "rescale_instance",
]
