"""PassMark-based runtime calibration against a reference machine.

A machine with score ``s`` gets a budget of ``T * s_base / s`` wall seconds,
and every time it measures is mapped back to reference seconds by
``t * s / s_base``.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .trajectory import Trajectory

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class MachineSpecError(ValueError):
    pass


class Mode(enum.Enum):
    CPU_SINGLE = "cpu-single"
    CPU_MULTI = "cpu-multi"
    GPU = "gpu"

    @classmethod
    def parse(cls, text: str) -> "Mode":
        try:
            return cls(text.strip().lower().replace("_", "-"))
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise MachineSpecError(f"unknown mode {text!r}; expected one of {choices}") from None


CPU_BASE_SCORE = 2000.0
GPU_BASE_SCORE = 9960.0


@dataclass(frozen=True)
class ReferenceBase:
    score: float
    tag: str

    def __post_init__(self):
        if not self.score > 0:
            raise MachineSpecError(f"reference score must be positive, got {self.score}")


CPU_REFERENCE = ReferenceBase(CPU_BASE_SCORE, "cpu")
GPU_REFERENCE = ReferenceBase(GPU_BASE_SCORE, "gpu")


def reference_base(mode: Mode, override: float | None = None) -> ReferenceBase:
    if override is not None:
        return ReferenceBase(float(override), "user")
    return GPU_REFERENCE if mode is Mode.GPU else CPU_REFERENCE


@dataclass(frozen=True)
class MachineSpec:
    cpu_mark_single: float
    cpu_mark_multi: float | None = None
    num_cpu: int = 1
    gpu_g3d: float | None = None
    gpu_g2d: float | None = None
    num_gpu: int = 0
    mode: Mode = Mode.CPU_SINGLE
    name: str = ""

    def __post_init__(self):
        if isinstance(self.mode, str):
            object.__setattr__(self, "mode", Mode.parse(self.mode))
        for label in ("cpu_mark_single", "cpu_mark_multi", "gpu_g3d", "gpu_g2d"):
            value = getattr(self, label)
            numeric = isinstance(value, (int, float)) and not isinstance(value, bool)
            if value is not None and not (numeric and math.isfinite(value) and value > 0):
                raise MachineSpecError(f"{label} must be a positive score, got {value}")
        if not isinstance(self.num_cpu, int) or not isinstance(self.num_gpu, int):
            raise MachineSpecError("num_cpu and num_gpu must be integers")
        if self.num_cpu < 1:
            raise MachineSpecError(f"num_cpu must be at least 1, got {self.num_cpu}")
        if self.num_gpu < 0:
            raise MachineSpecError(f"num_gpu must be non-negative, got {self.num_gpu}")
        if self.mode is Mode.CPU_MULTI and self.cpu_mark_multi is None:
            raise MachineSpecError("cpu-multi mode needs cpu_mark_multi")
        if self.mode is Mode.GPU:
            if self.gpu_g3d is None or self.gpu_g2d is None:
                raise MachineSpecError("gpu mode needs both gpu_g3d and gpu_g2d")
            if self.num_gpu < 1:
                raise MachineSpecError("gpu mode needs num_gpu >= 1")

    def with_mode(self, mode: Mode | str) -> "MachineSpec":
        data = asdict(self)
        data["mode"] = Mode.parse(mode) if isinstance(mode, str) else mode
        return MachineSpec(**data)

    def fingerprint(self) -> dict:
        data = asdict(self)
        data["mode"] = self.mode.value
        data["score"] = machine_score(self)
        data["id"] = hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()[:12]
        return data


def machine_score(spec: MachineSpec) -> float:
    if spec.mode is Mode.CPU_SINGLE:
        return float(spec.cpu_mark_single)
    if spec.mode is Mode.CPU_MULTI:
        return float(spec.cpu_mark_multi)
    gpu_mark = 0.5 * (spec.gpu_g3d + spec.gpu_g2d)
    return 0.5 * (spec.num_cpu * spec.cpu_mark_single + spec.num_gpu * gpu_mark)


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite, got {value}")


def normalize_budget(t_max: float, s: float, s_base: float) -> float:
    """Wall-clock budget on a machine with score ``s``."""
    _check_positive(t_max=t_max, s=s, s_base=s_base)
    return t_max * s_base / s


def renormalize_time(t: float, s: float, s_base: float) -> float:
    """Measured seconds on a machine with score ``s`` in reference seconds."""
    _check_positive(s=s, s_base=s_base)
    if not t >= 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return t * s / s_base


def renormalize_trajectory(traj: Trajectory, s: float, s_base: float,
                           budget: float | None = None) -> Trajectory:
    """Map every incumbent time (and the budget) to reference seconds.

    Pass ``budget`` to pin the reference budget exactly instead of
    recomputing it through floating-point round trips.
    """
    _check_positive(s=s, s_base=s_base)
    if traj.normalized:
        raise ValueError("trajectory is already normalized")
    return traj.rescaled(s / s_base, budget=budget, normalized=True)


_SPEC_KEYS = {f for f in MachineSpec.__dataclass_fields__}


def machine_spec_from_mapping(data: dict) -> MachineSpec:
    table = data.get("machine", data)
    unknown = set(table) - _SPEC_KEYS
    if unknown:
        raise MachineSpecError(f"unknown machine spec keys: {', '.join(sorted(unknown))}")
    if "cpu_mark_single" not in table:
        raise MachineSpecError("machine spec needs cpu_mark_single")
    return MachineSpec(**table)


def load_machine_spec(path: str | Path) -> MachineSpec:
    """Read a TOML file with the :class:`MachineSpec` fields, at top level
    or under a ``[machine]`` table."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise MachineSpecError(f"{path}: {exc}") from None
    return machine_spec_from_mapping(data)


def dump_machine_spec(spec: MachineSpec) -> str:
    lines = ["[machine]"]
    for key, value in asdict(spec).items():
        if value is None:
            continue
        if isinstance(value, Mode):
            value = value.value
        lines.append(f"{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"
