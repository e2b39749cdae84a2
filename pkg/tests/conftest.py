import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "repo", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

from vrpbench.instance import Instance  # noqa: E402
from vrpbench.solver import warmup  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    warmup()


def random_instance(seed: int, n: int, capacity_range=(10, 25)) -> Instance:
    rng = np.random.default_rng(seed)
    coords = rng.random((n + 1, 2))
    demands = np.concatenate(([0], rng.integers(1, 10, n)))
    cap = float(max(demands.max(), rng.integers(*capacity_range)))
    return Instance(f"r{seed}", coords, demands, cap)


@pytest.fixture
def tiny():
    return Instance("tiny", [[0, 0], [3, 4], [0, 1], [1, 0]], [0, 2, 3, 4], 6)


ACCEPTANCE_LINES: list[str] = []


def verdict(label: str, ok: bool, detail: str) -> None:
    """Record one acceptance line and fail the calling test if ``ok`` is false."""
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
