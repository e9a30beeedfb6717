import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rqgraph import kernels  # noqa: E402
from rqgraph.families import open_kne  # noqa: E402
from rqgraph.scattering import solve_masks  # noqa: E402

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def warm_kernels():
    """Trigger JIT compilation once so timed criteria measure the computation."""
    g = open_kne(4)
    masks = np.arange(32, dtype=np.uint64)
    solve_masks(g, masks, 0.7, reflection=True)
    solve_masks(g, masks, np.pi)
    kernels.orbit_min(masks, np.zeros((1, g.edge_count), dtype=np.int64) + np.arange(g.edge_count))
    return kernels.BACKEND


@pytest.fixture(scope="session")
def acceptance_report():
    def record(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
