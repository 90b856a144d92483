import sys
from pathlib import Path

import pytest

from blocktransversal import BlockInstance, ExactMatrix, make_field

sys.path.insert(0, str(Path(__file__).parent))

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def gf5_instance():
    G = ExactMatrix.from_rows(make_field("gf 5"), [[1, 2, 0], [2, 4, 1], [0, 1, 3]])
    return BlockInstance(G, [[0, 1], [2]], [[0, 1], [2]], [1, 1], [1, 1])


@pytest.fixture
def ones_instance():
    G = ExactMatrix.from_rows(make_field("rational"), [[1, 1], [1, 1]])
    return BlockInstance(G, [[0], [1]], [[0], [1]], [1, 1], [1, 1])


@pytest.fixture
def identity_instance():
    G = ExactMatrix.identity(make_field("gf 2"), 2)
    return BlockInstance(G, [[0], [1]], [[0, 1]], [1, 1], [2])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
