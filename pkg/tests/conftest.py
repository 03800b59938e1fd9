import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reacsynth.smt import SmtSolver, SolverConfig  # noqa: E402


@pytest.fixture(scope="session")
def solver():
    s = SmtSolver(SolverConfig(timeout=60))
    yield s
    s.close()


@pytest.fixture(scope="session")
def synthesized(solver):
    """Memoized ``name -> (ts, outcome)`` over the benchmark corpus."""
    from reacsynth.engine import synthesize
    from support import bench_ts

    cache = {}

    def get(name):
        if name not in cache:
            ts = bench_ts(name)
            cache[name] = (ts, synthesize(ts, solver))
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    from support import ACCEPTANCE
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
