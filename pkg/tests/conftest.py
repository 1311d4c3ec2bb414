import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from electpol.model import ElectionMatrix, VoteRecord  # noqa: E402


def make_matrix(votes, candidates=None, units=None):
    votes = np.asarray(votes, dtype=float)
    m, n = votes.shape
    candidates = candidates or [chr(ord("A") + i) for i in range(n)]
    units = units or [f"u{k}" for k in range(m)]
    return ElectionMatrix(units, candidates, votes)


@st.composite
def vote_tables(draw, max_units=8, max_candidates=5, max_votes=500):
    """Integer vote tables where every candidate and unit has some votes."""
    m = draw(st.integers(1, max_units))
    n = draw(st.integers(2, max_candidates))
    rows = draw(st.lists(
        st.lists(st.integers(0, max_votes), min_size=n, max_size=n), min_size=m, max_size=m))
    votes = np.array(rows, dtype=float)
    for i in range(n):
        if votes[:, i].sum() == 0:
            votes[0, i] = 1
    for k in range(m):
        if votes[k].sum() == 0:
            votes[k, 0] = 1
    return votes


@pytest.fixture
def chile_records():
    """Four stations in two communes of one region, plus a second region."""
    rows = [
        ("R01|P1|C1|ST1", "A", 60), ("R01|P1|C1|ST1", "B", 40),
        ("R01|P1|C1|ST2", "A", 30), ("R01|P1|C1|ST2", "B", 70),
        ("R01|P1|C2|ST7", "A", 10), ("R01|P1|C2|ST7", "B", 5),
        ("R02|P4|C9|ST1", "A", 5), ("R02|P4|C9|ST1", "B", 95),
    ]
    return [VoteRecord(p, c, v) for p, c, v in rows]


# acceptance criterion id -> passed, filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, bool] = {}


def pytest_runtest_makereport(item, call):
    crit = item.get_closest_marker("criterion")
    if crit and call.when == "call":
        key = crit.args[0]
        ACCEPTANCE[key] = ACCEPTANCE.get(key, True) and call.excinfo is None


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(k.split()[0].rstrip("abc")), k)):
        terminalreporter.write_line(f"{'PASS' if ACCEPTANCE[key] else 'FAIL'}  {key}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion this test checks")
