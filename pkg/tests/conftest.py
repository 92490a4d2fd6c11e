import itertools
from pathlib import Path

import pytest

from infosize.market import make_problem

DATA = Path(__file__).parent / "data"
PERMS3 = list(itertools.permutations(range(3)))

# Worked 3x3 instances; student 1 and school a are index 0.
EX2_TTC = make_problem(((0, 1, 2), (1, 2, 0), (1, 2, 0)), ((1, 2, 0), (2, 1, 0), (2, 1, 0)))
EX2_DA = make_problem(((0, 1, 2), (1, 2, 0), (1, 2, 0)), ((1, 2, 0), (0, 2, 1), (2, 1, 0)))

_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line; the lines are replayed in the terminal summary."""

    def record(number: int, ok: bool, text: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE:
        terminalreporter.write_line(line)


def all_problems3():
    for prefs in itertools.product(PERMS3, repeat=3):
        for prios in itertools.product(PERMS3, repeat=3):
            yield make_problem(prefs, prios)
