"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one PASS/FAIL line per criterion (visible in ``pytest -v``
output) before asserting.
"""

import time

import numpy as np
import pytest

from cavnet import checks
from cavnet.netmodel import FITTED_RATES

BUDGET_S = {1: 1, 2: 1, 3: 1, 4: 30, 5: 60, 6: 120, 7: 120, 8: 1, 9: 10}


def _report(capsys, criterion, rows, elapsed):
    ok = all(r.passed for r in rows) and elapsed <= BUDGET_S[criterion]
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion} "
              f"({elapsed:.1f} s, budget {BUDGET_S[criterion]} s)")
        for r in rows:
            print("    " + r.line())
    return ok


@pytest.mark.parametrize("criterion", sorted(checks.CRITERIA))
def test_criterion(capsys, criterion):
    _, fn = checks.CRITERIA[criterion]
    t0 = time.perf_counter()
    rows = fn(FITTED_RATES) if criterion in checks.TAKES_RATES else fn()
    elapsed = time.perf_counter() - t0
    ok = _report(capsys, criterion, rows, elapsed)
    failed = [r.line() for r in rows if not r.passed]
    assert not failed, failed
    assert ok, f"criterion {criterion} exceeded its {BUDGET_S[criterion]} s budget"


def test_inverse_problem_ratio_049(capsys):
    rows = checks.inverse_transfer(0.49)
    with capsys.disabled():
        print("\n    " + rows[0].line())
    assert rows[0].passed
