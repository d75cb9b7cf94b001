"""Acceptance suite: one printed pass/fail line per criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines inline;
they also land in the captured output of any failure.
"""
import pytest

from hkcalc.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda n: f"criterion_{n}")
def test_criterion(number):
    result = run_criterion(number)
    print(result.line())
    for check in result.checks:
        print(f"    {'ok  ' if check.ok else 'FAIL'} {check.name}: {check.detail}")
    failed = [c.name for c in result.checks if not c.ok]
    assert result.passed, f"criterion {number} failing checks: {failed}"
