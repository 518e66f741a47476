"""Acceptance criteria, one test per criterion.

Each test prints a [PASS]/[FAIL] line per check (visible in ``pytest -v``
output, even when captured) and then asserts every check.  Tolerances live
in ``sharpqm.acceptance``.  Checks that fail are left failing; see the
README for the ones that do not hold.
"""

import pytest

from sharpqm.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("k", sorted(CRITERIA), ids=lambda k: f"C{k:02d}")
def test_criterion(k, capsys):
    rows = run_criterion(k)
    with capsys.disabled():
        print()
        for r in rows:
            print(r.line())
    failed = [r.line() for r in rows if not r.passed]
    assert rows
    assert not failed, "\n".join(failed)
