"""Every acceptance criterion at its stated tolerance; one PASS/FAIL line each."""

import pytest

from tzl.acceptance import CRITERIA, run_criterion

RESULTS = []


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number):
    r = run_criterion(number)
    RESULTS.append(r)
    print(r.line())
    assert r.passed, r.line()
