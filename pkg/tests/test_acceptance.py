"""Acceptance criteria 1-8 at full scale, one PASS/FAIL line per criterion."""

import pytest

from ilp.acceptance import CRITERIA, SelftestConfig, run_all

FULL = SelftestConfig(max_size=4, variables=("p", "q"), seed=0, quick=False)


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in run_all(FULL)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(results, number, capsys):
    r = results[number]
    with capsys.disabled():
        print(f"\n{r.line()}")
    assert r.budget_exceeded == 0, r.line()
    assert r.passed is True, (r.line(), r.failures[:5])
