import random

import pytest
from hypothesis import given, strategies as st

from ilp.corpus import random_left_modalized, substitution_instances
from ilp.fixedpoint import (
    FixpointError, construct, fixpoint, fixpoint_rhd, fold_constants, fpp_witness,
    refute_fpp_witness,
)
from ilp.search import NotProvable, decide
from ilp.syntax import (
    BOT, TOP, And, Box, Neg, Rhd, Var, iff, is_left_modalized, parse, substitute, vars_of,
)

p, q, r = Var("p"), Var("q"), Var("r")


def test_rhd_case_box():
    assert fixpoint_rhd(Neg(p), BOT) == Rhd(Neg(TOP), BOT)


def test_rhd_case_absent_variable():
    f = fixpoint_rhd(q, r)
    assert f == Rhd(q, r)
    assert decide(iff(f, Rhd(q, r)))


def test_rhd_case_conjunction():
    f = fixpoint_rhd(And(p, q), r)
    assert f == Rhd(And(TOP, q), r)
    assert decide(iff(f, Rhd(And(f, q), r)))


def test_rhd_case_precondition():
    with pytest.raises(FixpointError):
        fixpoint_rhd(q, p)


def test_box_fixpoint():
    res = fixpoint(Box(p))
    assert res.fixpoint == Rhd(Neg(TOP), BOT)
    assert res.ok and res.variable_condition
    assert decide(iff(res.fixpoint, Box(res.fixpoint)))


def test_fold_option():
    assert fixpoint(Box(p), fold=True).fixpoint == Rhd(BOT, BOT)
    assert fold_constants(parse("true & q -> false")) == Neg(q)


def test_absent_variable_is_constant_map():
    res = fixpoint(Rhd(q, BOT))
    assert res.fixpoint == Rhd(q, BOT)


def test_right_occurrence_rejected():
    with pytest.raises(FixpointError):
        fixpoint(Rhd(TOP, Neg(p)))


def test_unverified_mode_reports_none():
    res = fixpoint(parse("~(p |> q)"), verify=False)
    assert res.equivalence_verdict is None and not res.ok


def test_several_classes():
    a = parse("(p |> q) & ((~p | r) |> false)")
    res = fixpoint(a)
    assert res.ok
    assert vars_of(res.fixpoint) <= {"q", "r"}


@pytest.mark.parametrize("f", [TOP, BOT, Box(BOT)])
def test_fpp_fails_for_constants(f):
    assert isinstance(decide(fpp_witness(f)), NotProvable)


def test_refute_fpp_witness_small():
    rep = refute_fpp_witness(4)
    assert rep.ok and rep.checked > 0


@given(st.integers(min_value=0, max_value=10**6))
def test_random_left_modalized(seed):
    a = random_left_modalized(random.Random(seed), 3)
    assert is_left_modalized(a, "p")
    res = fixpoint(a)
    assert res.ok
    assert vars_of(res.fixpoint) <= vars_of(a) - {"p"}
    assert decide(iff(res.fixpoint, substitute(a, "p", res.fixpoint)))


def test_substitution_lemma_instances():
    fs = list(substitution_instances(6, ("p", "q")))
    rng = random.Random(0)
    for f in rng.sample(fs, min(150, len(fs))):
        assert decide(f)


def test_construct_is_deterministic():
    a = parse("[](p -> q) & (p |> r)")
    assert construct(a) == construct(a)
