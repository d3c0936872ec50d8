import pytest
from hypothesis import given, strategies as st

from ilp.calculus import ILMPS, ILMS, Sequent, check
from ilp.corpus import formulas_up_to, instances
from ilp.search import (
    BudgetExceeded, NotProvable, Provable, decide, hunt_cut_needed, oracle_decide,
    prove, prove_fixpoint_oracle, reset_memo,
)
from ilp.semantics import countermodel_search
from ilp.syntax import BOT, Neg, Rhd, Var, expand_box, parse

from strategies import formulas

p, q, r = Var("p"), Var("q"), Var("r")


def _goal(text):
    return Sequent.of([], [expand_box(parse(text))])


def test_persistence_sequent():
    ab = Rhd(p, q)
    v = prove(ILMPS, Sequent.of([ab], [Rhd(Neg(ab), BOT)]))
    assert isinstance(v, Provable) and check(v.derivation)


def test_identity_sequent():
    assert prove(ILMPS, Sequent.of([p], [p]))


def test_ilms_e2_instance():
    goal = Sequent.of([Rhd(Neg(parse("p -> q")), BOT), Rhd(q, r)], [Rhd(p, r)])
    v = prove(ILMS, goal)
    assert v and check(v.derivation)
    assert v.derivation.root.rule == "Rhd"


def test_decide_examples():
    assert decide(parse("p |> q -> [](p |> q)"))
    assert isinstance(decide(parse("[](p -> q) -> p |> q")), NotProvable)
    assert isinstance(decide(parse("<>p |> p")), NotProvable)


def test_non_theorems_have_countermodels():
    # soundness backs the verdict: a model falsifies each formula
    for text in ("[](p -> q) -> p |> q", "<>p |> p"):
        assert countermodel_search(parse(text), max_worlds=3) is not None


def test_oracle_examples():
    assert prove_fixpoint_oracle(Sequent.of([p], [p]))
    assert prove_fixpoint_oracle(_goal("p |> p -> [](p |> p)"))
    assert not prove_fixpoint_oracle(_goal("[](p -> q) -> p |> q"))


def test_budget_is_distinct_from_failure():
    reset_memo()
    with pytest.raises(BudgetExceeded):
        decide(parse("(p |> q) & (q |> r) -> (p |> r) | [](p -> q)"), budget=1)


def test_oracle_closure_budget():
    with pytest.raises(BudgetExceeded):
        prove_fixpoint_oracle(_goal("(p |> q) & (q |> r) -> (p |> r)"), closure_budget=3)


@pytest.mark.parametrize("scheme", ["J3", "J6l", "J6r", "J6", "E2", "P"])
def test_derivable_schemes_size_five(scheme):
    for f in instances(scheme, 5, ("p",)):
        assert decide(f), f


@pytest.mark.parametrize("scheme", ["J1", "J2", "J4", "J5", "J2+", "J4+"])
def test_underivable_schemes_have_refuted_instances(scheme):
    hits = [f for f in instances(scheme, 3, ("p", "q")) if not decide(f)]
    assert hits
    assert countermodel_search(hits[0], max_worlds=3) is not None


def test_oracle_agreement_small_corpus():
    for f in formulas_up_to(5, ("p",)):
        assert bool(decide(f)) == oracle_decide(f), f


@given(formulas(("p",), max_leaves=5), st.sampled_from([Var("q"), Rhd(p, Var("q"))]))
def test_weakening_monotone(f, extra):
    goal = Sequent.of([], [expand_box(f)])
    if prove(ILMPS, goal):
        assert prove(ILMPS, Sequent.of([extra], [expand_box(f), extra]))


@given(formulas(("p", "q"), max_leaves=5))
def test_ilms_provable_implies_ilmps_provable(f):
    goal = Sequent.of([], [expand_box(f)])
    if prove(ILMS, goal):
        assert prove(ILMPS, goal)


def test_cut_hunt_harness_runs():
    goals = [Sequent.of([Rhd(p, q)], [Rhd(Neg(Rhd(p, q)), BOT)])]
    found = hunt_cut_needed(goals, [Rhd(p, q), p])
    for w in found:
        assert check(w.derivation)
