import pytest
from hypothesis import assume, given

from ilp.calculus import ILMPS, ILMS, Derivation, Sequent, check, init, init_bot, make_rhdp, weaken_to
from ilp.interpolation import Separation, interpolate, maehara
from ilp.search import NotProvable, decide, prove
from ilp.syntax import BOT, And, Imp, Neg, Or, Rhd, Var, expand_box, parse, vars_of

from strategies import formulas

p, q, r = Var("p"), Var("q"), Var("r")


def _verify(res, a, b):
    assert check(res.proof_left) and check(res.proof_right)
    assert res.variable_condition()
    assert vars_of(res.formula) <= vars_of(a) & vars_of(b)
    assert decide(Imp(a, res.formula)) and decide(Imp(res.formula, b))


def test_identity_interpolant_is_p():
    d = prove(ILMPS, Sequent.of([p], [p])).derivation
    res = maehara(d, Separation.of([p], [], [], [p]))
    assert res.formula == p


def test_modal_weakening_example():
    a, b = Rhd(p, q), Rhd(p, Or(q, r))
    res = interpolate(a, b)
    _verify(res, a, b)
    assert vars_of(res.formula) <= {"p", "q"}


def test_inconsistent_antecedent():
    a = And(p, Neg(p))
    res = interpolate(a, q)
    _verify(res, a, q)
    assert vars_of(res.formula) == frozenset()


def test_non_theorem_reported():
    assert isinstance(interpolate(p, q), NotProvable)


def test_separation_must_cover_sequent():
    d = prove(ILMPS, Sequent.of([p], [p])).derivation
    with pytest.raises(ValueError):
        maehara(d, Separation.of([p], [], [p], [p]))
    with pytest.raises(ValueError):
        maehara(d, Separation.of([], [], [], [p]))


def _no_principal_rhdp(diag):
    return Derivation(make_rhdp([], [], diag, weaken_to(init_bot(), [diag, BOT], []), []), ILMPS)


def test_empty_disjunctions_are_false():
    # the premise false-sequent interpolates to true (all right) or false (all left)
    diag = Rhd(BOT, q)
    d = _no_principal_rhdp(diag)
    right = maehara(d, Separation.of([], [], [], [diag]))
    assert right.formula == Rhd(Neg(Neg(BOT)), BOT)
    left = maehara(d, Separation.of([], [diag], [], []))
    assert left.formula == Neg(Rhd(BOT, BOT))
    for res in (left, right):
        assert check(res.proof_left) and check(res.proof_right)


def test_ilms_derivation_interpolates():
    goal = Sequent.of([Rhd(Neg(parse("p -> q")), BOT), Rhd(q, r)], [Rhd(p, r)])
    d = prove(ILMS, goal).derivation
    sep = Separation.of([Rhd(Neg(parse("p -> q")), BOT)], [], [Rhd(q, r)], [Rhd(p, r)])
    res = maehara(d, sep)
    assert check(res.proof_left) and check(res.proof_right)
    assert res.variable_condition()


def test_deterministic():
    a, b = parse("[]p & (q |> r)"), parse("(q |> r) | []p")
    assert interpolate(a, b).formula == interpolate(a, b).formula


@given(formulas(("p", "q"), max_leaves=5), formulas(("q", "r"), max_leaves=5))
def test_random_implications(a, b):
    res = interpolate(a, Or(a, b))
    _verify(res, a, Or(a, b))


@given(formulas(("p", "q", "r"), max_leaves=6), formulas(("p", "q", "r"), max_leaves=6))
def test_random_provable_pairs(a, b):
    res = interpolate(a, b)
    assume(not isinstance(res, NotProvable))
    _verify(res, a, b)
