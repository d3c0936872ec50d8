import pytest
from hypothesis import given

from ilp.syntax import (
    BOT, TOP, And, Box, BoxK, Imp, children, Neg, Or, ParseError, Rhd, Var, degree, expand_box, has_box,
    is_left_modalized, is_modalized, parse, parse_bimodal, show, size, subformulas, tilde,
    vars_of,
)

from strategies import formulas

p, q, r = Var("p"), Var("q"), Var("r")


def test_parse_persistence_axiom_shape():
    assert parse("p |> q -> [](p |> q)") == Imp(Rhd(p, q), Box(Rhd(p, q)))


def test_parse_constants_and_sugar():
    assert parse("false") == BOT
    assert parse("true") == TOP
    assert parse("<>p") == Neg(Box(Neg(p)))


def test_precedence():
    f = parse("~p & q | r")
    assert f == Or(And(Neg(p), q), r)
    assert parse(show(f)) == f


def test_implication_is_right_associative():
    assert parse("p -> q -> r") == Imp(p, Imp(q, r))


@pytest.mark.parametrize("text", ["p |> q |> r", "p <-> q <-> r"])
def test_non_associative_chains_rejected(text):
    with pytest.raises(ParseError, match="non-associative"):
        parse(text)


@pytest.mark.parametrize("text", ["p &", "P", "(p", "p q", ""])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ParseError, match="position"):
        parse(text)


def test_bimodal_parse():
    f = parse_bimodal("[0]p -> <1>q")
    assert f == Imp(BoxK(0, p), Neg(BoxK(1, Neg(q))))
    with pytest.raises(ValueError):
        BoxK(2, p)


def test_subformulas_examples():
    assert subformulas(Rhd(p, q)) == {Rhd(p, q), p, q}
    assert subformulas(Box(p)) == {Box(p), p}
    assert subformulas(Imp(p, Neg(p))) == {Imp(p, Neg(p)), Neg(p), p}


def test_tilde():
    assert tilde(Neg(p)) == p
    assert tilde(p) == Neg(p)
    assert tilde(Neg(Neg(p))) == Neg(p)


def test_vars():
    assert vars_of(Rhd(p, q)) == {"p", "q"}
    assert vars_of(BOT) == frozenset()
    assert vars_of(Box(Imp(p, p))) == {"p"}


def test_modalization():
    assert is_modalized(Box(p), "p") and is_left_modalized(Box(p), "p")
    assert is_modalized(Rhd(q, p), "p") and not is_left_modalized(Rhd(q, p), "p")
    assert not is_modalized(And(p, Box(p)), "p")


def _degree_oracle(f):
    # independent recursion written against the constructors
    if isinstance(f, (Var, type(BOT))):
        return 0
    if isinstance(f, Rhd):
        return max(_degree_oracle(f.left), _degree_oracle(f.right) + 1)
    if isinstance(f, (Neg, Box)):
        return _degree_oracle(f.sub)
    return max(_degree_oracle(f.left), _degree_oracle(f.right))


def test_degree_examples():
    assert degree(p) == 0 and degree(BOT) == 0
    assert degree(Rhd(p, q)) == 1
    assert degree(Rhd(Rhd(p, q), r)) == 1
    assert degree(Rhd(p, Rhd(q, r))) == 2


@given(formulas(("p", "q", "r")))
def test_degree_matches_oracle(f):
    assert degree(f) == _degree_oracle(f)


def test_expand_box_examples():
    assert expand_box(Box(p)) == Rhd(Neg(p), BOT)
    assert expand_box(Rhd(p, q)) == Rhd(p, q)
    assert expand_box(Box(Box(p))) == Rhd(Neg(Rhd(Neg(p), BOT)), BOT)


@given(formulas())
def test_print_parse_round_trip(f):
    assert parse(show(f)) == f
    assert show(parse(show(f))) == show(f)


@given(formulas())
def test_expand_box_idempotent_and_var_preserving(f):
    e = expand_box(f)
    assert not has_box(e)
    assert expand_box(e) == e
    assert vars_of(e) == vars_of(f)


@given(formulas())
def test_tilde_involution_on_pair(f):
    base = f.sub if isinstance(f, Neg) else f
    if not isinstance(base, Neg):
        assert tilde(tilde(base)) == base
        assert tilde(tilde(Neg(base))) == Neg(base)


@given(formulas())
def test_subformulas_finite_and_closed(f):
    subs = subformulas(f)
    assert f in subs
    assert len(subs) <= size(f)
    assert all(set(children(g)) <= subs for g in subs)


def test_formulas_hashable_structural():
    assert {parse("p |> q"), Rhd(p, q)} == {Rhd(p, q)}
