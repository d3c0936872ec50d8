import json

import pytest
from hypothesis import given

from ilp.calculus import (
    ILMPS, ILMS, Derivation, Node, Sequent, box, check, compose_cut, derivation_from_json,
    derivation_to_json, dumps, init, is_cut_free, iter_nodes, make_box_rule, make_rhd, make_rhdp,
    parse_sequent, rebuild, same_tree, weaken_to,
)
from ilp.search import decide, prove
from ilp.syntax import BOT, Neg, Or, Rhd, Var, expand_box, parse

from strategies import formulas

p, q, r = Var("p"), Var("q"), Var("r")


def persistence_derivation(a=p, b=q) -> Derivation:
    """A|>B => (~(A|>B))|>false by the modal rule with no principals."""
    ab = Rhd(a, b)
    diag = Rhd(Neg(ab), BOT)
    left = rebuild("NegL", Neg(ab), [init(ab)])
    return Derivation(make_rhdp([ab], [], diag, left, []), ILMPS)


def test_persistence_derivation_checks():
    d = persistence_derivation()
    assert check(d)
    assert is_cut_free(d)
    assert d.conclusion == Sequent.of([Rhd(p, q)], [Rhd(Neg(Rhd(p, q)), BOT)])


def test_initial_sequent_checks():
    assert check(Derivation(init(p), ILMPS))


def test_missing_diagonal_is_reported():
    good = persistence_derivation().root
    diag = good.diagonal
    # left premise lacking the diagonal formula
    inner = rebuild("NegL", Neg(Rhd(p, q)), [init(Rhd(p, q))])
    bad = Node("RhdP", good.seq, (inner,), (), diag)
    res = check(Derivation(bad, ILMPS))
    assert not res
    assert "diagonal missing" in res.message


def test_rhdp_not_allowed_in_ilms():
    d = Derivation(persistence_derivation().root, ILMS)
    assert not check(d)


def test_box_rule_in_ilms():
    # []p => [][]p  (transitivity) through the box rule
    bp = box(p)
    prem = weaken_to(init(bp), [bp, p, box(bp)], [bp])
    node = make_box_rule([bp], bp, prem)
    assert check(Derivation(node, ILMS))


def test_rhd_rule_with_no_principals():
    # false |> q  from  false =>  (n = 0)
    from ilp.calculus import init_bot
    node = make_rhd([], Rhd(BOT, q), init_bot(), [])
    assert check(Derivation(node, ILMS))


def test_compose_cut_shapes():
    left = prove(ILMPS, Sequent.of([p], [p]))
    right = prove(ILMPS, Sequent.of([p], [Or(p, q)]))
    d = compose_cut(left.derivation, right.derivation, p)
    assert d.root.rule == "Cut"
    assert d.conclusion == Sequent.of([p], [Or(p, q)])
    assert check(d) and not is_cut_free(d)
    with pytest.raises(ValueError):
        compose_cut(left.derivation, right.derivation, q)


def test_compose_cut_modal_halves():
    a = Rhd(p, q)
    b = Rhd(p, Or(q, r))
    left = prove(ILMPS, Sequent.of([a], [b]))
    right = prove(ILMPS, Sequent.of([b], [b]))
    d = compose_cut(left.derivation, right.derivation, b)
    assert check(d)
    assert d.conclusion == Sequent.of([a], [b])


def test_parse_sequent():
    s = parse_sequent("p |> q, r => p, (q | r)")
    assert s == Sequent.of([Rhd(p, q), r], [p, Or(q, r)])


def test_json_round_trip_bit_exact():
    d = persistence_derivation()
    text = dumps(derivation_to_json(d))
    back = derivation_from_json(json.loads(text))
    assert same_tree(back.root, d.root)
    assert dumps(derivation_to_json(back)) == text


@given(formulas(("p", "q"), max_leaves=5))
def test_search_proofs_check(f):
    v = decide(f)
    if v:
        assert check(v.derivation)
        assert is_cut_free(v.derivation)
        assert v.derivation.conclusion == Sequent.of([], [expand_box(f)])
        from ilp.syntax import has_box
        for n in iter_nodes(v.derivation.root):
            assert not any(has_box(g) for g in n.ant | n.suc)
