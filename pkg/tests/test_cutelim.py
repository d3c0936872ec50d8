import pytest
from hypothesis import given, settings, strategies as st

from ilp.acceptance import cut_corpus
from ilp.calculus import (
    ILMPS, Derivation, Sequent, check, compose_cut, init, init_bot, is_cut_free, make_cut,
    make_rhdp, same_tree, weaken_to,
)
from ilp.cutelim import Trace, eliminate, eliminate_principal, drop_diagonal, only_cuts_on
from ilp.search import prove
from ilp.syntax import BOT, Or, Rhd, Var

from test_calculus import persistence_derivation

p, q, r = Var("p"), Var("q"), Var("r")


def identity_rhdp(a: Rhd) -> Derivation:
    """a => a by the modal rule with a principal and diagonal."""
    left = weaken_to(init(a.left), [a, a.left], [a.left])
    return Derivation(make_rhdp([a], [a], a, left, [init(a.right)]), ILMPS)


def test_cut_free_input_unchanged():
    d = persistence_derivation()
    e = eliminate(d)
    assert same_tree(e.root, d.root)


def test_atomic_cut_on_initial_sequents():
    d = Derivation(make_cut(init(p), init(p), p), ILMPS)
    e = eliminate(d)
    assert check(e) and is_cut_free(e) and e.conclusion == Sequent.of([p], [p])


def test_persistence_cut_with_identity():
    d1 = persistence_derivation()
    diag = next(iter(d1.conclusion.suc))
    d2 = prove(ILMPS, Sequent.of([diag], [diag])).derivation
    d = compose_cut(d1, d2, diag)
    e = eliminate(d)
    assert check(e) and is_cut_free(e) and e.conclusion == d.conclusion


def _smallest_principal_pair():
    ab = Rhd(BOT, q)
    cd = Rhd(BOT, Or(q, r))
    pi = make_rhdp([], [], ab, weaken_to(init_bot(), [ab, BOT], []), [])
    sigma_left = weaken_to(init_bot(), [ab, cd, BOT], [BOT])
    side = prove(ILMPS, Sequent.of([q], [Or(q, r)])).derivation.root
    sigma = make_rhdp([ab], [ab], cd, sigma_left, [side])
    return Derivation(pi, ILMPS), Derivation(sigma, ILMPS), ab, cd


def test_principal_smallest_instance():
    pi, sigma, ab, cd = _smallest_principal_pair()
    assert check(pi) and check(sigma)
    tr = Trace()
    e = eliminate_principal(pi, sigma, ab, tr)
    assert check(e) and is_cut_free(e)
    assert e.conclusion == Sequent.of([], [cd])
    assert "principal:RhdP/RhdP" in tr.reductions()


def test_principal_with_one_principal_formula():
    a = Rhd(p, q)
    b = Rhd(p, Or(q, r))
    pi = identity_rhdp(a)
    left = weaken_to(init(p), [a, b, p], [p])
    side = prove(ILMPS, Sequent.of([q], [Or(q, r)])).derivation.root
    sigma = Derivation(make_rhdp([a], [a], b, left, [side]), ILMPS)
    e = eliminate_principal(pi, sigma, a)
    assert check(e) and is_cut_free(e)
    assert e.conclusion == Sequent.of([a], [b])


def test_principal_requires_modal_proofs():
    _, sigma, ab, _ = _smallest_principal_pair()
    with pytest.raises(ValueError):
        eliminate_principal(Derivation(init(ab), ILMPS), sigma, ab)


def test_drop_diagonal_cuts_only_on_components():
    a = Rhd(p, q)
    pi = identity_rhdp(a)
    d = drop_diagonal(pi, frozenset())
    assert check(d)
    assert only_cuts_on(d, {a.left, a.right})


def test_cutelim_rejects_ilms():
    with pytest.raises(ValueError):
        eliminate(Derivation(init(p), "ILms"))


@settings(max_examples=15)
@given(st.integers(min_value=0, max_value=10_000))
def test_random_modal_cuts(seed):
    for d in cut_corpus(3, seed, max_tries=400):
        tr = Trace()
        e = eliminate(d, tr)   # raises MeasureError if the measure fails to decrease
        assert check(e) and is_cut_free(e) and e.conclusion == d.conclusion
        # cross-check against direct search of the same endsequent
        assert prove(ILMPS, d.conclusion)
        for step in tr.steps:
            assert step.measure < step.parent
