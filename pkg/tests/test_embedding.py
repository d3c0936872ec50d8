import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from ilp.acceptance import random_simplified_frame
from ilp.canonical import CanonicalError, countermodel
from ilp.corpus import instances
from ilp.embedding import (
    DOUBLE_ONE_BOT, as_bimodal, check_translation_soundness, chi, correspondence_failures,
    double_one_valid, fails_at_x, fpp_equation, fpp_failure_sample, transfer, two_world_frame,
)
from ilp.semantics import (
    BimodalModel, ModelError, SimplifiedModel, check_dagger, eval as holds, frame_validates,
)
from ilp.syntax import BOT, And, Bot, BoxK, Imp, Neg, Or, Var, parse, parse_bimodal, vars_of

from strategies import formulas

J1 = parse("[](p -> q) -> p |> q")
J1_MODEL = SimplifiedModel(["w", "x"], [("w", "x")], [], {"p": ["x"], "q": ["x"]})


def naive_holds(model: BimodalModel, world: str, f) -> bool:
    """Direct recursive reading of the bimodal clauses over world names."""
    rel = {0: model.R0, 1: model.R1}
    if isinstance(f, Var):
        return world in model.valuation[f.name]
    if isinstance(f, Bot):
        return False
    if isinstance(f, Neg):
        return not naive_holds(model, world, f.sub)
    if isinstance(f, And):
        return naive_holds(model, world, f.left) and naive_holds(model, world, f.right)
    if isinstance(f, Or):
        return naive_holds(model, world, f.left) or naive_holds(model, world, f.right)
    if isinstance(f, Imp):
        return not naive_holds(model, world, f.left) or naive_holds(model, world, f.right)
    if isinstance(f, BoxK):
        return all(naive_holds(model, v, f.sub) for (u, v) in rel[f.k] if u == world)
    raise TypeError(f)


def test_chi_rhd():
    assert chi(parse("p |> q")) == parse_bimodal("[0](p -> <1>q)")


def test_chi_box():
    assert chi(parse("[]p")) == BoxK(0, Var("p"))


def test_chi_false():
    assert chi(BOT) == BOT


def test_chi_is_homomorphic_on_connectives():
    a = parse("~(p & q) | (p -> []q)")
    assert chi(a) == parse_bimodal("~(p & q) | (p -> [0]q)")


def test_chi_rejects_bimodal_input():
    with pytest.raises(TypeError):
        chi(BoxK(1, Var("p")))


def test_transfer_of_hand_made_j1_model():
    t = transfer(J1_MODEL, "w", J1)
    assert t.translated == chi(J1)
    assert not naive_holds(t.model, "w", t.translated)
    assert frame_validates(t.model, DOUBLE_ONE_BOT)


def test_transfer_of_canonical_j1_countermodel():
    cm = countermodel(J1, stage="level")
    assert check_dagger(cm.model)
    t = transfer(cm.model, cm.world, J1)
    assert not naive_holds(t.model, cm.world, chi(J1))
    assert double_one_valid(cm.model)
    assert correspondence_failures(cm.model, [J1]) == []


def test_transfer_rejects_true_formula():
    with pytest.raises(ModelError):
        transfer(J1_MODEL, "w", parse("[](p -> q)"))


def test_transfer_rejects_unknown_world():
    with pytest.raises(ModelError):
        transfer(J1_MODEL, "nowhere", J1)


def test_transfer_rejects_long_s_chain():
    m = SimplifiedModel(["w", "x", "y"], [("w", "x"), ("w", "y")], [("x", "y"), ("y", "x")],
                        {"p": [], "q": []})
    assert not check_dagger(m)
    with pytest.raises(ModelError):
        transfer(m, "w", parse("p"))


def test_no_countermodel_for_p_axiom():
    with pytest.raises(CanonicalError):
        countermodel(parse("p |> q -> [](p |> q)"))


@settings(max_examples=40)
@given(st.integers(0, 10**6), formulas(("p", "q"), max_leaves=5))
def test_satisfaction_correspondence(seed, f):
    m = random_simplified_frame(random.Random(seed), 4)
    m = m.with_valuation({v: [w for i, w in enumerate(m.worlds) if (seed >> i) & 1]
                          for v in ("p", "q")})
    assert correspondence_failures(m, [f]) == []
    bm = as_bimodal(m)
    for w in m.worlds:
        assert holds(m, w, f) == naive_holds(bm, w, chi(f))


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_double_one_valid_iff_no_long_s_chain(seed):
    m = random_simplified_frame(random.Random(seed), 4)
    assert double_one_valid(m) == check_dagger(m)


def test_soundness_on_p_and_j6_instances():
    corpus = list(instances("P", 2))[:3] + list(instances("J6", 1))[:3]
    rep = check_translation_soundness(corpus, max_worlds=3)
    assert rep.ok
    assert rep.checked == len(corpus)
    assert rep.frames > 0


def test_soundness_check_catches_j1():
    rep = check_translation_soundness([J1], max_worlds=2)
    assert not rep.ok
    f, frame = rep.failures[0]
    assert f == J1
    assert not frame_validates(frame, chi(J1))


def test_two_world_frame_shape():
    fr = two_world_frame()
    assert fr.R0 == frozenset({("x", "y")})
    assert fr.R1 == frozenset({("y", "x")})


@pytest.mark.parametrize("text", ["p", "false", "[1]p", "[0]~[1]p", "<1>p & [0]q"])
def test_fixed_point_equation_fails_at_x(text):
    f = parse_bimodal(text)
    assert fails_at_x(f)
    fr = two_world_frame()
    vs = sorted(vars_of(f))
    # dual route: every valuation, naive evaluator
    subsets = [[], ["x"], ["y"], ["x", "y"]]
    for choice in product(subsets, repeat=len(vs)):
        m = fr.with_valuation(dict(zip(vs, choice)))
        assert not naive_holds(m, "x", fpp_equation(f))


def test_fpp_failure_sample():
    fs, bad = fpp_failure_sample(n=50, seed=0)
    assert len(fs) == 50
    assert bad == []


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_fpp_failure_random_seeds(seed):
    _, bad = fpp_failure_sample(n=5, seed=seed, depth=3)
    assert bad == []
