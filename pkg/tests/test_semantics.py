import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from ilp.acceptance import random_simplified_frame
from ilp.corpus import instances
from ilp.search import decide
from ilp.semantics import (
    BimodalModel, ModelError, SimplifiedModel, VeltmanModel, P_condition_violation, check_dagger,
    check_P_condition, countermodel_search, dumps_model, eval, extension, frame_correspondence_P,
    frame_validates, model_from_json, model_to_json, refuting_valuation, simplified_frames,
    to_dot, to_networkx, veltman_frames,
)
from ilp.syntax import BOT, TOP, Box, Rhd, Var, parse, parse_bimodal

from strategies import formulas

J1_MODEL = SimplifiedModel(["w", "x"], [("w", "x")], [], {"p": ["x"], "q": ["x"]})


def test_j1_two_world_model():
    assert eval(J1_MODEL, "w", parse("[](p -> q)"))
    assert not eval(J1_MODEL, "w", parse("p |> q"))


def test_false_never_holds():
    assert extension(J1_MODEL, BOT) == 0


def test_bimodal_two_world():
    m = BimodalModel(["x", "y"], [("x", "y")], [("y", "x")], {"p": ["x"]})
    assert not eval(m, "x", parse_bimodal("p <-> [0]~[1]p"))


def test_validity_examples():
    assert frame_validates(J1_MODEL, parse("p |> q -> [](p |> q)"))
    assert not frame_validates(J1_MODEL, parse("[](p -> q) -> p |> q"))
    single = SimplifiedModel(["w"], [], [])
    assert frame_validates(single, Box(BOT))


def test_reflexive_point_rejected():
    with pytest.raises(ModelError):
        SimplifiedModel(["w"], [("w", "w")], [])


def test_s_family_must_start_at_successor():
    with pytest.raises(ModelError):
        VeltmanModel(["w", "x"], [("w", "x")], {"w": [("w", "x")]})


def test_veltman_rhd_clause():
    m = VeltmanModel(["w", "x", "y"], [("w", "x"), ("w", "y")], {"w": [("x", "y")]},
                     {"p": ["x"], "q": ["y"]})
    assert eval(m, "w", parse("p |> q"))
    assert not eval(m, "w", parse("p |> ~q"))


def test_P_condition_examples():
    empty = VeltmanModel(["a", "b"], [("a", "b")], {})
    assert check_P_condition(empty)
    chain = VeltmanModel(["w", "x", "y", "z"],
                         [("w", "x"), ("x", "y"), ("w", "y"), ("w", "z"), ("x", "z"), ("y", "z")],
                         {"w": [("y", "z")]})
    assert not check_P_condition(chain)
    assert P_condition_violation(chain) == ("w", "x", "y", "z")
    cond, valid = frame_correspondence_P(chain, instances("P", 3, ("p", "q")))
    assert not cond and not valid


def test_dagger():
    assert check_dagger(SimplifiedModel(["a"], [], []))
    assert not check_dagger(SimplifiedModel(["a", "b", "c"], [], [("a", "b"), ("b", "c")]))


def test_clause_b_is_experimental():
    # S points outside R[w]: clause (a) accepts, clause (b) does not
    m = SimplifiedModel(["w", "x", "y"], [("w", "x")], [("x", "y")], {"p": ["x"], "q": ["y"]})
    f = parse("p |> q")
    assert eval(m, "w", f)
    assert not eval(m, "w", f, clause="b")


def test_countermodel_search_examples():
    j1 = countermodel_search(parse("[](p -> q) -> p |> q"), 3)
    assert j1 is not None and len(j1[0].worlds) == 2
    j5 = countermodel_search(parse("<>p |> p"), 3)
    model, world = j5
    assert len(model.worlds) == 3 and not model.S
    assert not eval(model, world, parse("<>p |> p"))
    assert countermodel_search(parse("p |> q -> [](p |> q)"), 2) is None


def test_frame_counts():
    # isomorphism classes of small frames
    assert [sum(1 for _ in simplified_frames(n)) for n in (1, 2)] == [2, 26]
    assert [sum(1 for _ in veltman_frames(n)) for n in (1, 2)] == [1, 5]


def test_frame_correspondence_up_to_three_worlds():
    family = list(instances("P", 3, ("p", "q")))
    violating = 0
    for n in (1, 2, 3):
        for fr in veltman_frames(n):
            cond, valid = frame_correspondence_P(fr, family)
            assert cond == valid
            violating += not cond
    assert violating > 0


@settings(max_examples=40)
@given(st.integers(min_value=0, max_value=10**6))
def test_persistence_valid_on_simplified_frames(seed):
    fr = random_simplified_frame(random.Random(seed), 4)
    for f in instances("P", 2, ("p", "q")):
        assert frame_validates(fr, f)


@settings(max_examples=30)
@given(formulas(("p",), max_leaves=5))
def test_theorems_valid_on_small_simplified_frames(f):
    if decide(f):
        for n in (1, 2):
            for fr in simplified_frames(n):
                assert frame_validates(fr, f)


def test_refuting_valuation_is_genuine():
    res = refuting_valuation(J1_MODEL, parse("[](p -> q) -> p |> q"))
    val, world = res
    assert not eval(J1_MODEL.with_valuation(val), world, parse("[](p -> q) -> p |> q"))


@pytest.mark.parametrize("model", [
    J1_MODEL,
    VeltmanModel(["w", "x"], [("w", "x")], {"w": [("x", "x")]}, {"p": ["x"]}),
    BimodalModel(["x", "y"], [("x", "y")], [("y", "x")], {"p": ["x"]}),
])
def test_model_json_round_trip(model):
    text = dumps_model(model)
    back = model_from_json(json.loads(text))
    assert back == model
    assert dumps_model(back) == text
    assert model_to_json(back)["kind"] in ("simplified", "veltman", "bimodal")


def test_dot_and_graph_export():
    dot = to_dot(J1_MODEL, "w")
    assert "digraph" in dot and "->" in dot
    g = to_networkx(J1_MODEL)
    assert set(g.edges) == {("w", "x")}
