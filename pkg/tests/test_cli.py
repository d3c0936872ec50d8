import json

import pytest

from ilp.acceptance import cut_corpus
from ilp.calculus import check, derivation_from_json, derivation_to_json, dumps, is_cut_free
from ilp.cli import EXIT_BUDGET, EXIT_NO, EXIT_OK, EXIT_USAGE, main
from ilp.semantics import (
    BimodalModel, SimplifiedModel, dumps_model, eval as holds, model_from_json,
)
from ilp.search import reset_memo
from ilp.syntax import parse, parse_bimodal, vars_of

J1 = "[](p -> q) -> p |> q"
P_AXIOM = "p |> q -> [](p |> q)"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def load(path):
    with open(path) as fh:
        return json.load(fh)


def test_decide_theorem(capsys, tmp_path):
    code, out, _ = run(capsys, "decide", P_AXIOM)
    assert code == EXIT_OK
    assert out.strip() == "theorem"


def test_decide_non_theorem_writes_countermodel(capsys, tmp_path):
    path = tmp_path / "cm.json"
    code, payload = run_json(capsys, "decide", J1, "--countermodel", str(path))
    assert code == EXIT_NO
    assert payload["verdict"] == "non-theorem"
    assert payload["countermodel"] == str(path)
    model = model_from_json(load(path))
    assert isinstance(model, SimplifiedModel)
    assert not holds(model, payload["world"], parse(J1))


def test_decide_ilms_has_no_countermodel(capsys):
    code, payload = run_json(capsys, "decide", P_AXIOM, "--system", "ilms")
    assert code == EXIT_NO
    assert "countermodel" not in payload


def test_decide_emit_proof_round_trip(capsys, tmp_path):
    path = tmp_path / "proof.json"
    code, _, _ = run(capsys, "decide", P_AXIOM, "--emit-proof", str(path))
    assert code == EXIT_OK
    text = path.read_text()
    d = derivation_from_json(json.loads(text))
    assert check(d) and is_cut_free(d)
    assert dumps(derivation_to_json(d)) == text


def test_parse_error_is_usage(capsys):
    code, _, err = run(capsys, "decide", "p |>")
    assert code == EXIT_USAGE
    assert "ilp:" in err


def test_bad_subcommand_is_usage(capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == EXIT_USAGE


def test_non_positive_budget_is_usage(capsys):
    code, _, _ = run(capsys, "decide", "p", "--budget", "0")
    assert code == EXIT_USAGE


def test_budget_exit(capsys):
    reset_memo()
    code, out, _ = run(capsys, "decide", "(p |> q) & (q |> r) -> p |> r", "--budget", "1", "--json")
    assert code == EXIT_BUDGET
    assert json.loads(out) == {"verdict": "budget"}


def test_prove_sequent(capsys, tmp_path):
    path = tmp_path / "seq.json"
    code, payload = run_json(capsys, "prove", "p |> q => [](p |> q)", "-o", str(path))
    assert code == EXIT_OK
    assert payload["verdict"] == "provable"
    assert check(derivation_from_json(load(path)))


def test_prove_unprovable_and_malformed(capsys):
    assert run(capsys, "prove", "p => q")[0] == EXIT_NO
    assert run(capsys, "prove", "p => => q")[0] == EXIT_USAGE


def test_interpolate(capsys, tmp_path):
    code, payload = run_json(capsys, "interpolate", "p & q", "q | r",
                             "--emit-proofs", str(tmp_path / "proofs"))
    assert code == EXIT_OK
    assert payload["variable_condition"] is True
    c = parse(payload["interpolant"])
    assert vars_of(c) <= {"q"}
    for name in ("left", "right"):
        assert check(derivation_from_json(load(tmp_path / "proofs" / f"{name}.json")))


def test_interpolate_non_theorem(capsys):
    assert run(capsys, "interpolate", "p", "q")[0] == EXIT_NO


def test_fixpoint(capsys):
    code, payload = run_json(capsys, "fixpoint", "[]p")
    assert code == EXIT_OK
    assert payload["verified"] is True
    assert payload["variable_condition"] is True


def test_fixpoint_not_left_modalized_is_usage(capsys):
    assert run(capsys, "fixpoint", "q |> p")[0] == EXIT_USAGE


def test_fixpoint_without_verification(capsys):
    code, payload = run_json(capsys, "fixpoint", "[]p", "--no-verify")
    assert code == EXIT_OK
    assert payload["verified"] is None


@pytest.mark.parametrize("stage", ["canonical", "simplified", "level"])
def test_countermodel_stages(capsys, tmp_path, stage):
    path = tmp_path / f"{stage}.json"
    code, payload = run_json(capsys, "countermodel", J1, "--stage", stage, "-o", str(path))
    assert code == EXIT_OK
    model = model_from_json(load(path))
    assert dumps_model(model) == path.read_text()
    assert not holds(model, payload["world"], parse(J1))
    assert payload["worlds"] == len(model.worlds)


def test_countermodel_dot(capsys, tmp_path):
    path = tmp_path / "cm.dot"
    assert run(capsys, "countermodel", J1, "-o", str(path))[0] == EXIT_OK
    assert path.read_text().startswith("digraph")


def test_countermodel_of_theorem(capsys):
    assert run(capsys, "countermodel", P_AXIOM)[0] == EXIT_NO


def test_translate(capsys):
    code, payload = run_json(capsys, "translate", "p |> q")
    assert code == EXIT_OK
    assert parse_bimodal(payload["translation"]) == parse_bimodal("[0](p -> <1>q)")


def test_translate_transfer(capsys, tmp_path):
    cm = tmp_path / "cm.json"
    out = tmp_path / "bi.json"
    run(capsys, "countermodel", J1, "--stage", "level", "-o", str(cm))
    code, payload = run_json(capsys, "translate", J1, "--transfer", str(cm), "-o", str(out))
    assert code == EXIT_OK
    bm = model_from_json(load(out))
    assert isinstance(bm, BimodalModel)
    assert not holds(bm, payload["world"], parse_bimodal(payload["translation"]))


def test_translate_transfer_rejects_true_formula(capsys, tmp_path):
    cm = tmp_path / "cm.json"
    run(capsys, "countermodel", J1, "-o", str(cm))
    assert run(capsys, "translate", "true", "--transfer", str(cm))[0] == EXIT_USAGE


def test_check_model(capsys, tmp_path):
    cm = tmp_path / "cm.json"
    _, payload = run_json(capsys, "countermodel", J1, "-o", str(cm))
    w = payload["world"]
    code, info = run_json(capsys, "check-model", str(cm), J1, "--world", w)
    assert code == EXIT_NO
    assert info["holds"] is False
    assert info["dagger"] is True
    code, info = run_json(capsys, "check-model", str(cm), "[](p -> q)", "--world", w)
    assert code == EXIT_OK


def test_check_model_bad_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check-model", str(bad))[0] == EXIT_USAGE
    assert run(capsys, "check-model", str(tmp_path / "missing.json"))[0] == EXIT_USAGE


def test_cutelim_round_trip(capsys, tmp_path):
    d = cut_corpus(1, seed=3)[0]
    src = tmp_path / "cut.json"
    src.write_text(dumps(derivation_to_json(d)))
    out = tmp_path / "free.json"
    code, payload = run_json(capsys, "cutelim", str(src), "-o", str(out))
    assert code == EXIT_OK
    assert payload["cut_free"] and payload["checked"]
    e = derivation_from_json(load(out))
    assert is_cut_free(e) and check(e)
    assert e.conclusion == d.conclusion


def test_cutelim_rejects_malformed_proof(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"oops": 1}))
    assert run(capsys, "cutelim", str(bad))[0] == EXIT_USAGE


def test_decide_is_deterministic(capsys, tmp_path):
    a = run(capsys, "decide", J1, "--json", "--countermodel", str(tmp_path / "a.json"))
    b = run(capsys, "decide", J1, "--json", "--countermodel", str(tmp_path / "a.json"))
    assert a == b


def test_selftest_subset(capsys):
    code, payload = run_json(capsys, "selftest", "--vars", "p,q", "--only", "1", "--only", "4")
    assert code == EXIT_OK
    assert payload["passed"] is True
    assert [r["criterion"] for r in payload["results"]] == [1, 4]


def test_selftest_budget_one(capsys):
    reset_memo()
    code, payload = run_json(capsys, "selftest", "--budget", "1", "--only", "1", "--only", "4")
    assert code == EXIT_BUDGET
    for r in payload["results"]:
        assert r["passed"] is None
        assert r["budget_exceeded"] > 0
        assert r["failures"] == []


def test_selftest_constants_only(capsys):
    code, out, _ = run(capsys, "selftest", "--vars", "", "--only", "1", "--only", "7")
    assert code == EXIT_OK
    assert "criterion 1 [axiom corpus]: PASS" in out
