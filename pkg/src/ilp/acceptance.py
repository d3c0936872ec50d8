"""The acceptance checks, shared by ``ilp selftest`` and the test suite.

Each check returns a ``CriterionResult``.  ``passed`` is None when some
items ran out of budget and nothing failed outright.
"""

from __future__ import annotations

import contextlib
import io
import json
import os
import random
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import networkx as nx

from ilp.calculus import (
    ILMPS, Sequent, check, compose_cut, derivation_from_json, derivation_to_json, dumps,
    is_cut_free,
)
from ilp.canonical import Countermodel, countermodel, level_agrees, unfolding_agrees
from ilp.corpus import (
    DERIVABLE, NOT_DERIVABLE, formulas_up_to, instances, random_formula, random_left_modalized,
    substitution_instances, tautologies,
)
from ilp.cutelim import Trace, eliminate
from ilp.embedding import correspondence_failures, double_one_valid, fpp_failure_sample, transfer
from ilp.fixedpoint import VerificationError, fixpoint, refute_fpp_witness
from ilp.interpolation import interpolate
from ilp.search import BudgetExceeded, NotProvable, decide, oracle_decide, prove
from ilp.semantics import (
    SimplifiedModel, _names, check_dagger, extension, frame_correspondence_P, frame_validates,
    model_from_json, dumps_model, veltman_frames,
)
from ilp.syntax import Imp, Rhd, expand_box, show, subformulas, vars_of


@dataclass
class SelftestConfig:
    max_size: int = 4
    variables: tuple = ("p", "q")
    budget: int = 200_000
    seed: int = 0
    quick: bool = True


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: Optional[bool]
    detail: str
    budget_exceeded: int = 0
    failures: list = field(default_factory=list)

    def line(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "BUDGET"}[self.passed]
        return f"criterion {self.number} [{self.name}]: {status} - {self.detail}"

    def as_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail, "budget_exceeded": self.budget_exceeded,
                "failures": [str(f) for f in self.failures[:10]]}


def _result(number: int, name: str, failures: list, budget: int, detail: str) -> CriterionResult:
    passed: Optional[bool] = not failures
    if passed and budget:
        passed = None
    return CriterionResult(number, name, passed, detail, budget, failures)


def certify(a, stage: str = "level") -> Countermodel:
    """Pipeline countermodel, re-checked by evaluation at the designated world."""
    cm = countermodel(a, stage)
    if extension(cm.model, a) >> cm.model.index[cm.world] & 1:
        raise AssertionError(f"countermodel does not falsify {show(a)}")
    return cm


# ------------------------------------------------------------- 1: axioms

def derivable_corpus(cfg: SelftestConfig) -> dict:
    rng = random.Random(cfg.seed)
    out = {}
    taut = list(tautologies(min(cfg.max_size + 2, 6), cfg.variables))
    out["G1"] = rng.sample(taut, min(40, len(taut)))
    out["G2"] = list(instances("K", cfg.max_size, cfg.variables))
    out["G3"] = list(instances("Lob", cfg.max_size, cfg.variables))
    for s in ("J3", "J6", "J6l", "J6r", "P", "E2", "E2imp"):
        out[s] = list(instances(s, cfg.max_size, cfg.variables))
    out["substitution"] = list(substitution_instances(cfg.max_size + 2, cfg.variables))
    return out


def criterion_1(cfg: SelftestConfig) -> CriterionResult:
    failures, budget, n = [], 0, 0
    for name, fs in derivable_corpus(cfg).items():
        for f in fs:
            n += 1
            try:
                if not decide(f, cfg.budget):
                    failures.append((name, show(f)))
            except BudgetExceeded:
                budget += 1
    refuted, missing = {}, []
    for s in NOT_DERIVABLE:
        cut_short = False
        for f in instances(s, cfg.max_size, cfg.variables):
            try:
                if isinstance(decide(f, cfg.budget), NotProvable):
                    certify(f, "simplified")
                    refuted[s] = show(f)
                    break
            except BudgetExceeded:
                budget += 1
                cut_short = True
        else:
            missing.append(s)
            # constant-only corpora need not contain a counterinstance
            if not cut_short and cfg.variables:
                failures.append((s, "no refuted instance"))
    detail = f"{n} derivable instances, refuted {sorted(refuted)}"
    if missing:
        detail += f", no counterinstance found for {missing}"
    return _result(1, "axiom corpus", failures, budget, detail)


# --------------------------------------------------------- 2: cut elimination

def cut_corpus(n: int, seed: int, principal_min: int = 5, max_tries: int = 20000):
    """Derivations ending in a cut on ``A |> B`` between two search-found proofs.

    Half the attempts ask for a left proof ending in the modal rule, so that
    the principal modal case occurs.
    """
    rng = random.Random(seed)
    vs = ["p", "q"]

    def rf(d):
        return expand_box(random_formula(rng, d, vs))

    def rr(d):
        return Rhd(rf(d), rf(d))

    out = []
    tries = 0
    while len(out) < n and tries < max_tries:
        tries += 1
        ab = rr(2)
        om1 = [rr(2) for _ in range(rng.randint(0, 2))]
        om2 = [rr(2) for _ in range(rng.randint(0, 2))]
        g1 = [rf(2) for _ in range(rng.randint(0, 1))] if tries % 2 else []
        cd = rr(2)
        left = prove(ILMPS, Sequent.of(om1 + g1, [ab]))
        if not left:
            continue
        right = prove(ILMPS, Sequent.of(om2 + [ab], [cd]))
        if not right:
            continue
        out.append(compose_cut(left.derivation, right.derivation, ab))
    return out


def criterion_2(cfg: SelftestConfig) -> CriterionResult:
    failures = []
    principal = 0
    ds = cut_corpus(50, cfg.seed)
    for d in ds:
        tr = Trace()
        try:
            e = eliminate(d, tr)
        except AssertionError as err:
            failures.append(str(err))
            continue
        if not (check(e) and is_cut_free(e) and e.conclusion == d.conclusion):
            failures.append(str(d.conclusion))
        if tr.reductions().get("principal:RhdP/RhdP"):
            principal += 1
    if len(ds) < 50:
        failures.append(f"only {len(ds)} derivations built")
    if principal < 5:
        failures.append(f"only {principal} principal modal cuts")
    return _result(2, "cut elimination", failures, 0,
                   f"{len(ds)} derivations, {principal} with principal modal cuts")


# ----------------------------------------------------------- 3: interpolation

def implication_corpus(cfg: SelftestConfig) -> list:
    out = []
    for s in DERIVABLE:
        out.extend(f for f in instances(s, cfg.max_size, cfg.variables) if isinstance(f, Imp))
    out.extend(f for f in substitution_instances(cfg.max_size + 2, cfg.variables)
               if isinstance(f, Imp))
    return out


def criterion_3(cfg: SelftestConfig) -> CriterionResult:
    failures, budget, n = [], 0, 0
    for f in implication_corpus(cfg):
        try:
            res = interpolate(f.left, f.right, cfg.budget)
            if isinstance(res, NotProvable):
                continue
            n += 1
            c = res.formula
            ok = (res.variable_condition()
                  and vars_of(c) <= vars_of(f.left) & vars_of(f.right)
                  and check(res.proof_left) and check(res.proof_right)
                  and decide(Imp(f.left, c), cfg.budget) and decide(Imp(c, f.right), cfg.budget))
            if not ok:
                failures.append(show(f))
        except BudgetExceeded:
            budget += 1
    if n < 100 and not budget and cfg.variables and cfg.max_size >= 4:
        failures.append(f"only {n} implications")
    return _result(3, "interpolation", failures, budget, f"{n} provable implications")


# -------------------------------------------------------------- 4: fixpoints

def criterion_4(cfg: SelftestConfig) -> CriterionResult:
    rng = random.Random(cfg.seed)
    failures, budget = [], 0
    n = 100
    for _ in range(n):
        a = random_left_modalized(rng, 3)
        try:
            res = fixpoint(a, "p", budget=cfg.budget)
            if not res.ok:
                failures.append(show(a))
        except VerificationError:
            failures.append(show(a))
        except BudgetExceeded:
            budget += 1
    try:
        rep = refute_fpp_witness(6, cfg.budget)
    except BudgetExceeded:
        return _result(4, "fixed points", failures, budget + 1,
                       f"{n} fixed points tried, constant formulas out of budget")
    failures.extend(show(f) for f in rep.failures)
    return _result(4, "fixed points", failures, budget,
                   f"{n - budget} fixed points verified, {rep.checked} constant formulas refuted")


# ----------------------------------------------------- 5: oracle equivalence

_PIPELINE: dict = {}


def pipeline_models(cfg: SelftestConfig) -> list:
    """Countermodels certified by criterion 5 (computed on demand)."""
    key = (cfg.quick, cfg.variables[:1], cfg.budget)
    if key not in _PIPELINE:
        criterion_5(cfg)
    return _PIPELINE[key]


def criterion_5(cfg: SelftestConfig) -> CriterionResult:
    size = 5 if cfg.quick else 6
    vs = tuple(cfg.variables[:1])
    failures, budget, models = [], 0, []
    n = 0
    for f in formulas_up_to(size, vs):
        n += 1
        try:
            v = decide(f, cfg.budget)
            if bool(v) != oracle_decide(f):
                failures.append(("disagree", show(f)))
                continue
            if not v:
                models.append(certify(f))
        except BudgetExceeded:
            budget += 1
        except AssertionError as e:
            failures.append(("certificate", show(f), str(e)))
    _PIPELINE[(cfg.quick, cfg.variables[:1], cfg.budget)] = models
    return _result(5, "oracle equivalence", failures, budget,
                   f"{n} formulas up to size {size}, {len(models)} countermodels certified")


# -------------------------------------------------------------- 6: semantics

def random_simplified_frame(rng: random.Random, max_worlds: int = 5) -> SimplifiedModel:
    n = rng.randint(1, max_worlds)
    names = _names(n)
    order = list(range(n))
    rng.shuffle(order)
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                g.add_edge(order[i], order[j])
    tc = nx.transitive_closure_dag(g)
    R = [(names[a], names[b]) for a, b in tc.edges]
    S = [(names[a], names[b]) for a in range(n) for b in range(n) if rng.random() < 0.3]
    return SimplifiedModel(names, R, S)


def level_graph_ok(lp_model: SimplifiedModel) -> bool:
    s = nx.DiGraph(list(lp_model.S))
    closure = nx.transitive_closure(s, reflexive=False)
    rs = nx.DiGraph(list(lp_model.R) + list(lp_model.S))
    rs.add_nodes_from(lp_model.worlds)
    return set(closure.edges) == set(s.edges) and nx.is_directed_acyclic_graph(rs)


def criterion_6(cfg: SelftestConfig) -> CriterionResult:
    rng = random.Random(cfg.seed)
    failures = []
    p_small = list(instances("P", 2, ("p", "q")))
    frames = 50 if cfg.quick else 200
    for _ in range(frames):
        fr = random_simplified_frame(rng)
        for f in p_small:
            if not frame_validates(fr, f):
                failures.append(("Psou", show(f)))
    p_family = list(instances("P", 3, ("p", "q")))
    vf = 0
    for n in (1, 2, 3):
        for fr in veltman_frames(n):
            vf += 1
            cond, valid = frame_correspondence_P(fr, p_family)
            if cond != valid:
                failures.append(("FCP", fr.R, dict(fr.S)))
    models = pipeline_models(cfg)
    for cm in models:
        subs = subformulas(cm.formula)
        if not check_dagger(cm.unfolding.model):
            failures.append(("dagger", show(cm.formula)))
        if not unfolding_agrees(cm.canonical.model, cm.unfolding, subs):
            failures.append(("unfolding", show(cm.formula)))
        if not level_agrees(cm.unfolding.model, cm.levels, subs):
            failures.append(("levels", show(cm.formula)))
        if not level_graph_ok(cm.levels.model):
            failures.append(("level graph", show(cm.formula)))
    return _result(6, "semantics", failures, 0,
                   f"{frames} simplified frames, {vf} Veltman frames, {len(models)} pipeline models")


# -------------------------------------------------------------- 7: embedding

def criterion_7(cfg: SelftestConfig) -> CriterionResult:
    failures = []
    models = pipeline_models(cfg)
    for cm in models:
        unf = cm.unfolding
        if correspondence_failures(unf.model, [cm.formula]):
            failures.append(("correspondence", show(cm.formula)))
        try:
            transfer(unf.model, unf.root, cm.formula)
        except Exception as e:  # noqa: BLE001 - any failure is a finding
            failures.append(("transfer", show(cm.formula), str(e)))
        if not double_one_valid(unf.model):
            failures.append(("[1][1]false", show(cm.formula)))
    fs, bad = fpp_failure_sample(50, cfg.seed)
    failures.extend(("two-world", show(f)) for f in bad)
    return _result(7, "embedding", failures, 0,
                   f"{len(models)} transferred models, {len(fs)} sampled equations refuted")


# ------------------------------------------------------------ 8: determinism

def _run_cli(argv: Sequence[str]) -> tuple[int, str]:
    from ilp.cli import main
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
        code = main(list(argv))
    return code, buf.getvalue()


def _cli_round(tmp: str, seed: int) -> dict:
    j = lambda name: os.path.join(tmp, name)
    out = {}
    runs = [
        ["decide", "p |> q -> [](p |> q)", "--emit-proof", j("proof.json")],
        ["decide", "[](p -> q) -> p |> q", "--countermodel", j("cm.json")],
        ["countermodel", "(p |> q) -> (<>p -> <>q)", "--stage", "level", "-o", j("level.json")],
        ["countermodel", "(p |> q) -> (<>p -> <>q)", "--stage", "canonical", "-o", j("canon.json")],
        ["interpolate", "[]p & q", "<>q | []p", "--emit-proofs", j("ip")],
        ["fixpoint", "~(p |> q)", "--var", "p"],
        ["translate", "[](p -> q) -> p |> q", "--transfer", j("cm.json"), "-o", j("bi.json")],
        ["cutelim", j("proof.json"), "-o", j("cf.json")],
    ]
    for argv in runs:
        code, text = _run_cli(list(argv) + ["--json", "--seed", str(seed)])
        out["$ " + " ".join(argv).replace(tmp, "")] = (code, text.replace(tmp, ""))
    for name in sorted(os.listdir(tmp)) + ["ip/left.json", "ip/right.json"]:
        path = j(name)
        if os.path.isfile(path):
            with open(path, encoding="utf-8") as fh:
                out[name] = fh.read()
    return out


def criterion_8(cfg: SelftestConfig) -> CriterionResult:
    failures = []
    with tempfile.TemporaryDirectory() as t1, tempfile.TemporaryDirectory() as t2:
        r1 = _cli_round(t1, cfg.seed)
        r2 = _cli_round(t2, cfg.seed)
        if r1 != r2:
            failures.extend(k for k in r1 if r1.get(k) != r2.get(k))
        for name, text in r1.items():
            if name.startswith("$ ") or not name.endswith(".json"):
                continue
            data = json.loads(text)
            if "proof" in data:
                again = dumps(derivation_to_json(derivation_from_json(data)))
            else:
                again = dumps_model(model_from_json(data))
            if again != text:
                failures.append(("round trip", name))
    g1 = [show(random_left_modalized(random.Random(cfg.seed), 3)) for _ in range(5)]
    g2 = [show(random_left_modalized(random.Random(cfg.seed), 3)) for _ in range(5)]
    if g1 != g2:
        failures.append("generator")
    return _result(8, "determinism", failures, 0, f"{len(r1)} command outputs and artifacts compared")


CRITERIA: dict[int, Callable[[SelftestConfig], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def run_all(cfg: SelftestConfig, only: Optional[Sequence[int]] = None) -> list[CriterionResult]:
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        try:
            out.append(fn(cfg))
        except BudgetExceeded as e:
            out.append(CriterionResult(k, fn.__name__, None, f"budget exceeded: {e}", 1))
    return out
