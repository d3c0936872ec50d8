"""Command-line front end: ``ilp <command> ...``.

Exit codes: 0 theorem or success, 1 non-theorem or failed check,
2 budget exceeded, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

from ilp.calculus import (
    ILMPS, ILMS, Derivation, check, derivation_from_json, derivation_to_json, dumps,
    is_cut_free, parse_sequent,
)
from ilp.syntax import ParseError, expand_box, parse, show

EXIT_OK = 0
EXIT_NO = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default, which means "budget" here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class Config:
    budget: int
    max_worlds: int
    seed: int
    json: bool

    def __post_init__(self):
        if self.budget <= 0 or self.max_worlds <= 0:
            raise UsageError("budgets must be positive")


def _formula(text: str):
    try:
        return parse(text)
    except ParseError as e:
        raise UsageError(str(e)) from e


def _emit(cfg: Config, payload: dict, text: str) -> None:
    if cfg.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write(path: str, text: str) -> None:
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _save_model(path: str, model, highlight: Optional[str] = None) -> None:
    from ilp.semantics import dumps_model, to_dot
    _write(path, to_dot(model, highlight) if path.endswith(".dot") else dumps_model(model))


def _load_model(path: str):
    from ilp.semantics import model_from_json
    try:
        with open(path, encoding="utf-8") as fh:
            return model_from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot load model {path}: {e}") from e


def _load_proof(path: str) -> Derivation:
    try:
        with open(path, encoding="utf-8") as fh:
            return derivation_from_json(json.load(fh))
    except (OSError, ValueError, KeyError) as e:
        raise UsageError(f"cannot load proof {path}: {e}") from e


# ------------------------------------------------------------------ commands

def cmd_decide(args, cfg: Config) -> int:
    from ilp.search import decide
    f = _formula(args.formula)
    system = ILMS if args.system == "ilms" else ILMPS
    v = decide(f, cfg.budget, system)
    payload = {"formula": show(f), "system": system, "verdict": "theorem" if v else "non-theorem"}
    lines = [payload["verdict"]]
    if v:
        if args.emit_proof and v.derivation is not None:
            _write(args.emit_proof, dumps(derivation_to_json(v.derivation)))
            payload["proof"] = args.emit_proof
            lines.append(f"proof: {args.emit_proof}")
        _emit(cfg, payload, "\n".join(lines))
        return EXIT_OK
    if system == ILMPS:
        from ilp.canonical import countermodel
        cm = countermodel(f, "simplified", max_worlds=cfg.max_worlds)
        path = args.countermodel or "countermodel.json"
        _save_model(path, cm.model, cm.world)
        payload.update(countermodel=path, world=cm.world)
        lines.append(f"countermodel: {path} (falsified at {cm.world})")
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_NO


def cmd_prove(args, cfg: Config) -> int:
    from ilp.search import prove
    try:
        seq = parse_sequent(args.sequent)
    except ValueError as e:
        raise UsageError(str(e)) from e
    seq = type(seq)(frozenset(map(expand_box, seq.ant)), frozenset(map(expand_box, seq.suc)))
    system = ILMS if args.system == "ilms" else ILMPS
    v = prove(system, seq, cfg.budget)
    payload = {"sequent": str(seq), "system": system, "verdict": "provable" if v else "not provable"}
    if v and args.output:
        _write(args.output, dumps(derivation_to_json(v.derivation)))
        payload["proof"] = args.output
    text = payload["verdict"] + (f"\nproof: {args.output}" if v and args.output else "")
    _emit(cfg, payload, text)
    return EXIT_OK if v else EXIT_NO


def cmd_interpolate(args, cfg: Config) -> int:
    from ilp.interpolation import interpolate
    a, b = _formula(args.a), _formula(args.b)
    res = interpolate(a, b, cfg.budget)
    if not hasattr(res, "formula"):
        _emit(cfg, {"verdict": "non-theorem"}, "not an implication theorem")
        return EXIT_NO
    payload = {"interpolant": show(res.formula), "variable_condition": res.variable_condition()}
    if args.emit_proofs:
        for name, d in (("left", res.proof_left), ("right", res.proof_right)):
            _write(os.path.join(args.emit_proofs, f"{name}.json"), dumps(derivation_to_json(d)))
        payload["proofs"] = args.emit_proofs
    _emit(cfg, payload, show(res.formula))
    return EXIT_OK


def cmd_fixpoint(args, cfg: Config) -> int:
    from ilp.fixedpoint import FixpointError, VerificationError, fixpoint
    f = _formula(args.formula)
    try:
        res = fixpoint(f, args.var, verify=args.verify, budget=cfg.budget, fold=args.fold)
    except FixpointError as e:
        raise UsageError(str(e)) from e
    except VerificationError as e:
        _emit(cfg, {"fixpoint": show(e.result.fixpoint), "verified": False},
              f"{show(e.result.fixpoint)}\nverification: failed")
        return EXIT_NO
    verdict = None if res.equivalence_verdict is None else bool(res.equivalence_verdict)
    payload = {"fixpoint": show(res.fixpoint), "verified": verdict,
               "variable_condition": res.variable_condition}
    text = show(res.fixpoint)
    if verdict is not None:
        text += "\nverification: " + ("provable" if verdict else "failed")
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_countermodel(args, cfg: Config) -> int:
    from ilp.canonical import CanonicalError, countermodel
    f = _formula(args.formula)
    try:
        cm = countermodel(f, args.stage, max_worlds=cfg.max_worlds)
    except CanonicalError as e:
        _emit(cfg, {"verdict": "theorem", "error": str(e)}, str(e))
        return EXIT_NO
    if args.output:
        _save_model(args.output, cm.model, cm.world)
    payload = {"stage": args.stage, "world": cm.world, "stats": cm.stats,
               "worlds": len(cm.model.worlds), "output": args.output}
    text = (f"{args.stage} countermodel with {len(cm.model.worlds)} worlds, "
            f"falsified at {cm.world}")
    text += "".join(f"\n{k}: {v}" for k, v in sorted(cm.stats.items()))
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_translate(args, cfg: Config) -> int:
    from ilp.embedding import chi, transfer
    from ilp.semantics import ModelError, extension
    f = _formula(args.formula)
    t = chi(f)
    payload = {"translation": show(t)}
    text = show(t)
    if args.transfer:
        model = _load_model(args.transfer)
        world = args.world
        if world is None:
            ext = extension(model, f)
            misses = [w for i, w in enumerate(model.worlds) if not ext >> i & 1]
            if not misses:
                raise UsageError("the formula holds everywhere in the model")
            world = misses[0]
        try:
            tr = transfer(model, world, f)
        except ModelError as e:
            raise UsageError(str(e)) from e
        if args.output:
            _save_model(args.output, tr.model, world)
        payload.update(world=world, output=args.output)
        text += f"\nfalsified at {world} in the transferred model"
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_check_model(args, cfg: Config) -> int:
    from ilp.semantics import (
        SimplifiedModel, VeltmanModel, check_dagger, check_P_condition, extension,
    )
    model = _load_model(args.model)
    payload: dict = {"kind": type(model).__name__, "worlds": len(model.worlds)}
    if isinstance(model, VeltmanModel):
        payload["P_condition"] = check_P_condition(model)
    if isinstance(model, SimplifiedModel):
        payload["dagger"] = check_dagger(model)
    ok = True
    if args.formula:
        f = _formula(args.formula)
        ext = extension(model, f)
        truth = [w for i, w in enumerate(model.worlds) if ext >> i & 1]
        payload["true_at"] = truth
        if args.world:
            if args.world not in model.index:
                raise UsageError(f"unknown world {args.world}")
            ok = args.world in truth
            payload["holds"] = ok
    text = "\n".join(f"{k}: {v}" for k, v in sorted(payload.items()))
    _emit(cfg, payload, text)
    return EXIT_OK if ok else EXIT_NO


def cmd_cutelim(args, cfg: Config) -> int:
    from ilp.cutelim import Trace, eliminate
    d = _load_proof(args.proof)
    res = check(d)
    if not res:
        raise UsageError(f"malformed proof: {res}")
    tr = Trace()
    try:
        e = eliminate(d, tr)
    except ValueError as err:
        raise UsageError(str(err)) from err
    if args.output:
        _write(args.output, dumps(derivation_to_json(e)))
    payload = {"cut_free": is_cut_free(e), "checked": bool(check(e)),
               "reductions": tr.reductions(), "output": args.output}
    text = f"cut-free derivation of {e.conclusion}" + (f"\nwritten to {args.output}" if args.output else "")
    _emit(cfg, payload, text)
    return EXIT_OK


def cmd_selftest(args, cfg: Config) -> int:
    from ilp.acceptance import run_all, SelftestConfig
    variables = tuple(v for v in args.vars.split(",") if v) if args.vars is not None else ("p", "q")
    st = SelftestConfig(max_size=args.max_size, variables=variables, budget=cfg.budget,
                        seed=cfg.seed, quick=not args.full)
    results = run_all(st, only=args.only)
    payload = {"seed": cfg.seed, "results": [r.as_dict() for r in results],
               "passed": all(r.passed for r in results)}
    text = "\n".join(r.line() for r in results) + f"\nseed: {cfg.seed}"
    _emit(cfg, payload, text)
    if any(r.budget_exceeded and r.passed is None for r in results):
        return EXIT_BUDGET
    return EXIT_OK if payload["passed"] else EXIT_NO


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--budget", type=int, default=None, help="search node budget")
    common.add_argument("--max-worlds", type=int, default=2000)
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="ilp", description="Prover, interpolator and model builder for IL-(P).")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("decide", parents=[common], help="decide theoremhood")
    s.add_argument("formula")
    s.add_argument("--system", choices=("ilms", "ilmps"), default="ilmps")
    s.add_argument("--emit-proof", metavar="PATH")
    s.add_argument("--countermodel", metavar="PATH", help="where to write a countermodel")
    s.set_defaults(func=cmd_decide)

    s = sub.add_parser("prove", parents=[common], help="prove a sequent 'A, B => C'")
    s.add_argument("sequent")
    s.add_argument("--system", choices=("ilms", "ilmps"), default="ilmps")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("interpolate", parents=[common], help="interpolant of A -> B")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--emit-proofs", metavar="DIR")
    s.set_defaults(func=cmd_interpolate)

    s = sub.add_parser("fixpoint", parents=[common], help="fixed point of a left-modalized variable")
    s.add_argument("formula")
    s.add_argument("--var", default="p")
    s.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--fold", action="store_true", help="fold propositional constants")
    s.set_defaults(func=cmd_fixpoint)

    s = sub.add_parser("countermodel", parents=[common], help="certified countermodel")
    s.add_argument("formula")
    s.add_argument("--stage", choices=("canonical", "simplified", "level"), default="simplified")
    s.add_argument("-o", "--output", help="model.json or model.dot")
    s.set_defaults(func=cmd_countermodel)

    s = sub.add_parser("translate", parents=[common], help="bimodal translation")
    s.add_argument("formula")
    s.add_argument("--transfer", metavar="MODEL", help="simplified countermodel to transfer")
    s.add_argument("--world")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_translate)

    s = sub.add_parser("check-model", parents=[common], help="load a model and evaluate")
    s.add_argument("model")
    s.add_argument("formula", nargs="?")
    s.add_argument("--world")
    s.set_defaults(func=cmd_check_model)

    s = sub.add_parser("cutelim", parents=[common], help="eliminate cuts from an ILmPs proof")
    s.add_argument("proof")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_cutelim)

    s = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    s.add_argument("--max-size", type=int, default=4)
    s.add_argument("--vars", default=None, help="comma-separated variables (empty for none)")
    s.add_argument("--only", type=int, action="append", help="criterion number (repeatable)")
    s.add_argument("--full", action="store_true", help="full scale instead of the quick scale")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    from ilp.search import DEFAULT_BUDGET, BudgetExceeded
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(args.budget if args.budget is not None else DEFAULT_BUDGET,
                     args.max_worlds, args.seed, args.json)
        return args.func(args, cfg)
    except UsageError as e:
        sys.stderr.write(f"ilp: {e}\n")
        return EXIT_USAGE
    except BudgetExceeded as e:
        sys.stderr.write(f"ilp: budget exceeded: {e}\n")
        if getattr(args, "json", False):
            sys.stdout.write(json.dumps({"verdict": "budget"}) + "\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
