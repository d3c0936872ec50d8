"""Fixed points of left-modalized formulas, always verified by proof search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ilp.corpus import variable_free
from ilp.search import DEFAULT_BUDGET, NotProvable, Verdict, decide
from ilp.syntax import (
    BOT, TOP, And, Formula, Imp, Or, Neg, Rhd, Var, _map_children, children, _walk, expand_box, fresh_var, iff,
    is_left_modalized, replace, show, substitute, vars_of,
)


class FixpointError(ValueError):
    """Precondition violation: the variable is not left-modalized."""


class VerificationError(RuntimeError):
    """The computed formula failed its equivalence check."""

    def __init__(self, result: "FixpointResult"):
        super().__init__(f"fixed point {show(result.fixpoint)} not verified")
        self.result = result


@dataclass(frozen=True)
class FixpointResult:
    fixpoint: Formula
    equivalence_verdict: Optional[Verdict]
    variable_condition: bool

    @property
    def ok(self) -> bool:
        return self.variable_condition and bool(self.equivalence_verdict)


def fixpoint_rhd(a_of_p: Formula, b: Formula, p: str = "p") -> Formula:
    """Fixed point of ``A(p) |> B``: the formula ``A(T) |> B``."""
    if not is_left_modalized(Rhd(a_of_p, b), p):
        raise FixpointError(f"{p} is not left-modalized in {show(Rhd(a_of_p, b))}")
    return Rhd(substitute(a_of_p, p, TOP), b)


def _direct(f: Formula, p: str) -> bool:
    """``p`` occurs in ``f`` outside every modal operator."""
    if isinstance(f, Var):
        return f.name == p
    if isinstance(f, Rhd):
        return False
    return any(_direct(g, p) for g in children(f))


def _classes(f: Formula, p: str) -> list[Formula]:
    """Distinct ``C |> D`` subformulas with ``p`` directly inside ``C``, in walk order."""
    out: list[Formula] = []
    for g in _walk(f):
        if isinstance(g, Rhd) and _direct(g.left, p) and g not in out:
            out.append(g)
    return out


def _rename_direct(f: Formula, p: str, r: str) -> Formula:
    if isinstance(f, Var):
        return Var(r) if f.name == p else f
    if isinstance(f, Rhd):
        return f
    return _map_children(f, lambda g: _rename_direct(g, p, r))


def _solve(a: Formula, p: str, used: set) -> Formula:
    classes = _classes(a, p)
    if not classes:
        return a
    first, rest = classes[0], classes[1:]
    if rest:
        r = fresh_var(used)
        used.add(r)
        renamed = a
        for c in rest:
            c2 = Rhd(_rename_direct(c.left, p, r), c.right)
            renamed = replace(renamed, c, c2)
        f1 = _solve(renamed, p, used)
        return _solve(f1, r, used)
    # every occurrence of p sits directly inside ``first``
    def k(t: Formula) -> Formula:
        return replace(a, first, t)
    e = Rhd(substitute(first.left, p, k(TOP)), first.right)
    return k(e)


def fold_constants(f: Formula) -> Formula:
    """Propositional constant folding (``T & x`` to ``x`` and so on), bottom-up."""
    memo: dict = {}

    def go(g: Formula) -> Formula:
        if g in memo:
            return memo[g]
        h = _map_children(g, go)
        if isinstance(h, Neg) and h.sub == TOP:
            h = BOT
        elif isinstance(h, And):
            if TOP in (h.left, h.right):
                h = h.right if h.left == TOP else h.left
            elif BOT in (h.left, h.right):
                h = BOT
        elif isinstance(h, Or):
            if BOT in (h.left, h.right):
                h = h.right if h.left == BOT else h.left
            elif TOP in (h.left, h.right):
                h = TOP
        elif isinstance(h, Imp):
            if h.left == TOP:
                h = h.right
            elif h.left == BOT or h.right == TOP:
                h = TOP
            elif h.right == BOT:
                h = Neg(h.left)
        memo[g] = h
        return h

    return go(f)


def construct(a_of_p: Formula, p: str = "p", fold: bool = False) -> Formula:
    """The fixed point candidate, without verification."""
    if not is_left_modalized(a_of_p, p):
        raise FixpointError(f"{p} is not left-modalized in {show(a_of_p)}")
    if p not in vars_of(a_of_p):
        return a_of_p
    used = set(vars_of(a_of_p)) | {p}
    f = _solve(expand_box(a_of_p), p, used)
    return fold_constants(f) if fold else f


def fixpoint(a_of_p: Formula, p: str = "p", verify: bool = True,
             budget: int = DEFAULT_BUDGET, fold: bool = False) -> FixpointResult:
    """Fixed point ``F`` of ``A(p)`` with ``|- F <-> A(F)`` checked by search.

    Raises VerificationError when the check does not come back Provable.
    """
    f = construct(a_of_p, p, fold)
    cond = vars_of(f) <= vars_of(a_of_p) - {p}
    if not verify:
        return FixpointResult(f, None, cond)
    verdict = decide(iff(f, substitute(a_of_p, p, f)), budget)
    res = FixpointResult(f, verdict, cond)
    if not res.ok:
        raise VerificationError(res)
    return res


@dataclass(frozen=True)
class FppReport:
    checked: int
    failures: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


def fpp_witness(f: Formula) -> Formula:
    """``F <-> (T |> ~F)``, never a theorem for variable-free ``F``."""
    return iff(f, Rhd(TOP, Neg(f)))


def refute_fpp_witness(max_size: int = 6, budget: int = DEFAULT_BUDGET) -> FppReport:
    """Check that no variable-free formula up to ``max_size`` is a fixed point of ``T |> ~p``."""
    failures = []
    n = 0
    for f in variable_free(max_size):
        n += 1
        if not isinstance(decide(fpp_witness(f), budget), NotProvable):
            failures.append(f)
    return FppReport(n, tuple(failures))
