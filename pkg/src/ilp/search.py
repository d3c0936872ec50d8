"""Backward cut-free proof search for ILms and ILmPs, plus an independent
bottom-up oracle for ILmPs.

The backward search decomposes non-modal formulas with invertible,
weakening-absorbed rule forms until only atoms, ``false`` and
``|>``-formulas remain, then tries the modal rules.  For a chosen diagonal
``A |> B`` the largest useful principal set is exactly the set of antecedent
formulas ``X |> Y`` with ``Y => B`` provable: extra principals only enlarge
the succedent of the left premise, so no other subset needs to be tried.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional, Union

from ilp.calculus import (
    ILMPS, ILMS, SYSTEMS, Derivation, Node, Sequent, box, check, init, init_bot,
    is_cut_free, make_box_rule, make_rhd, make_rhdp, rebuild, unbox, weaken_to,
)
from ilp.syntax import (
    BOT, And, Bot, Formula, Imp, Neg, Or, Rhd, Var, expand_box, formula_key,
    sort_formulas, subformulas,
)

DEFAULT_BUDGET = 200_000


class BudgetExceeded(RuntimeError):
    """The node budget ran out before a verdict was reached."""


@dataclass(frozen=True)
class Provable:
    derivation: Optional[Derivation]

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class NotProvable:
    goal: Sequent
    explored: int
    saturated: tuple = ()

    def __bool__(self) -> bool:
        return False


Verdict = Union[Provable, NotProvable]

_INF = float("inf")


def _is_atomic(f: Formula) -> bool:
    return isinstance(f, (Var, Bot, Rhd))


def _axiom(seq: Sequent) -> Optional[Node]:
    if BOT in seq.ant:
        return weaken_to(init_bot(), seq.ant, seq.suc)
    common = seq.ant & seq.suc
    if common:
        f = min(common, key=formula_key)
        return weaken_to(init(f), seq.ant, seq.suc)
    return None


class Prover:
    """Backward search with a per-system memo table.

    Provable results are cached unconditionally.  A failure is cached only
    when it did not depend on a loop-check cutoff against a strict ancestor.
    """

    def __init__(self, system: str = ILMPS):
        if system not in SYSTEMS:
            raise ValueError(f"unknown system {system!r}")
        self.system = system
        self.proved: dict[Sequent, Node] = {}
        self.failed: set[Sequent] = set()
        self.saturated_failures: list[Sequent] = []
        self._steps = 0
        self._budget = DEFAULT_BUDGET

    def clear(self) -> None:
        self.proved.clear()
        self.failed.clear()

    def prove(self, goal: Sequent, budget: int = DEFAULT_BUDGET) -> Verdict:
        for f in goal.ant | goal.suc:
            if expand_box(f) != f:
                raise ValueError("goal must be in box-free normal form")
        self._steps = 0
        self._budget = budget
        self.saturated_failures = []
        node, _ = self._search(goal, {}, 0)
        if node is not None:
            return Provable(Derivation(node, self.system))
        return NotProvable(goal, self._steps, tuple(self.saturated_failures[:4]))

    def provable(self, goal: Sequent, budget: int = DEFAULT_BUDGET) -> bool:
        return bool(self.prove(goal, budget))

    # returns (node or None, shallowest ancestor depth a loop cutoff hit)
    def _search(self, seq: Sequent, branch: dict, depth: int):
        hit = self.proved.get(seq)
        if hit is not None:
            return hit, _INF
        if seq in self.failed:
            return None, _INF
        if seq in branch:
            return None, branch[seq]
        self._steps += 1
        if self._steps > self._budget:
            raise BudgetExceeded(f"search exceeded {self._budget} nodes")
        branch[seq] = depth
        try:
            node, low = self._expand(seq, branch, depth + 1)
        finally:
            del branch[seq]
        if node is not None:
            node = weaken_to(node, seq.ant, seq.suc)
            self.proved[seq] = node
            return node, _INF
        if low >= depth:
            self.failed.add(seq)
            return None, _INF
        return None, low

    def _expand(self, seq: Sequent, branch: dict, depth: int):
        ax = _axiom(seq)
        if ax is not None:
            return ax, _INF
        for f in sort_formulas(seq.ant):
            if not _is_atomic(f):
                return self._left(seq, f, branch, depth)
        for f in sort_formulas(seq.suc):
            if not _is_atomic(f):
                return self._right(seq, f, branch, depth)
        return self._modal(seq, branch, depth)

    def _sub(self, ant, suc, branch, depth):
        return self._search(Sequent(frozenset(ant), frozenset(suc)), branch, depth)

    def _left(self, seq, f, branch, depth):
        g, d = seq.ant - {f}, seq.suc
        if isinstance(f, Neg):
            p, low = self._sub(g, d | {f.sub}, branch, depth)
            return (rebuild("NegL", f, [p]) if p else None), low
        if isinstance(f, And):
            p, low = self._sub(g | {f.left, f.right}, d, branch, depth)
            if p is None:
                return None, low
            if f.left == f.right:
                return rebuild("AndL", f, [p], 0), low
            step = rebuild("AndL", f, [p], 1)
            if f.left in step.ant:
                step = rebuild("AndL", f, [step], 0)
            return step, low
        if isinstance(f, Or):
            p1, l1 = self._sub(g | {f.left}, d, branch, depth)
            if p1 is None:
                return None, l1
            p2, l2 = self._sub(g | {f.right}, d, branch, depth)
            if p2 is None:
                return None, l2
            return rebuild("OrL", f, [p1, p2]), min(l1, l2)
        if isinstance(f, Imp):
            p1, l1 = self._sub(g, d | {f.left}, branch, depth)
            if p1 is None:
                return None, l1
            p2, l2 = self._sub(g | {f.right}, d, branch, depth)
            if p2 is None:
                return None, l2
            return rebuild("ImpL", f, [p1, p2]), min(l1, l2)
        raise ValueError(f"unexpected formula {f!r}")

    def _right(self, seq, f, branch, depth):
        g, d = seq.ant, seq.suc - {f}
        if isinstance(f, Neg):
            p, low = self._sub(g | {f.sub}, d, branch, depth)
            return (rebuild("NegR", f, [p]) if p else None), low
        if isinstance(f, Or):
            p, low = self._sub(g, d | {f.left, f.right}, branch, depth)
            if p is None:
                return None, low
            if f.left == f.right:
                return rebuild("OrR", f, [p], 0), low
            step = rebuild("OrR", f, [p], 1)
            if f.left in step.suc:
                step = rebuild("OrR", f, [step], 0)
            return step, low
        if isinstance(f, And):
            p1, l1 = self._sub(g, d | {f.left}, branch, depth)
            if p1 is None:
                return None, l1
            p2, l2 = self._sub(g, d | {f.right}, branch, depth)
            if p2 is None:
                return None, l2
            return rebuild("AndR", f, [p1, p2]), min(l1, l2)
        if isinstance(f, Imp):
            p, low = self._sub(g | {f.left}, d | {f.right}, branch, depth)
            return (rebuild("ImpR", f, [p]) if p else None), low
        raise ValueError(f"unexpected formula {f!r}")

    def _modal(self, seq, branch, depth):
        low = _INF
        omega = [f for f in sort_formulas(seq.ant) if isinstance(f, Rhd)]
        for diag in sort_formulas(seq.suc):
            if not isinstance(diag, Rhd):
                continue
            if self.system == ILMS and unbox(diag) is not None:
                node, l = self._box_step(omega, diag, branch, depth)
                low = min(low, l)
                if node is not None:
                    return node, low
            node, l = self._rhd_step(omega, diag, branch, depth)
            low = min(low, l)
            if node is not None:
                return node, low
        if len(self.saturated_failures) < 4:
            self.saturated_failures.append(seq)
        return None, low

    def _rhd_step(self, omega, diag, branch, depth):
        low = _INF
        principals, sides = [], []
        for f in omega:
            side, l = self._sub([f.right], [diag.right], branch, depth)
            low = min(low, l)
            if side is not None:
                principals.append(f)
                sides.append(side)
        xs = {f.left for f in principals}
        if self.system == ILMPS:
            left, l = self._sub(set(omega) | {diag, diag.left}, xs, branch, depth)
        else:
            left, l = self._sub([diag.left], xs, branch, depth)
        low = min(low, l)
        if left is None:
            return None, low
        if self.system == ILMPS:
            return make_rhdp(omega, principals, diag, left, sides), low
        return make_rhd(principals, diag, left, sides), low

    def _box_step(self, omega, diag, branch, depth):
        boxed = [f for f in omega if unbox(f) is not None]
        body = unbox(diag)
        ant = set(boxed) | {unbox(f) for f in boxed} | {diag}
        p, low = self._sub(ant, [body], branch, depth)
        if p is None:
            return None, low
        return make_box_rule(boxed, body, p), low


_PROVERS: dict[str, Prover] = {}


def prover(system: str = ILMPS) -> Prover:
    """Shared prover instance (and memo table) for a system."""
    if system not in _PROVERS:
        _PROVERS[system] = Prover(system)
    return _PROVERS[system]


def reset_memo() -> None:
    for p in _PROVERS.values():
        p.clear()


def prove(system: str, goal: Sequent, budget: int = DEFAULT_BUDGET) -> Verdict:
    return prover(system).prove(goal, budget)


def provable(goal: Sequent, system: str = ILMPS, budget: int = DEFAULT_BUDGET) -> bool:
    return bool(prove(system, goal, budget))


def decide(f: Formula, budget: int = DEFAULT_BUDGET, system: str = ILMPS) -> Verdict:
    """Decide IL-(P) theoremhood by searching for a cut-free proof of ``=> f``."""
    return prove(system, Sequent(frozenset(), frozenset({expand_box(f)})), budget)


def is_theorem(f: Formula, budget: int = DEFAULT_BUDGET) -> bool:
    return bool(decide(f, budget))


# ------------------------------------------------------------------ oracle

class _Closure:
    def __init__(self, formulas: Iterable[Formula]):
        fs = set()
        for f in formulas:
            fs |= subformulas(f)
        fs.add(BOT)
        self.items = sort_formulas(fs)
        self.index = {f: i for i, f in enumerate(self.items)}
        self.rhd_mask = 0
        for i, f in enumerate(self.items):
            if isinstance(f, Rhd):
                self.rhd_mask |= 1 << i

    def bit(self, f: Formula) -> int:
        return 1 << self.index[f]

    def mask(self, fs) -> int:
        m = 0
        for f in fs:
            m |= self.bit(f)
        return m


def prove_fixpoint_oracle(goal: Sequent, closure_budget: int = 20,
                          item_budget: int = 200_000) -> Verdict:
    """Least-fixpoint computation of the derivable ILmPs sequents.

    Sequents are bit masks over the subformula closure of the goal.  Because
    weakening is a rule, the derivable set is upward closed and is stored by
    its minimal elements only.  Rules are applied forwards.
    """
    for f in goal.ant | goal.suc:
        if expand_box(f) != f:
            raise ValueError("goal must be in box-free normal form")
    cl = _Closure(goal.ant | goal.suc)
    if len(cl.items) > closure_budget:
        raise BudgetExceeded(f"closure has {len(cl.items)} formulas (budget {closure_budget})")
    items = cl.items
    bit = cl.bit
    minimal: list[tuple[int, int]] = []
    agenda: list[tuple[int, int]] = []
    count = 0

    def subsumed(a: int, s: int) -> bool:
        return any(ma & ~a == 0 and ms & ~s == 0 for ma, ms in minimal)

    def add(a: int, s: int) -> None:
        nonlocal count, minimal
        if subsumed(a, s):
            return
        minimal = [(ma, ms) for ma, ms in minimal if not (a & ~ma == 0 and s & ~ms == 0)]
        minimal.append((a, s))
        agenda.append((a, s))
        count += 1
        if count > item_budget:
            raise BudgetExceeded("oracle item budget exceeded")

    def derivable(a: int, s: int) -> bool:
        return subsumed(a, s)

    for f in items:
        add(bit(f), bit(f))
    add(bit(BOT), 0)

    negs = [f for f in items if isinstance(f, Neg)]
    ands = [f for f in items if isinstance(f, And)]
    ors = [f for f in items if isinstance(f, Or)]
    imps = [f for f in items if isinstance(f, Imp)]
    rhds = [f for f in items if isinstance(f, Rhd)]

    def one_premise(a, s):
        for f in negs:
            x = bit(f.sub)
            if s & x:
                add(a | bit(f), s & ~x)
            if a & x:
                add(a & ~x, s | bit(f))
        for f in ands:
            for c in (f.left, f.right):
                x = bit(c)
                if a & x:
                    add((a & ~x) | bit(f), s)
        for f in ors:
            for c in (f.left, f.right):
                x = bit(c)
                if s & x:
                    add(a, (s & ~x) | bit(f))
        for f in imps:
            x, y = bit(f.left), bit(f.right)
            if a & x or s & y:
                add(a & ~x, (s & ~y) | bit(f))

    def two_premise(a, s):
        for ma, ms in list(minimal):
            for (a1, s1), (a2, s2) in (((a, s), (ma, ms)), ((ma, ms), (a, s))):
                for f in ands:
                    x, y = bit(f.left), bit(f.right)
                    if s1 & x and s2 & y:
                        add(a1 | a2, (s1 & ~x) | (s2 & ~y) | bit(f))
                for f in ors:
                    x, y = bit(f.left), bit(f.right)
                    if a1 & x and a2 & y:
                        add((a1 & ~x) | (a2 & ~y) | bit(f), s1 | s2)
                for f in imps:
                    x, y = bit(f.left), bit(f.right)
                    if s1 & x and a2 & y:
                        add(a1 | (a2 & ~y) | bit(f), (s1 & ~x) | s2)

    def modal(a, s):
        for diag in rhds:
            rest = a & ~bit(diag) & ~bit(diag.left)
            if rest & ~cl.rhd_mask:
                continue
            # every succedent formula needs a principal X |> Y with Y => B derivable
            options = []
            ok = True
            for i, x in enumerate(items):
                if not s >> i & 1:
                    continue
                cands = [f for f in rhds
                         if f.left == x and derivable(bit(f.right), bit(diag.right))]
                if not cands:
                    ok = False
                    break
                options.append(cands)
            if not ok:
                continue
            for choice in product(*options):
                add(rest | cl.mask(choice), bit(diag))

    while agenda:
        a, s = agenda.pop()
        if (a, s) not in minimal:
            continue
        one_premise(a, s)
        two_premise(a, s)
        modal(a, s)
        # a new minimal element may enable side premises of earlier modal steps
        if a.bit_count() <= 1 and s.bit_count() <= 1:
            for ma, ms in list(minimal):
                modal(ma, ms)

    ga, gs = cl.mask(goal.ant), cl.mask(goal.suc)
    if derivable(ga, gs):
        # the oracle certifies provability; the proof object comes from search
        # the oracle certifies provability without building a proof object
        return Provable(None)
    return NotProvable(goal, count)


def oracle_decide(f: Formula, closure_budget: int = 20) -> bool:
    return bool(prove_fixpoint_oracle(Sequent(frozenset(), frozenset({expand_box(f)})),
                                      closure_budget))


# ------------------------------------------------------------ FCE harness

@dataclass(frozen=True)
class CutWitness:
    goal: Sequent
    cut_formula: Formula
    derivation: Derivation


def hunt_cut_needed(goals: Iterable[Sequent], cut_pool: Iterable[Formula],
                    budget: int = DEFAULT_BUDGET) -> list[CutWitness]:
    """Look for ILms sequents with a proof using one cut but no cut-free proof.

    For each goal without a cut-free ILms proof, try every cut formula from the
    pool: if both premises of the cut have cut-free proofs, the composed
    derivation is a witness.  Finding nothing proves nothing.
    """
    from ilp.calculus import make_cut

    pool = sort_formulas({expand_box(c) for c in cut_pool})
    found = []
    ilms = prover(ILMS)
    for goal in goals:
        if ilms.provable(goal, budget):
            continue
        for c in pool:
            left = ilms.prove(Sequent(goal.ant, goal.suc | {c}), budget)
            if not left:
                continue
            right = ilms.prove(Sequent(goal.ant | {c}, goal.suc), budget)
            if not right:
                continue
            node = make_cut(left.derivation.root, right.derivation.root, c)
            found.append(CutWitness(goal, c, Derivation(node, ILMS)))
            break
    return found
