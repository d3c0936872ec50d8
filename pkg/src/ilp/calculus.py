"""Set-based sequents, proof trees, the rule checker and proof builders.

Two rule systems share the propositional part:

* ``ILms``  adds ``BoxRule`` and ``Rhd``.
* ``ILmPs`` adds ``RhdP`` (the persistence rule with a diagonal formula).

Sequents contain no ``Box``; a box is written ``(~A) |> false``.  Every
node of a proof tree records its rule, its conclusion, the principal
formulas (one for a logical rule, the listed principals for a modal rule),
the diagonal of a modal rule and the cut formula of a cut.

The builders below (``weaken_to``, ``rebuild``, ``make_cut``, ``make_rhdp``
and friends) never validate; ``check`` is the single source of truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ilp.syntax import (
    BOT, And, Bot, Box, Formula, Imp, Neg, Or, Rhd, has_box, parse, show,
    sort_formulas,
)

ILMS = "ILms"
ILMPS = "ILmPs"
SYSTEMS = (ILMS, ILMPS)

LOGICAL = ("WL", "WR", "NegL", "NegR", "AndL", "AndR", "OrL", "OrR", "ImpL", "ImpR")
LEAVES = ("Init", "InitBot")
RULES = LEAVES + LOGICAL + ("Cut", "BoxRule", "Rhd", "RhdP")
_ALLOWED = {
    ILMS: frozenset(LEAVES + LOGICAL + ("Cut", "BoxRule", "Rhd")),
    ILMPS: frozenset(LEAVES + LOGICAL + ("Cut", "RhdP")),
}
_LEFT_RULES = frozenset({"WL", "NegL", "AndL", "OrL", "ImpL"})


def box(f: Formula) -> Formula:
    """The box of the sequent language: ``(~f) |> false``."""
    return Rhd(Neg(f), BOT)


def unbox(f: Formula) -> Optional[Formula]:
    """Inverse of ``box``; ``None`` for formulas not of that shape."""
    if isinstance(f, Rhd) and isinstance(f.left, Neg) and isinstance(f.right, Bot):
        return f.left.sub
    return None


@dataclass(frozen=True)
class Sequent:
    ant: frozenset
    suc: frozenset

    @staticmethod
    def of(ant: Iterable[Formula] = (), suc: Iterable[Formula] = ()) -> "Sequent":
        return Sequent(frozenset(ant), frozenset(suc))

    def __str__(self) -> str:
        a = ", ".join(show(f) for f in sort_formulas(self.ant))
        s = ", ".join(show(f) for f in sort_formulas(self.suc))
        return f"{a} => {s}".strip()

    def within(self, other: "Sequent") -> bool:
        return self.ant <= other.ant and self.suc <= other.suc

    def union(self, other: "Sequent") -> "Sequent":
        return Sequent(self.ant | other.ant, self.suc | other.suc)


def parse_sequent(text: str) -> Sequent:
    """Parse ``A, B => C, D``; commas split at the top level only."""
    if "=>" not in text:
        raise ValueError("a sequent needs '=>'")
    left, right = text.split("=>", 1)
    return Sequent.of(_split_list(left), _split_list(right))


def _split_list(text: str) -> list[Formula]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [parse(p) for p in parts if p.strip()]


@dataclass(frozen=True, eq=False)
class Node:
    rule: str
    seq: Sequent
    premises: tuple = ()
    principals: tuple = ()
    diagonal: Optional[Formula] = None
    cut_formula: Optional[Formula] = None

    @property
    def ant(self) -> frozenset:
        return self.seq.ant

    @property
    def suc(self) -> frozenset:
        return self.seq.suc


@dataclass(frozen=True)
class Derivation:
    root: Node
    system: str = ILMPS

    @property
    def conclusion(self) -> Sequent:
        return self.root.seq


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    path: tuple = ()
    rule: str = ""
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        where = "root" if not self.path else "root" + "".join(f".{i}" for i in self.path)
        return f"{self.rule} at {where}: {self.message}"


# ------------------------------------------------------------------ checker

def _ctx_options(side: frozenset, principal: Formula) -> tuple:
    # the context X in "X, principal" may or may not contain the principal
    return (side, side - {principal})


def _check_node(n: Node, system: str) -> Optional[str]:
    rule = n.rule
    if rule not in RULES:
        return f"unknown rule {rule!r}"
    if rule not in _ALLOWED[system]:
        return f"rule {rule} is not part of {system}"
    for f in n.ant | n.suc:
        if has_box(f):
            return "box constructor in sequent"
    c, ps = n.seq, n.premises
    if rule == "Init":
        if ps:
            return "initial sequent has premises"
        if len(c.ant) != 1 or c.ant != c.suc:
            return "not of the form A => A"
        return None
    if rule == "InitBot":
        if ps:
            return "initial sequent has premises"
        if c.ant != {BOT} or c.suc:
            return "not of the form false =>"
        return None
    if rule == "Cut":
        return _check_cut(n)
    if rule in LOGICAL:
        return _check_logical(n)
    if rule == "RhdP":
        return _check_rhdp(n)
    if rule == "Rhd":
        return _check_rhd(n)
    return _check_box(n)


def _check_cut(n: Node) -> Optional[str]:
    a = n.cut_formula
    if a is None:
        return "cut without cut formula"
    if len(n.premises) != 2:
        return "cut needs two premises"
    left, right = n.premises[0].seq, n.premises[1].seq
    if a not in left.suc:
        return "cut formula missing from left premise succedent"
    if a not in right.ant:
        return "cut formula missing from right premise antecedent"
    ants = {left.ant | s for s in (right.ant, right.ant - {a})}
    sucs = {d | right.suc for d in (left.suc, left.suc - {a})}
    if n.ant not in ants:
        return "cut conclusion antecedent mismatch"
    if n.suc not in sucs:
        return "cut conclusion succedent mismatch"
    return None


def _check_logical(n: Node) -> Optional[str]:
    rule, c, ps = n.rule, n.seq, [p.seq for p in n.premises]
    if len(n.principals) != 1:
        return "logical rule needs exactly one principal formula"
    f = n.principals[0]
    left = rule in _LEFT_RULES
    side = c.ant if left else c.suc
    if f not in side:
        return "principal formula missing from conclusion"
    want = {"WL": None, "WR": None, "NegL": Neg, "NegR": Neg, "AndL": And, "AndR": And,
            "OrL": Or, "OrR": Or, "ImpL": Imp, "ImpR": Imp}[rule]
    if want is not None and not isinstance(f, want):
        return f"principal formula is not a {want.__name__}"
    nprem = 2 if rule in ("AndR", "OrL", "ImpL") else 1
    if len(ps) != nprem:
        return f"expected {nprem} premise(s)"
    ctxs = _ctx_options(side, f)
    for ctx in ctxs:
        ok = False
        if rule == "WL":
            ok = ps[0] == Sequent(ctx, c.suc)
        elif rule == "WR":
            ok = ps[0] == Sequent(c.ant, ctx)
        elif rule == "NegL":
            ok = ps[0] == Sequent(ctx, c.suc | {f.sub})
        elif rule == "NegR":
            ok = ps[0] == Sequent(c.ant | {f.sub}, ctx)
        elif rule == "AndL":
            ok = any(ps[0] == Sequent(ctx | {x}, c.suc) for x in (f.left, f.right))
        elif rule == "AndR":
            ok = ps[0] == Sequent(c.ant, ctx | {f.left}) and ps[1] == Sequent(c.ant, ctx | {f.right})
        elif rule == "OrL":
            ok = ps[0] == Sequent(ctx | {f.left}, c.suc) and ps[1] == Sequent(ctx | {f.right}, c.suc)
        elif rule == "OrR":
            ok = any(ps[0] == Sequent(c.ant, ctx | {x}) for x in (f.left, f.right))
        elif rule == "ImpL":
            ok = ps[0] == Sequent(ctx, c.suc | {f.left}) and ps[1] == Sequent(ctx | {f.right}, c.suc)
        elif rule == "ImpR":
            ok = ps[0] == Sequent(c.ant | {f.left}, ctx | {f.right})
        if ok:
            return None
    return "premises do not match the rule"


def _modal_shape(n: Node) -> Optional[str]:
    d = n.diagonal
    if not isinstance(d, Rhd):
        return "diagonal formula missing or not an interpretability formula"
    if n.suc != {d}:
        return "succedent must consist of the diagonal formula alone"
    for f in n.principals:
        if not isinstance(f, Rhd):
            return "principal formula is not an interpretability formula"
    if len(n.premises) != 1 + len(n.principals):
        return "one side premise per principal formula required"
    for f, p in zip(n.principals, n.premises[1:]):
        if p.seq != Sequent(frozenset({f.right}), frozenset({d.right})):
            return f"side premise for {show(f)} must be {show(f.right)} => {show(d.right)}"
    if n.premises[0].suc != frozenset(f.left for f in n.principals):
        return "left premise succedent must list the principal antecedents"
    return None


def _check_rhdp(n: Node) -> Optional[str]:
    msg = _modal_shape(n)
    if msg:
        return msg
    if not all(isinstance(f, Rhd) for f in n.ant):
        return "antecedent contains a non-interpretability formula"
    if not set(n.principals) <= n.ant:
        return "principal formula missing from conclusion antecedent"
    d = n.diagonal
    left = n.premises[0].seq
    if d not in left.ant:
        return "diagonal missing"
    if left.ant != n.ant | {d, d.left}:
        return "left premise antecedent must be the conclusion antecedent plus diagonal and its left side"
    return None


def _check_rhd(n: Node) -> Optional[str]:
    msg = _modal_shape(n)
    if msg:
        return msg
    if n.ant != frozenset(n.principals):
        return "antecedent must consist of the principal formulas"
    if n.premises[0].ant != {n.diagonal.left}:
        return "left premise antecedent must be the left side of the conclusion"
    return None


def _check_box(n: Node) -> Optional[str]:
    d = n.diagonal
    a = unbox(d) if d is not None else None
    if a is None or n.suc != {d}:
        return "succedent must be a single boxed formula"
    inner = []
    for f in n.ant:
        x = unbox(f)
        if x is None:
            return "antecedent contains an unboxed formula"
        inner.append(x)
    if len(n.premises) != 1:
        return "box rule has one premise"
    if n.premises[0].seq != Sequent(n.ant | set(inner) | {d}, frozenset({a})):
        return "premise must be the boxed antecedent, its bodies and the diagonal => the body"
    return None


def check(derivation: Derivation) -> CheckResult:
    """Validate every rule instance; report the first offending node."""
    system = derivation.system
    if system not in SYSTEMS:
        return CheckResult(False, (), "", f"unknown system {system!r}")
    stack = [(derivation.root, ())]
    while stack:
        node, path = stack.pop()
        msg = _check_node(node, system)
        if msg:
            return CheckResult(False, path, node.rule, msg)
        for i in reversed(range(len(node.premises))):
            stack.append((node.premises[i], path + (i,)))
    return CheckResult(True)


def iter_nodes(node: Node):
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(n.premises)


def is_cut_free(derivation) -> bool:
    root = derivation.root if isinstance(derivation, Derivation) else derivation
    return all(n.rule != "Cut" for n in iter_nodes(root))


def cut_formulas(node: Node) -> list[Formula]:
    return [n.cut_formula for n in iter_nodes(node) if n.rule == "Cut"]


def height(node: Node) -> int:
    """Number of nodes on the longest root-to-leaf path."""
    memo: dict[int, int] = {}
    order = list(iter_nodes(node))
    for n in reversed(order):
        memo[id(n)] = 1 + max((memo[id(p)] for p in n.premises), default=0)
    return memo[id(node)]


def node_count(node: Node) -> int:
    return sum(1 for _ in iter_nodes(node))


# ----------------------------------------------------------------- builders

def init(f: Formula) -> Node:
    return Node("Init", Sequent(frozenset({f}), frozenset({f})), principals=(f,))


def init_bot() -> Node:
    return Node("InitBot", Sequent(frozenset({BOT}), frozenset()))


def weaken_to(node: Node, ant: Iterable[Formula], suc: Iterable[Formula]) -> Node:
    """Add single-formula weakenings until the conclusion is ``ant => suc``."""
    ant, suc = frozenset(ant), frozenset(suc)
    if not node.seq.within(Sequent(ant, suc)):
        raise ValueError(f"cannot weaken {node.seq} to {Sequent(ant, suc)}")
    cur = node
    for f in sort_formulas(ant - cur.ant):
        cur = Node("WL", Sequent(cur.ant | {f}, cur.suc), (cur,), (f,))
    for f in sort_formulas(suc - cur.suc):
        cur = Node("WR", Sequent(cur.ant, cur.suc | {f}), (cur,), (f,))
    return cur


def weaken_seq(node: Node, target: Sequent) -> Node:
    return weaken_to(node, target.ant, target.suc)


def actives(rule: str, f: Formula, index: int = 0) -> list[tuple[frozenset, frozenset]]:
    """Per premise: (antecedent actives, succedent actives)."""
    e = frozenset()
    if rule in ("WL", "WR"):
        return [(e, e)]
    if rule == "NegL":
        return [(e, frozenset({f.sub}))]
    if rule == "NegR":
        return [(frozenset({f.sub}), e)]
    if rule == "AndL":
        return [(frozenset({(f.left, f.right)[index]}), e)]
    if rule == "OrR":
        return [(e, frozenset({(f.left, f.right)[index]}))]
    if rule == "AndR":
        return [(e, frozenset({f.left})), (e, frozenset({f.right}))]
    if rule == "OrL":
        return [(frozenset({f.left}), e), (frozenset({f.right}), e)]
    if rule == "ImpL":
        return [(e, frozenset({f.left})), (frozenset({f.right}), e)]
    if rule == "ImpR":
        return [(frozenset({f.left}), frozenset({f.right}))]
    raise ValueError(f"not a logical rule: {rule}")


def component_index(rule: str, f: Formula, premise: Sequent) -> int:
    """For AndL/OrR: which component the premise carries (first match)."""
    side = premise.ant if rule == "AndL" else premise.suc
    if f.left in side:
        return 0
    if f.right in side:
        return 1
    return 0


def node_index(node: Node) -> Optional[int]:
    """For AndL/OrR nodes: the component that is active in the premise."""
    if node.rule not in ("AndL", "OrR"):
        return None
    f = node.principals[0]
    if node.rule == "AndL":
        prem, ctx = node.premises[0].ant, node.ant - {f}
    else:
        prem, ctx = node.premises[0].suc, node.suc - {f}
    present = [i for i, c in enumerate((f.left, f.right)) if c in prem]
    for i in present:
        if (f.left, f.right)[i] not in ctx:
            return i
    return present[0] if present else 0


def rebuild(rule: str, f: Formula, premises: Sequence[Node], index: Optional[int] = None) -> Node:
    """Apply a logical rule to arbitrary premises.

    The context is the union of what the premises carry besides their active
    formulas; missing actives and context are weakened in so that the result
    is always a legal instance with the smallest such conclusion.
    """
    if rule in ("AndL", "OrR") and index is None:
        index = component_index(rule, f, premises[0].seq)
    acts = actives(rule, f, index or 0)
    if len(acts) != len(premises):
        raise ValueError(f"{rule} needs {len(acts)} premises")
    gamma = frozenset().union(*(p.ant - a for p, (a, _) in zip(premises, acts)))
    delta = frozenset().union(*(p.suc - s for p, (_, s) in zip(premises, acts)))
    prem = tuple(weaken_to(p, gamma | a, delta | s) for p, (a, s) in zip(premises, acts))
    if rule in _LEFT_RULES:
        concl = Sequent(gamma | {f}, delta)
    else:
        concl = Sequent(gamma, delta | {f})
    return Node(rule, concl, prem, (f,))


def make_cut(left: Node, right: Node, a: Formula) -> Node:
    """Cut with the smallest conclusion: ``a`` leaves both sides."""
    if a not in left.suc or a not in right.ant:
        raise ValueError(f"cut formula {show(a)} does not occur on the required sides")
    concl = Sequent(left.ant | (right.ant - {a}), (left.suc - {a}) | right.suc)
    return Node("Cut", concl, (left, right), cut_formula=a)


def compose_cut(left: Derivation, right: Derivation, cut_formula: Formula) -> Derivation:
    """Join two derivations by a cut on ``cut_formula``."""
    if left.system != right.system:
        raise ValueError("derivations belong to different systems")
    if cut_formula not in left.conclusion.suc:
        raise ValueError("cut formula is not in the succedent of the left derivation")
    if cut_formula not in right.conclusion.ant:
        raise ValueError("cut formula is not in the antecedent of the right derivation")
    return Derivation(make_cut(left.root, right.root, cut_formula), left.system)


def make_rhdp(ant: Iterable[Formula], principals: Sequence[Formula], diagonal: Formula,
              left: Node, sides: Sequence[Node]) -> Node:
    """RhdP with conclusion ``ant => diagonal``; premises are weakened to fit."""
    ant = frozenset(ant)
    lp = weaken_to(left, ant | {diagonal, diagonal.left}, [f.left for f in principals])
    sp = tuple(weaken_to(s, [f.right], [diagonal.right]) for f, s in zip(principals, sides))
    return Node("RhdP", Sequent(ant, frozenset({diagonal})), (lp,) + sp,
                tuple(principals), diagonal)


def make_rhd(principals: Sequence[Formula], diagonal: Formula, left: Node,
             sides: Sequence[Node]) -> Node:
    lp = weaken_to(left, [diagonal.left], [f.left for f in principals])
    sp = tuple(weaken_to(s, [f.right], [diagonal.right]) for f, s in zip(principals, sides))
    return Node("Rhd", Sequent(frozenset(principals), frozenset({diagonal})), (lp,) + sp,
                tuple(principals), diagonal)


def make_box_rule(boxed: Iterable[Formula], body: Formula, premise: Node) -> Node:
    boxed = frozenset(boxed)
    d = box(body)
    inner = {unbox(f) for f in boxed}
    p = weaken_to(premise, boxed | inner | {d}, [body])
    return Node("BoxRule", Sequent(boxed, frozenset({d})), (p,), (), d)


def or_right_merge(node: Node, c1: Formula, c2: Formula) -> Node:
    """From ``G => D, c1, c2`` derive ``G => D, c1 | c2`` (c1, c2 may be absent)."""
    f = Or(c1, c2)
    if c1 == c2:
        return rebuild("OrR", f, [node], 0)
    step = rebuild("OrR", f, [node], 1)
    cur = weaken_to(step, step.ant, step.suc | ({c1} if c1 in node.suc else set()))
    return rebuild("OrR", f, [cur], 0) if c1 in cur.suc else cur


def and_left_merge(node: Node, c1: Formula, c2: Formula) -> Node:
    """From ``G, c1, c2 => D`` derive ``G, c1 & c2 => D``."""
    f = And(c1, c2)
    if c1 == c2:
        return rebuild("AndL", f, [node], 0)
    step = rebuild("AndL", f, [node], 1)
    cur = weaken_to(step, step.ant | ({c1} if c1 in node.ant else set()), step.suc)
    return rebuild("AndL", f, [cur], 0) if c1 in cur.ant else cur


# --------------------------------------------------------------------- JSON

def _fs(fs) -> list[str]:
    return [show(f) for f in sort_formulas(fs)]


def node_to_json(node: Node) -> dict:
    return {
        "rule": node.rule,
        "sequent": {"ant": _fs(node.ant), "suc": _fs(node.suc)},
        "principals": [show(f) for f in node.principals],
        "diagonal": show(node.diagonal) if node.diagonal is not None else None,
        "cut_formula": show(node.cut_formula) if node.cut_formula is not None else None,
        "premises": [node_to_json(p) for p in node.premises],
    }


def node_from_json(data: dict) -> Node:
    seq = Sequent.of([parse(s) for s in data["sequent"]["ant"]],
                     [parse(s) for s in data["sequent"]["suc"]])
    return Node(
        data["rule"], seq,
        tuple(node_from_json(p) for p in data.get("premises", [])),
        tuple(parse(s) for s in data.get("principals", [])),
        parse(data["diagonal"]) if data.get("diagonal") else None,
        parse(data["cut_formula"]) if data.get("cut_formula") else None,
    )


def derivation_to_json(d: Derivation) -> dict:
    return {"system": d.system, "proof": node_to_json(d.root)}


def derivation_from_json(data: dict) -> Derivation:
    return Derivation(node_from_json(data["proof"]), data.get("system", ILMPS))


def dumps(obj) -> str:
    """Canonical JSON text used for every artifact file."""
    return json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=True) + "\n"


def same_tree(a: Node, b: Node) -> bool:
    return node_to_json(a) == node_to_json(b)
