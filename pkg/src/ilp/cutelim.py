"""Cut elimination for ILmPs.

``eliminate`` walks the proof bottom-up from the leaves and replaces every
cut by ``reduce``, which turns a cut between two cut-free proofs into a
cut-free proof of a subsequent of the cut's (smallest) conclusion.  Every
recursive ``reduce`` call is guarded by the measure
``(degree of the cut formula, height of the left proof + height of the
right proof)``, which must decrease lexicographically; the guard raises
``MeasureError`` otherwise.

The only case that is not a textbook Gentzen reduction is the cut on an
interpretability formula that is principal in both ``RhdP`` premises.  It
is handled by ``eliminate_principal`` with the help of ``drop_diagonal``,
which rebuilds the left premise of the left proof without the cut formula
while only introducing cuts on its two immediate subformulas.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ilp.calculus import (
    ILMPS, Derivation, Node, Sequent, check, height, init, is_cut_free, make_cut,
    make_rhdp, node_index, rebuild, weaken_to,
)
from ilp.syntax import Formula, Rhd, show, size, sort_formulas

RIGHT_RULES = frozenset({"WR", "NegR", "AndR", "OrR", "ImpR"})
LEFT_RULES = frozenset({"WL", "NegL", "AndL", "OrL", "ImpL"})


class MeasureError(AssertionError):
    """A reduction step failed to decrease the (degree, height) measure."""


def cut_degree(f: Formula) -> int:
    """Number of connective and operator occurrences."""
    return size(f) - sum(1 for g in _leaves(f))


def _leaves(f: Formula):
    from ilp.syntax import _walk, children
    return (g for g in _walk(f) if not children(g))


@dataclass(frozen=True)
class Step:
    reduction: str
    cut_formula: str
    measure: tuple
    parent: tuple


@dataclass
class Trace:
    steps: list = field(default_factory=list)

    def record(self, reduction: str, a: Formula, measure: tuple, parent: tuple) -> None:
        self.steps.append(Step(reduction, show(a), measure, parent))

    def reductions(self) -> dict:
        out: dict[str, int] = {}
        for s in self.steps:
            out[s.reduction] = out.get(s.reduction, 0) + 1
        return out


_TOP_MEASURE = (float("inf"), float("inf"))


def _measure(left: Node, right: Node, a: Formula) -> tuple:
    return (cut_degree(a), height(left) + height(right))


def _principal_left(node: Node, a: Formula) -> bool:
    if node.rule in RIGHT_RULES:
        return node.principals[0] == a
    return node.rule == "RhdP" and node.diagonal == a


def _principal_right(node: Node, a: Formula) -> bool:
    if node.rule in LEFT_RULES:
        return node.principals[0] == a
    return node.rule == "RhdP" and a in node.principals


def _target(left: Node, right: Node, a: Formula) -> Sequent:
    return Sequent(left.ant | (right.ant - {a}), (left.suc - {a}) | right.suc)


class Eliminator:
    def __init__(self, trace: Optional[Trace] = None):
        self.trace = trace if trace is not None else Trace()

    # ------------------------------------------------------------- driver

    def eliminate_node(self, node: Node, parent: tuple = _TOP_MEASURE) -> Node:
        done: dict[int, Node] = {}
        order = []
        stack = [(node, False)]
        while stack:
            n, expanded = stack.pop()
            if id(n) in done:
                continue
            if expanded:
                prem = tuple(done[id(p)] for p in n.premises)
                if n.rule == "Cut":
                    red = self.reduce(prem[0], prem[1], n.cut_formula, parent)
                    done[id(n)] = weaken_to(red, n.ant, n.suc)
                elif all(a is b for a, b in zip(prem, n.premises)):
                    done[id(n)] = n
                else:
                    done[id(n)] = Node(n.rule, n.seq, prem, n.principals, n.diagonal)
                continue
            stack.append((n, True))
            for p in reversed(n.premises):
                if id(p) not in done:
                    stack.append((p, False))
        return done[id(node)]

    # ------------------------------------------------------------- reduce

    def reduce(self, left: Node, right: Node, a: Formula, parent: tuple) -> Node:
        """Cut-free proof of a subsequent of the smallest cut conclusion."""
        if a not in left.suc:
            return left
        if a not in right.ant:
            return right
        m = _measure(left, right, a)
        if not m < parent:
            raise MeasureError(f"measure {m} does not decrease below {parent} for {show(a)}")
        if a in left.ant:
            self.trace.record("context-left", a, m, parent)
            return right
        if a in right.suc:
            self.trace.record("context-right", a, m, parent)
            return left
        if not _principal_left(left, a):
            self.trace.record("permute-left:" + left.rule, a, m, parent)
            return self._permute_left(left, right, a, m)
        if left.rule == "WR":
            self.trace.record("weakening-left", a, m, parent)
            return self.reduce(left.premises[0], right, a, m)
        if not _principal_right(right, a):
            self.trace.record("permute-right:" + right.rule, a, m, parent)
            return self._permute_right(left, right, a, m)
        if right.rule == "WL":
            self.trace.record("weakening-right", a, m, parent)
            return self.reduce(left, right.premises[0], a, m)
        self.trace.record("principal:" + left.rule + "/" + right.rule, a, m, parent)
        if left.rule == "RhdP":
            return self._principal_rhdp(left, right, a, m)
        return self._principal_logical(left, right, a, m)

    def _permute_left(self, left: Node, right: Node, a: Formula, m: tuple) -> Node:
        if left.rule not in LEFT_RULES | RIGHT_RULES:
            raise ValueError(f"cannot permute a cut past {left.rule}")
        prem = [self.reduce(p, right, a, m) if a in p.suc else p for p in left.premises]
        return rebuild(left.rule, left.principals[0], prem, node_index(left))

    def _permute_right(self, left: Node, right: Node, a: Formula, m: tuple) -> Node:
        if right.rule == "RhdP":
            # the cut formula sits in the side context of the modal rule
            sigma_l = right.premises[0]
            new_left = self.reduce(left, sigma_l, a, m)
            ant = left.ant | (right.ant - {a})
            return make_rhdp(ant, right.principals, right.diagonal, new_left, right.premises[1:])
        if right.rule not in LEFT_RULES | RIGHT_RULES:
            raise ValueError(f"cannot permute a cut past {right.rule}")
        prem = [self.reduce(left, p, a, m) if a in p.ant else p for p in right.premises]
        return rebuild(right.rule, right.principals[0], prem, node_index(right))

    def _strip(self, left: Node, right: Node, a: Formula, m: tuple):
        """Cut the context occurrences of ``a`` out of the immediate premises."""
        lp = [self.reduce(p, right, a, m) if a in p.suc else p for p in left.premises]
        rp = [self.reduce(left, p, a, m) if a in p.ant else p for p in right.premises]
        return lp, rp

    def _principal_logical(self, left: Node, right: Node, a: Formula, m: tuple) -> Node:
        lp, rp = self._strip(left, right, a, m)
        rule = left.rule
        if rule == "NegR":
            return self.reduce(rp[0], lp[0], a.sub, m)
        if rule == "AndR":
            prem = rp[0]
            for i, comp in enumerate((a.left, a.right)):
                if comp in right.premises[0].ant and comp not in right.ant - {a}:
                    return self.reduce(lp[i], prem, comp, m)
            for i, comp in enumerate((a.left, a.right)):
                if comp in prem.ant:
                    return self.reduce(lp[i], prem, comp, m)
            return prem
        if rule == "OrR":
            prem = lp[0]
            for i, comp in enumerate((a.left, a.right)):
                if comp in left.premises[0].suc and comp not in left.suc - {a}:
                    return self.reduce(prem, rp[i], comp, m)
            for i, comp in enumerate((a.left, a.right)):
                if comp in prem.suc:
                    return self.reduce(prem, rp[i], comp, m)
            return prem
        if rule == "ImpR":
            first = self.reduce(rp[0], lp[0], a.left, m)
            return self.reduce(first, rp[1], a.right, m)
        raise ValueError(f"unexpected principal rule {rule}")

    # ------------------------------------------------------- modal case

    def _principal_rhdp(self, pi: Node, sigma: Node, a: Formula, m: tuple) -> Node:
        if sigma.rule != "RhdP":
            raise ValueError("right premise must end in RhdP")
        return self.principal(pi, sigma, a, m)

    def principal(self, pi: Node, sigma: Node, ab: Formula, m: tuple) -> Node:
        pi_l = pi.premises[0]
        sigma_l = sigma.premises[0]
        j = sigma.principals.index(ab)
        sigma_b = sigma.premises[1 + j]
        # cut of pi against the left premise of sigma: same degree, lower height
        step1 = self.reduce(pi, sigma_l, ab, m)
        # the left premise of pi without A |> B, with cuts on A and B only
        dropper = DiagonalDropper(pi)
        pi_prime = dropper.prove(frozenset(), pi_l)
        pi_prime = self.eliminate_node(pi_prime, m)
        joined = self.reduce(step1, pi_prime, ab.left, m)
        sides = [self.reduce(p, sigma_b, ab.right, m) for p in pi.premises[1:]]
        others = [(f, s) for f, s in zip(sigma.principals, sigma.premises[1:]) if f != ab]
        principals = list(pi.principals) + [f for f, _ in others]
        sides += [s for _, s in others]
        ant = pi.ant | (sigma.ant - {ab})
        return make_rhdp(ant, principals, sigma.diagonal, joined, sides)


# ------------------------------------------------------ diagonal removal

class DiagonalDropper:
    """Rebuilds explicit sequents of the left premise of ``pi``.

    For ``pi`` ending in RhdP with diagonal ``A |> B`` and a node ``S`` of its
    left premise whose antecedent contains ``A |> B``, ``prove(theta, S)``
    returns a proof of ``K, theta, S.ant - {A |> B} => S.suc`` (up to
    subsequent) where ``K`` is the conclusion antecedent of ``pi``; all of
    its cuts are on ``A`` or ``B``.
    """

    def __init__(self, pi: Node):
        if pi.rule != "RhdP":
            raise ValueError("diagonal removal needs a proof ending in RhdP")
        self.pi = pi
        self.ab = pi.diagonal
        self.k = pi.ant
        self.reachable_diagonals = self._reachable_diagonals()
        self._memo: dict[tuple, Node] = {}

    def _reachable_diagonals(self) -> frozenset:
        out = set()
        stack = [self.pi.premises[0]]
        while stack:
            n = stack.pop()
            if self.ab not in n.ant:
                continue
            if n.rule == "RhdP" and self.ab in n.principals:
                out.add(n.diagonal)
            stack.extend(n.premises)
        return frozenset(out)

    def explicit_nodes(self) -> list[Node]:
        out, stack = [], [self.pi.premises[0]]
        while stack:
            n = stack.pop()
            if self.ab in n.ant:
                out.append(n)
                stack.extend(n.premises)
        return out

    def target(self, theta: frozenset, node: Node) -> Sequent:
        return Sequent(self.k | theta | (node.ant - {self.ab}), node.suc)

    def prove(self, theta: frozenset, node: Node) -> Node:
        if self.ab not in node.ant:
            raise ValueError("node is not explicit")
        if not theta <= self.reachable_diagonals:
            raise ValueError("theta must consist of collected diagonal formulas")
        key = (theta, id(node))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._prove(theta, node)
            tgt = self.target(theta, node)
            if not hit.seq.within(tgt):
                raise AssertionError(f"diagonal removal produced {hit.seq}, expected within {tgt}")
            self._memo[key] = hit
        return hit

    def _sub(self, theta, p: Node) -> Node:
        return self.prove(theta, p) if self.ab in p.ant else p

    def _prove(self, theta: frozenset, node: Node) -> Node:
        ab, tgt = self.ab, self.target(theta, node)
        if node.rule == "Init":
            return weaken_to(self.pi, tgt.ant, tgt.suc)
        if node.rule == "WL" and node.principals[0] == ab:
            prem = node.premises[0]
            if ab not in prem.ant:
                return weaken_to(prem, tgt.ant, tgt.suc)
            return self.prove(theta, prem)
        if node.rule in LEFT_RULES | RIGHT_RULES:
            prem = [self._sub(theta, p) for p in node.premises]
            return rebuild(node.rule, node.principals[0], prem, node_index(node))
        if node.rule != "RhdP":
            raise ValueError(f"unexpected rule {node.rule} in an explicit subtree")
        diag = node.diagonal
        if ab not in node.principals:
            left = self.prove(theta, node.premises[0])
            return make_rhdp(tgt.ant, node.principals, diag, left, node.premises[1:])
        if diag in theta:
            return weaken_to(init(diag), tgt.ant, tgt.suc)
        pi2 = self.prove(theta | {diag}, self.pi.premises[0])
        secondary = self.prove(theta, node.premises[0])
        left = cut_or_skip(secondary, pi2, ab.left)
        j = node.principals.index(ab)
        b_to_f = node.premises[1 + j]
        principals, sides = [], []
        for f, side in zip(self.pi.principals, self.pi.premises[1:]):
            principals.append(f)
            sides.append(cut_or_skip(side, b_to_f, ab.right))
        for f, side in zip(node.principals, node.premises[1:]):
            if f != ab:
                principals.append(f)
                sides.append(side)
        return make_rhdp(tgt.ant, principals, diag, left, sides)


def cut_or_skip(left: Node, right: Node, a: Formula) -> Node:
    """A cut on ``a``, or the premise that already lacks ``a``."""
    if a not in left.suc:
        return left
    if a not in right.ant:
        return right
    return make_cut(left, right, a)


# ------------------------------------------------------------ public API

def _require_ilmps(d: Derivation) -> None:
    if d.system != ILMPS:
        raise ValueError("cut elimination is implemented for ILmPs only")
    res = check(d)
    if not res:
        raise ValueError(f"malformed derivation: {res}")


def eliminate(derivation: Derivation, trace: Optional[Trace] = None) -> Derivation:
    """A cut-free derivation of the same endsequent."""
    _require_ilmps(derivation)
    root = Eliminator(trace).eliminate_node(derivation.root)
    return Derivation(root, ILMPS)


def eliminate_principal(pi: Derivation, sigma: Derivation, cut_formula: Formula,
                        trace: Optional[Trace] = None) -> Derivation:
    """Cut-free proof of the cut of ``pi`` and ``sigma`` on a formula principal in both."""
    for d in (pi, sigma):
        _require_ilmps(d)
        if not is_cut_free(d):
            raise ValueError("inputs must be cut-free")
    p, s = pi.root, sigma.root
    if p.rule != "RhdP" or s.rule != "RhdP":
        raise ValueError("both proofs must end in RhdP")
    if p.diagonal != cut_formula:
        raise ValueError("cut formula is not the diagonal of the left proof")
    if cut_formula not in s.principals:
        raise ValueError("cut formula is not principal in the right proof")
    el = Eliminator(trace)
    tgt = _target(p, s, cut_formula)
    if cut_formula in p.ant:
        node = s
    else:
        m = _measure(p, s, cut_formula)
        el.trace.record("principal:RhdP/RhdP", cut_formula, m, _TOP_MEASURE)
        node = el.principal(p, s, cut_formula, m)
    return Derivation(weaken_to(node, tgt.ant, tgt.suc), ILMPS)


def drop_diagonal(pi: Derivation, theta, node: Optional[Node] = None) -> Derivation:
    """The explicit-sequent transformation applied to ``node`` (default: the
    root of the left premise of ``pi``)."""
    _require_ilmps(pi)
    lem = DiagonalDropper(pi.root)
    start = node if node is not None else pi.root.premises[0]
    return Derivation(lem.prove(frozenset(theta), start), ILMPS)


def only_cuts_on(derivation: Derivation, allowed) -> bool:
    from ilp.calculus import iter_nodes
    allowed = set(allowed)
    return all(n.cut_formula in allowed for n in iter_nodes(derivation.root) if n.rule == "Cut")
