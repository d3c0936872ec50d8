"""Interpolants from cut-free proofs (Maehara's method) for ILms and ILmPs.

The recursion returns, for a node and a separation of its conclusion, a
formula ``C`` with proofs of subsequents of ``G1 => D1, C`` and
``G2, C => D2``.  Working up to subsequents keeps the construction simple
when premise formulas coincide; the final proofs are weakened to the exact
sequents.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from ilp.calculus import (
    ILMPS, ILMS, Derivation, Node, Sequent, box, check, init, init_bot, is_cut_free,
    make_box_rule, make_rhd, make_rhdp, node_count, node_index, rebuild, unbox, weaken_to,
)
from ilp.search import NotProvable, decide, prove
from ilp.syntax import (
    BOT, TOP, And, Formula, Imp, Neg, Or, Rhd, expand_box, show, vars_of,
)


@dataclass(frozen=True)
class Separation:
    left_ant: frozenset
    left_suc: frozenset
    right_ant: frozenset
    right_suc: frozenset

    @staticmethod
    def of(left_ant=(), left_suc=(), right_ant=(), right_suc=()) -> "Separation":
        return Separation(frozenset(left_ant), frozenset(left_suc),
                          frozenset(right_ant), frozenset(right_suc))

    def validate(self, seq: Sequent) -> None:
        if self.left_ant & self.right_ant or self.left_suc & self.right_suc:
            raise ValueError("separation blocks overlap")
        if self.left_ant | self.right_ant != seq.ant or self.left_suc | self.right_suc != seq.suc:
            raise ValueError("separation does not cover the sequent")

    def left_vars(self) -> frozenset:
        return _vars(self.left_ant | self.left_suc)

    def right_vars(self) -> frozenset:
        return _vars(self.right_ant | self.right_suc)


def _vars(fs) -> frozenset:
    out = frozenset()
    for f in fs:
        out |= vars_of(f)
    return out


@dataclass(frozen=True)
class Interpolant:
    formula: Formula
    proof_left: Derivation
    proof_right: Derivation
    separation: Separation

    def variable_condition(self) -> bool:
        return vars_of(self.formula) <= self.separation.left_vars() & self.separation.right_vars()


def big_or_list(items: list) -> Formula:
    if not items:
        return BOT
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def _or_left_chain(items: list, proofs: list, goal: Formula) -> Node:
    """From proofs of ``items[k] => goal`` derive ``big_or_list(items) => goal``."""
    if not items:
        return weaken_to(init_bot(), [BOT], [goal])
    if len(items) == 1:
        return proofs[0]
    rest = _or_left_chain(items[1:], proofs[1:], goal)
    return rebuild("OrL", Or(items[0], big_or_list(items[1:])), [proofs[0], rest])


def _or_right_inject(items: list, k: int, proof: Node) -> Node:
    """From a proof of ``G => items[k]`` derive ``G => big_or_list(items)``."""
    if len(items) == 1:
        return proof
    f = Or(items[0], big_or_list(items[1:]))
    if k == 0:
        return rebuild("OrR", f, [proof], 0)
    return rebuild("OrR", f, [_or_right_inject(items[1:], k - 1, proof)], 1)


_LEFT = frozenset({"WL", "NegL", "AndL", "OrL", "ImpL"})


class _Maehara:
    def __init__(self, system: str):
        self.system = system

    def run(self, node: Node, sep: Separation):
        c, lp, rp = self._run(node, sep)
        lt = Sequent(sep.left_ant, sep.left_suc | {c})
        rt = Sequent(sep.right_ant | {c}, sep.right_suc)
        if not lp.seq.within(lt) or not rp.seq.within(rt):
            raise AssertionError(f"interpolation invariant broken at {node.rule}")
        return c, lp, rp

    def _split(self, prem: Sequent, parent: Sequent, sep: Separation,
               active_left: bool) -> Separation:
        la, ra, ls, rs = set(), set(), set(), set()
        for f in prem.ant:
            if f in sep.left_ant:
                la.add(f)
            elif f in sep.right_ant:
                ra.add(f)
            else:
                (la if active_left else ra).add(f)
        for f in prem.suc:
            if f in sep.left_suc:
                ls.add(f)
            elif f in sep.right_suc:
                rs.add(f)
            else:
                (ls if active_left else rs).add(f)
        return Separation.of(la, ls, ra, rs)

    def _run(self, node: Node, sep: Separation):
        rule = node.rule
        if rule == "Init":
            f = next(iter(node.ant))
            in_l, out_l = f in sep.left_ant, f in sep.left_suc
            if in_l and out_l:
                return BOT, init(f), init_bot()
            if in_l:
                return f, init(f), init(f)
            if out_l:
                c = Neg(f)
                return c, rebuild("NegR", c, [init(f)]), rebuild("NegL", c, [init(f)])
            return TOP, rebuild("NegR", TOP, [init_bot()]), init(f)
        if rule == "InitBot":
            if BOT in sep.left_ant:
                return BOT, init_bot(), init_bot()
            return TOP, rebuild("NegR", TOP, [init_bot()]), init_bot()
        if rule in ("RhdP", "Rhd"):
            return self._modal(node, sep)
        if rule == "BoxRule":
            return self._box(node, sep)
        if rule == "Cut":
            raise ValueError("interpolation needs a cut-free derivation")
        f = node.principals[0]
        left_side = f in (sep.left_ant if rule in _LEFT else sep.left_suc)
        subs = [self.run(p, self._split(p.seq, node.seq, sep, left_side)) for p in node.premises]
        idx = node_index(node)
        if len(subs) == 1:
            c, lp, rp = subs[0]
            if left_side:
                return c, rebuild(rule, f, [lp], idx), rp
            return c, lp, rebuild(rule, f, [rp], idx)
        (c1, l1, r1), (c2, l2, r2) = subs
        if left_side:
            if c1 == c2:
                return c1, rebuild(rule, f, [l1, l2]), _pick(r1, r2)
            c = Or(c1, c2)
            l1w = weaken_to(l1, l1.ant, l1.suc | {c2})
            l2w = weaken_to(l2, l2.ant, l2.suc | {c1})
            step = rebuild(rule, f, [l1w, l2w])
            step = rebuild("OrR", c, [step], 1)
            step = rebuild("OrR", c, [step], 0)
            return c, step, rebuild("OrL", c, [r1, r2])
        if c1 == c2:
            return c1, _pick(l1, l2), rebuild(rule, f, [r1, r2])
        c = And(c1, c2)
        r1w = weaken_to(r1, r1.ant | {c2}, r1.suc)
        r2w = weaken_to(r2, r2.ant | {c1}, r2.suc)
        step = rebuild(rule, f, [r1w, r2w])
        step = rebuild("AndL", c, [step], 1)
        step = rebuild("AndL", c, [step], 0)
        return c, rebuild("AndR", c, [l1, l2]), step

    # ------------------------------------------------------------- modal

    def _modal(self, node: Node, sep: Separation):
        diag = node.diagonal
        a, b = diag.left, diag.right
        diag_left = diag in sep.left_suc
        p1 = [(f, s) for f, s in zip(node.principals, node.premises[1:]) if f in sep.left_ant]
        p2 = [(f, s) for f, s in zip(node.principals, node.premises[1:]) if f not in sep.left_ant]
        xs1 = {f.left for f, _ in p1}
        lprem = node.premises[0].seq
        la, ra = set(), set()
        for f in lprem.ant:
            if self.system == ILMPS and f in sep.left_ant:
                la.add(f)
            elif self.system == ILMPS and f in sep.right_ant:
                ra.add(f)
            else:
                (la if diag_left else ra).add(f)
        ls = {x for x in lprem.suc if x in xs1}
        rs = set(lprem.suc) - ls
        d, lp, rp = self.run(node.premises[0], Separation.of(la, ls, ra, rs))
        plus = self.system == ILMPS
        g1, g2 = sep.left_ant, sep.right_ant
        if diag_left:
            es, e_ok, e_w = [], [], []
            for f, side in p2:
                e, sl, sr = self.run(side, Separation.of((), side.suc, side.ant, ()))
                es.append(Neg(e))
                e_ok.append(rebuild("NegL", Neg(e), [sl]))       # ~E => B
                e_w.append(rebuild("NegR", Neg(e), [sr]))        # W => ~E
            e1 = big_or_list(es)
            de = Rhd(d, e1)
            e_to_b = _or_left_chain(es, e_ok, b)
            w_to_e = [_or_right_inject(es, k, p) for k, p in enumerate(e_w)]
            prin_l = [f for f, _ in p1] + [de]
            sides_l = [s for _, s in p1] + [e_to_b]
            if plus:
                left = make_rhdp(g1 | {de}, prin_l, diag, lp, sides_l)
                right = make_rhdp(g2, [f for f, _ in p2], de, rp, w_to_e)
            else:
                left = make_rhd(prin_l, diag, lp, sides_l)
                right = make_rhd([f for f, _ in p2], de, rp, w_to_e)
            c = Neg(de)
            return c, rebuild("NegR", c, [left]), rebuild("NegL", c, [right])
        es, y_to_e, e_to_b = [], [], []
        for f, side in p1:
            e, sl, sr = self.run(side, Separation.of(side.ant, (), (), side.suc))
            es.append(e)
            y_to_e.append(sl)
            e_to_b.append(sr)
        e1 = big_or_list(es)
        nd = Neg(d)
        c = Rhd(nd, e1)
        y_sides = [_or_right_inject(es, k, p) for k, p in enumerate(y_to_e)]
        e_side = _or_left_chain(es, e_to_b, b)
        lp2 = rebuild("NegL", nd, [lp])
        rp2 = rebuild("NegR", nd, [rp])
        prin_r = [f for f, _ in p2] + [c]
        sides_r = [s for _, s in p2] + [e_side]
        if plus:
            left = make_rhdp(g1, [f for f, _ in p1], c, lp2, y_sides)
            right = make_rhdp(g2 | {c}, prin_r, diag, rp2, sides_r)
        else:
            left = make_rhd([f for f, _ in p1], c, lp2, y_sides)
            right = make_rhd(prin_r, diag, rp2, sides_r)
        return c, left, right

    def _box(self, node: Node, sep: Separation):
        d_box = node.diagonal
        body = unbox(d_box)
        box_left = d_box in sep.left_suc
        b1 = {f for f in node.ant if f in sep.left_ant}
        b2 = set(node.ant) - b1
        prem = node.premises[0].seq
        la, ra = set(), set()
        inner1 = {unbox(f) for f in b1}
        for f in prem.ant:
            if f in sep.left_ant:
                la.add(f)
            elif f in sep.right_ant:
                ra.add(f)
            elif f in inner1 or (f == d_box and box_left):
                la.add(f)
            else:
                ra.add(f)
        if box_left:
            sub = Separation.of(la, prem.suc, ra, ())
        else:
            sub = Separation.of(la, (), ra, prem.suc)
        d, lp, rp = self.run(node.premises[0], sub)
        if box_left:
            nd = Neg(d)
            bnd = box(nd)
            c = Neg(bnd)
            lstep = rebuild("NegL", nd, [lp])
            left = make_box_rule(b1 | {bnd}, body, lstep)
            left = rebuild("NegR", c, [left])
            rstep = rebuild("NegR", nd, [rp])
            right = make_box_rule(b2, nd, rstep)
            right = rebuild("NegL", c, [right])
            return c, left, right
        c = box(d)
        left = make_box_rule(b1, d, lp)
        right = make_box_rule(b2 | {c}, body, rp)
        return c, left, right


def _pick(a: Node, b: Node) -> Node:
    return a if node_count(a) <= node_count(b) else b


def maehara(derivation: Derivation, sep: Separation) -> Interpolant:
    """Interpolant for a separation of the endsequent of a cut-free derivation."""
    if not is_cut_free(derivation):
        raise ValueError("derivation must be cut-free")
    sep.validate(derivation.conclusion)
    c, lp, rp = _Maehara(derivation.system).run(derivation.root, sep)
    lp = weaken_to(lp, sep.left_ant, sep.left_suc | {c})
    rp = weaken_to(rp, sep.right_ant | {c}, sep.right_suc)
    return Interpolant(c, Derivation(lp, derivation.system), Derivation(rp, derivation.system), sep)


def interpolate(a: Formula, b: Formula, budget: int = 200_000) -> Union[Interpolant, NotProvable]:
    """Craig interpolant of a provable implication ``a -> b``."""
    verdict = decide(Imp(a, b), budget)
    if not verdict:
        return verdict
    ea, eb = expand_box(a), expand_box(b)
    goal = Sequent(frozenset({ea}), frozenset({eb}))
    proof = prove(ILMPS, goal, budget)
    if not proof:
        raise AssertionError("implication provable but sequent is not")
    return maehara(proof.derivation, Separation.of([ea], (), (), [eb]))
