"""Countermodels from maximal consistent sets.

The pipeline runs in three stages:

1. ``build_canonical``: a finite Veltman model whose worlds are pairs (Γ, B).
   Γ is a Φ-maximal consistent set and B a formula of Φ_▷.
2. ``simplify``: unfold that model into R-paths, giving a simplified model
   with no S-chains of length two.
3. ``level_product``: stack degree(A)+1 copies of the simplified model, so
   that S becomes transitive and R ∪ S well-founded.

Every stage is checked: the truth lemma at the canonical stage, and
agreement with the previous stage for the later two.

Consistency of a Φ-set is decided by the proof search of ``ilp.search``.
The model keeps only the maximal consistent sets needed as witnesses,
starting from one that contains ∼A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from ilp.calculus import ILMPS, Sequent
from ilp.search import DEFAULT_BUDGET, decide, prover
from ilp.semantics import (
    SimplifiedModel, VeltmanModel, _bits, check_dagger, check_P_condition, extension,
)
from ilp.syntax import (
    BOT, And, Box, Formula, Imp, Neg, Or, Rhd, Var, big_and, big_or, children, degree,
    expand_box, show, sort_formulas, subformulas, tilde,
)


class CanonicalError(ValueError):
    """The input is a theorem, or a precondition of a stage fails."""


class WitnessError(RuntimeError):
    """No maximal consistent set with the required members was found."""


# ------------------------------------------------------------ adequate sets

def _is_atom(f: Formula) -> bool:
    return isinstance(f, (Var, Box, Rhd))


def _sub_tilde_closure(fs: Iterable[Formula]) -> set:
    out: set = set()
    stack = list(fs)
    while stack:
        f = stack.pop()
        if f in out:
            continue
        out.add(f)
        stack.extend(children(f))
        stack.append(tilde(f))
    return out


def rhd_projection(fs: Iterable[Formula]) -> list:
    """Φ_▷: every argument of a ``|>`` formula in the set."""
    out = set()
    for f in fs:
        if isinstance(f, Rhd):
            out.add(f.left)
            out.add(f.right)
    return sort_formulas(out)


@dataclass(frozen=True)
class AdequateSet:
    formulas: frozenset
    rhd: tuple
    atoms: tuple
    disjunctions: bool = True

    def __len__(self) -> int:
        return len(self.formulas)

    def __contains__(self, f) -> bool:
        return f in self.formulas

    @property
    def rhd_projection(self) -> tuple:
        return self.rhd


def adequate_closure(xs: Iterable[Formula], disjunctions: bool = True) -> AdequateSet:
    """Finite adequate set including ``xs`` (boxes stay primitive).

    The big disjunctions of the last closure condition are restricted to
    right-nested disjunctions of nonempty subsets of Φ_▷ in the fixed formula
    order.  With ``disjunctions=False`` that condition is skipped altogether
    (the lean closure used first by the countermodel pipeline).
    """
    base = _sub_tilde_closure(set(xs) | {Rhd(BOT, BOT)})
    rp = rhd_projection(base)
    extra = set()
    for b in rp:
        extra.add(Box(tilde(b)))
        for c in rp:
            extra.add(Rhd(b, c))
            extra.add(Box(Rhd(b, c)))
        if disjunctions:
            for k in range(1, len(rp) + 1):
                for cs in combinations(rp, k):
                    extra.add(Box(Imp(b, big_or(cs))))
    phi = _sub_tilde_closure(base | extra)
    assert rhd_projection(phi) == rp
    atoms = tuple(sort_formulas(f for f in phi if _is_atom(f)))
    return AdequateSet(frozenset(phi), tuple(rp), atoms, disjunctions)


def adequacy_violations(phi: AdequateSet) -> list[str]:
    """Which closure conditions fail (empty for an adequate set)."""
    fs = phi.formulas
    rp = rhd_projection(fs)
    out = []
    for f in fs:
        if tilde(f) not in fs or any(g not in fs for g in children(f)):
            out.append(f"not closed at {show(f)}")
    if BOT not in rp:
        out.append("false missing from the projection")
    for b in rp:
        if Box(tilde(b)) not in fs:
            out.append(f"[]~{show(b)} missing")
        for c in rp:
            if Rhd(b, c) not in fs:
                out.append(f"{show(Rhd(b, c))} missing")
    for f in fs:
        if isinstance(f, Rhd) and Box(f) not in fs:
            out.append(f"[]({show(f)}) missing")
    if phi.disjunctions:
        for b in rp:
            for k in range(1, len(rp) + 1):
                for cs in combinations(rp, k):
                    if Box(Imp(b, big_or(cs))) not in fs:
                        out.append("disjunction box missing")
    return out


# ---------------------------------------------------------------- consistency

class Consistency:
    """Consistency of Φ-sets through the sequent prover.

    A set of atom literals is inconsistent exactly when a single modal rule
    instance closes it: some negated ``|>``-atom serves as the diagonal, with
    the positive ``|>``-atoms as context and every usable principal.  Sets with
    compound members go to the prover as a whole.
    """

    def __init__(self, budget: int = DEFAULT_BUDGET):
        self.prover = prover(ILMPS)
        self.budget = budget
        self._closes: dict = {}
        self.calls = 0

    def closes(self, pos: frozenset, d: Formula) -> bool:
        key = (pos, d)
        hit = self._closes.get(key)
        if hit is None:
            self.calls += 1
            pr = self.prover
            xs = {x.left for x in pos
                  if pr.provable(Sequent(frozenset({x.right}), frozenset({d.right})), self.budget)}
            prem = Sequent(pos | {d, d.left}, frozenset(xs))
            hit = pr.provable(prem, self.budget)
            self._closes[key] = hit
        return hit

    def literals_consistent(self, pos: Iterable[Formula], neg: Iterable[Formula]) -> bool:
        p = frozenset(expand_box(f) for f in pos if not isinstance(f, Var))
        vp = {f for f in pos if isinstance(f, Var)}
        if any(f in vp for f in neg):
            return False
        n = {expand_box(f) for f in neg if not isinstance(f, Var)}
        if p & n:
            return False
        return not any(self.closes(p, d) for d in sort_formulas(n))

    def set_consistent(self, fs: Iterable[Formula]) -> bool:
        fs = list(fs)
        if all(_is_atom(f) or (isinstance(f, Neg) and _is_atom(f.sub)) for f in fs):
            pos = [f for f in fs if _is_atom(f)]
            neg = [f.sub for f in fs if isinstance(f, Neg)]
            return self.literals_consistent(pos, neg)
        seq = Sequent(frozenset(expand_box(f) for f in fs), frozenset())
        self.calls += 1
        return not self.prover.provable(seq, self.budget)


def consistent_by_decide(fs: Iterable[Formula]) -> bool:
    """Reference check: the conjunction does not prove ``false``."""
    return not decide(Imp(big_and(sort_formulas(fs)), BOT))


# ----------------------------------------------------------- maximal sets

def _eval3(f: Formula, val: dict) -> Optional[bool]:
    if _is_atom(f):
        return val.get(f)
    if f == BOT:
        return False
    if isinstance(f, Neg):
        v = _eval3(f.sub, val)
        return None if v is None else not v
    a = _eval3(f.left, val)
    if isinstance(f, And):
        if a is False:
            return False
        b = _eval3(f.right, val)
        if b is False:
            return False
        return True if a and b else None
    if isinstance(f, Or):
        if a is True:
            return True
        b = _eval3(f.right, val)
        if b is True:
            return True
        return False if a is False and b is False else None
    if isinstance(f, Imp):
        if a is False:
            return True
        b = _eval3(f.right, val)
        if b is True:
            return True
        return False if a is True and b is False else None
    raise TypeError(f"unexpected formula {f!r}")


@dataclass(frozen=True)
class MaxConsSet:
    """A Φ-maximal consistent set, stored with the atom assignment behind it."""

    members: frozenset
    true_atoms: frozenset
    label: str = field(default="", compare=False)

    def __contains__(self, f) -> bool:
        return f in self.members

    def __iter__(self):
        return iter(sort_formulas(self.members))

    def __len__(self) -> int:
        return len(self.members)


def _members(phi: AdequateSet, true_atoms: frozenset) -> frozenset:
    val = {a: a in true_atoms for a in phi.atoms}
    return frozenset(f for f in phi.formulas if _eval3(f, val))


def extend_to_mcs(phi: AdequateSet, required: Sequence[Formula], cons: Consistency,
                  label: str = "") -> Optional[MaxConsSet]:
    """A Φ-maximal consistent set satisfying every formula in ``required``.

    ``required`` may contain formulas built from Φ-atoms that are not in Φ
    themselves (a disjunction of boxes, say).  Returns None when the
    requirements are inconsistent.
    """
    req = list(required)
    if not cons.set_consistent(req):
        return None
    val: dict = {}
    pos: list = []
    neg: list = []
    # atoms of the requirements first, so the expensive whole-set check retires early
    mentioned = {g for f in req for g in subformulas(f) if _is_atom(g)}
    order = [a for a in phi.atoms if a in mentioned] + [a for a in phi.atoms if a not in mentioned]
    for a in order:
        choice = None
        for v in (True, False):
            val[a] = v
            if any(_eval3(f, val) is False for f in req):
                continue
            p2, n2 = (pos + [a], neg) if v else (pos, neg + [a])
            if not cons.literals_consistent(p2, n2):
                continue
            open_req = [f for f in req if _eval3(f, val) is None]
            lits = p2 + [Neg(x) for x in n2]
            if open_req and not cons.set_consistent(lits + open_req):
                continue
            choice = v
            break
        if choice is None:
            raise AssertionError("consistent set could not be extended")
        val[a] = choice
        (pos if choice else neg).append(a)
    true_atoms = frozenset(pos)
    return MaxConsSet(_members(phi, true_atoms), true_atoms, label)


def max_cons_sets(phi: AdequateSet, cons: Optional[Consistency] = None,
                  limit: int = 100_000) -> list[MaxConsSet]:
    """Every Φ-maximal consistent set (exponential; for small Φ)."""
    cons = cons or Consistency()
    out: list[MaxConsSet] = []

    def go(i: int, pos: list, neg: list) -> None:
        if not cons.literals_consistent(pos, neg):
            return
        if i == len(phi.atoms):
            if len(out) >= limit:
                raise WitnessError("too many maximal consistent sets")
            ta = frozenset(pos)
            out.append(MaxConsSet(_members(phi, ta), ta, f"G{len(out)}"))
            return
        a = phi.atoms[i]
        go(i + 1, pos + [a], neg)
        go(i + 1, pos, neg + [a])

    go(0, [], [])
    return out


# ------------------------------------------------------------------ relations

def boxes(gamma: MaxConsSet) -> list:
    return [f for f in gamma.members if isinstance(f, Box)]


def prec(gamma: MaxConsSet, delta: MaxConsSet) -> bool:
    """Γ ≺ Δ: boxed members of Γ pass to Δ with their bodies, and Δ has a new box."""
    for f in boxes(gamma):
        if f not in delta.members or f.sub not in delta.members:
            return False
    return any(f not in gamma.members for f in boxes(delta))


def prec_C(gamma: MaxConsSet, delta: MaxConsSet, c: Formula) -> bool:
    """Γ ≺_C Δ: Γ ≺ Δ and ∼B ∈ Δ whenever B ▷ C ∈ Γ."""
    if not prec(gamma, delta):
        return False
    return all(tilde(f.left) in delta.members for f in gamma.members
               if isinstance(f, Rhd) and f.right == c)


def _prec_requirements(gamma: MaxConsSet, phi: AdequateSet) -> list:
    req = []
    for f in sort_formulas(boxes(gamma)):
        req.append(f)
        req.append(f.sub)
    new_boxes = [a for a in phi.atoms if isinstance(a, Box) and a not in gamma.members]
    req.append(big_or(new_boxes))
    return req


# ------------------------------------------------------------ canonical model

@dataclass
class CanonicalModel:
    """Canonical Veltman model together with the sets behind its worlds."""

    model: VeltmanModel
    root: str
    phi: AdequateSet
    sets: list
    world_of: dict          # world name -> (set index, formula)
    stats: dict

    def gamma(self, world: str) -> MaxConsSet:
        return self.sets[self.world_of[world][0]]

    def world(self, name: str) -> "CanonicalWorld":
        i, b = self.world_of[name]
        return CanonicalWorld(self.sets[i], b)


@dataclass(frozen=True)
class CanonicalWorld:
    gamma: MaxConsSet
    formula: Formula


class _Builder:
    def __init__(self, a: Formula, phi: AdequateSet, cons: Consistency, max_worlds: int):
        self.a = a
        self.phi = phi
        self.cons = cons
        self.max_worlds = max_worlds
        self.sets: list[MaxConsSet] = []
        self.set_index: dict = {}
        self.worlds: list = []           # (set index, formula)
        self.world_index: dict = {}
        self._prec: dict = {}
        self._theta: dict = {}

    def add_set(self, g: MaxConsSet) -> int:
        i = self.set_index.get(g.true_atoms)
        if i is None:
            i = len(self.sets)
            self.sets.append(MaxConsSet(g.members, g.true_atoms, f"G{i}"))
            self.set_index[g.true_atoms] = i
        return i

    def add_world(self, i: int, b: Formula) -> None:
        if (i, b) not in self.world_index:
            if len(self.worlds) >= self.max_worlds:
                raise WitnessError(f"more than {self.max_worlds} canonical worlds")
            self.world_index[(i, b)] = len(self.worlds)
            self.worlds.append((i, b))

    def prec(self, i: int, j: int) -> bool:
        key = (i, j)
        v = self._prec.get(key)
        if v is None:
            v = prec(self.sets[i], self.sets[j])
            self._prec[key] = v
        return v

    def find(self, required: list, accept=None) -> int:
        for i, g in enumerate(self.sets):
            if all(_eval3(f, {a: a in g.true_atoms for a in self.phi.atoms}) for f in required):
                if accept is None or accept(i):
                    return i
        g = extend_to_mcs(self.phi, required, self.cons)
        if g is None:
            raise WitnessError("required set is inconsistent: "
                               + ", ".join(show(f) for f in required[:6]))
        return self.add_set(g)

    def theta(self, d: Formula, e: Optional[Formula]) -> int:
        key = (d, e)
        if key not in self._theta:
            req = [d] if e is None else [d, tilde(e)]
            self._theta[key] = self.find(req)
        return self._theta[key]

    def run(self) -> None:
        phi = self.phi
        g0 = self.find([tilde(self.a)])
        self.add_world(g0, BOT)
        rhd_atoms = [f for f in phi.atoms if isinstance(f, Rhd)]
        box_atoms = [f for f in phi.atoms if isinstance(f, Box)]
        done_sets: set = set()
        changed = True
        while changed:
            changed = False
            n_sets = len(self.sets)
            for i in range(n_sets):
                g = self.sets[i]
                if i not in done_sets:
                    done_sets.add(i)
                    changed = True
                    base = _prec_requirements(g, phi)
                    for f in box_atoms:
                        if f not in g.members:
                            j = self.find(base[:-1] + [tilde(f.sub), f])
                            self.add_world(j, BOT)
                    for f in rhd_atoms:
                        if f not in g.members:
                            req = list(base) + [f.left] + [
                                tilde(h.left) for h in sort_formulas(g.members)
                                if isinstance(h, Rhd) and h.right == f.right]
                            j = self.find(req, accept=lambda j, i=i: self.prec(i, j))
                            self.add_world(j, f.right)
            # existence witnesses for interpretations true at some world
            for (i, _b) in list(self.worlds):
                g = self.sets[i]
                for f in rhd_atoms:
                    if f not in g.members:
                        continue
                    for (j, e) in list(self.worlds):
                        if self.prec(i, j) and f.left in self.sets[j].members:
                            if prec_C(g, self.sets[j], e):
                                t = self.theta(f.right, e)
                            else:
                                t = self.theta(f.right, None)
                            if not any(k == t for k, _ in self.worlds):
                                self.add_world(t, BOT)
                                changed = True
            for k in range(len(self.sets)):
                if not any(i == k for i, _ in self.worlds):
                    self.add_world(k, BOT)
                    changed = True

    def model(self) -> CanonicalModel:
        names = [f"w{k}" for k in range(len(self.worlds))]
        n = len(names)
        sets = self.sets
        R = [(names[x], names[y]) for x, (i, _) in enumerate(self.worlds)
             for y, (j, _) in enumerate(self.worlds) if self.prec(i, j)]
        tilde_mask: dict = {}

        def mask_with(f: Formula) -> int:
            m = tilde_mask.get(f)
            if m is None:
                m = 0
                for y, (j, _) in enumerate(self.worlds):
                    if f in sets[j].members:
                        m |= 1 << y
                tilde_mask[f] = m
            return m

        S: dict = {}
        for w, (i, _b) in enumerate(self.worlds):
            pairs = []
            for x, (j, c) in enumerate(self.worlds):
                if not self.prec(i, j):
                    continue
                if prec_C(sets[i], sets[j], c):
                    targets = mask_with(tilde(c))
                else:
                    targets = (1 << n) - 1
                pairs.extend((names[x], names[y]) for y in _bits(targets))
            if pairs:
                S[names[w]] = pairs
        variables = sorted({f.name for f in self.phi.formulas if isinstance(f, Var)})
        val = {p: [names[x] for x, (i, _) in enumerate(self.worlds) if Var(p) in sets[i].members]
               for p in variables}
        model = VeltmanModel(names, R, S, val)
        world_of = {names[x]: w for x, w in enumerate(self.worlds)}
        stats = {"phi": len(self.phi), "phi_rhd": len(self.phi.rhd), "atoms": len(self.phi.atoms),
                 "sets": len(sets), "worlds": n, "consistency_calls": self.cons.calls,
                 "disjunctions": self.phi.disjunctions}
        return CanonicalModel(model, names[0], self.phi, list(sets), world_of, stats)


def truth_lemma_failures(cm: CanonicalModel, limit: int = 10) -> list:
    """Pairs (world, formula) where evaluation and membership disagree."""
    out = []
    memo: dict = {}
    for f in sort_formulas(cm.phi.formulas):
        ext = extension(cm.model, f, memo=memo)
        for x, w in enumerate(cm.model.worlds):
            if bool(ext >> x & 1) != (f in cm.gamma(w).members):
                out.append((w, f))
                if len(out) >= limit:
                    return out
    return out


def witness_fact_failures(cm: CanonicalModel, cons: Optional[Consistency] = None) -> list:
    """Check the three witness facts behind the truth lemma on the built family.

    * transitivity: Γ ≺ Δ ≺_C Θ implies Γ ≺_C Θ, over all triples of sets;
    * for C |> D ∉ Γ some set Δ of the family has C ∈ Δ and Γ ≺_D Δ;
    * for C |> D ∈ Γ, Γ ≺_E Δ and C ∈ Δ, the pair {D, ∼E} is consistent
      (so some Φ-maximal consistent set contains both).
    """
    cons = cons or Consistency()
    sets = cm.sets
    rp = cm.phi.rhd
    out = []
    pr = {(i, j): prec(g, h) for i, g in enumerate(sets) for j, h in enumerate(sets)}
    for i, g in enumerate(sets):
        for j, h in enumerate(sets):
            if not pr[i, j]:
                continue
            for k, t in enumerate(sets):
                for c in rp:
                    if prec_C(h, t, c) and not prec_C(g, t, c):
                        out.append(("transitivity", i, j, k, c))
    for i, g in enumerate(sets):
        for c in rp:
            for d in rp:
                f = Rhd(c, d)
                if f in g.members:
                    for j, h in enumerate(sets):
                        if c in h.members:
                            for e in rp:
                                if prec_C(g, h, e) and not cons.set_consistent([d, tilde(e)]):
                                    out.append(("existence", i, j, f, e))
                elif not any(c in h.members and prec_C(g, h, d) for h in sets):
                    out.append(("witness", i, f))
    return out


def build_canonical(a: Formula, disjunctions: bool = True, max_worlds: int = 2000,
                    cons: Optional[Consistency] = None, check: bool = True) -> CanonicalModel:
    """Canonical countermodel for a non-theorem ``a``; the root falsifies ``a``.

    With ``check`` the truth lemma, the frame condition for persistence and
    the falsity of ``a`` at the root are verified before returning.
    """
    cons = cons or Consistency()
    if decide(a):
        raise CanonicalError(f"{show(a)} is a theorem")
    phi = adequate_closure([tilde(a)], disjunctions)
    b = _Builder(a, phi, cons, max_worlds)
    b.run()
    cm = b.model()
    if check:
        bad = truth_lemma_failures(cm)
        if bad:
            raise WitnessError("truth lemma fails at "
                               + ", ".join(f"{w}: {show(f)}" for w, f in bad[:3]))
        if not check_P_condition(cm.model):
            raise AssertionError("canonical frame violates the persistence condition")
        if extension(cm.model, a) >> 0 & 1:
            raise AssertionError("root does not falsify the formula")
    return cm


# ------------------------------------------------------------------ unfolding

@dataclass
class Unfolding:
    model: SimplifiedModel
    root: str
    path_of: dict            # world name -> tuple of original worlds


def simplify(model: VeltmanModel, w0: str, max_paths: int = 200_000) -> Unfolding:
    """Unfold a persistence frame into R-paths with one relation S'.

    ``<x1..xn> S' <y>`` iff ``n > 1`` and ``x_n S_{x_{n-1}} y``.
    """
    if not check_P_condition(model):
        raise CanonicalError("the frame does not satisfy the persistence condition")
    if w0 not in model.index:
        raise CanonicalError(f"unknown world {w0}")
    idx = model.index
    succ = model._R
    fam = model._S
    paths: list = []
    stack = [(i,) for i in range(len(model.worlds))]
    while stack:
        p = stack.pop()
        paths.append(p)
        if len(paths) > max_paths:
            raise CanonicalError("too many paths")
        for j in _bits(succ[p[-1]]):
            stack.append(p + (j,))
    paths.sort(key=lambda p: (p[0] != idx[w0], len(p), p))
    names = [".".join(model.worlds[i] for i in p) for p in paths]
    by_path = {p: k for k, p in enumerate(paths)}
    R = []
    for k, p in enumerate(paths):
        # proper extensions of p are exactly the longer paths with prefix p
        stack2 = [p + (j,) for j in _bits(succ[p[-1]])]
        while stack2:
            q = stack2.pop()
            R.append((names[k], names[by_path[q]]))
            stack2.extend(q + (j,) for j in _bits(succ[q[-1]]))
    S = []
    for k, p in enumerate(paths):
        if len(p) > 1:
            for y in _bits(fam.get((p[-2], p[-1]), 0)):
                S.append((names[k], names[by_path[(y,)]]))
    val = {v: [names[k] for k, p in enumerate(paths) if model.worlds[p[-1]] in ws]
           for v, ws in model.valuation.items()}
    sm = SimplifiedModel(names, R, S, val)
    return Unfolding(sm, names[0], {names[k]: tuple(model.worlds[i] for i in p)
                                    for k, p in enumerate(paths)})


def unfolding_agrees(model: VeltmanModel, unf: Unfolding, formulas: Iterable[Formula]) -> bool:
    """Each path satisfies exactly what its last world satisfies."""
    m1, m2 = {}, {}
    for f in formulas:
        e1 = extension(model, f, memo=m1)
        e2 = extension(unf.model, f, memo=m2)
        for k, w in enumerate(unf.model.worlds):
            last = unf.path_of[w][-1]
            if bool(e2 >> k & 1) != bool(e1 >> model.index[last] & 1):
                return False
    return True


# -------------------------------------------------------------- level product

@dataclass
class LevelProduct:
    model: SimplifiedModel
    level_of: dict           # world name -> (original world, level)
    top: int

    def world(self, x: str, n: int) -> str:
        return f"{x}@{n}"


def level_product(model: SimplifiedModel, a: Formula) -> LevelProduct:
    """Copies ``0..degree(a)`` of the frame; R stays in a level, S goes down one."""
    if not check_dagger(model):
        raise CanonicalError("the frame has an S-chain of length two")
    top = degree(a)
    name = lambda x, n: f"{x}@{n}"
    ws = [name(x, n) for n in range(top, -1, -1) for x in model.worlds]
    R = [(name(x, n), name(y, n)) for n in range(top + 1) for x, y in model.R]
    S = [(name(x, n), name(y, n - 1)) for n in range(1, top + 1) for x, y in model.S]
    val = {p: [name(x, n) for n in range(top + 1) for x in xs]
           for p, xs in model.valuation.items()}
    sm = SimplifiedModel(ws, R, S, val)
    return LevelProduct(sm, {name(x, n): (x, n) for n in range(top + 1) for x in model.worlds}, top)


def level_agrees(base: SimplifiedModel, lp: LevelProduct, formulas: Iterable[Formula]) -> bool:
    """``(x, n)`` agrees with ``x`` on every formula of degree at most ``n``."""
    m1, m2 = {}, {}
    for f in formulas:
        d = degree(f)
        e1 = extension(base, f, memo=m1)
        e2 = extension(lp.model, f, memo=m2)
        for k, w in enumerate(lp.model.worlds):
            x, n = lp.level_of[w]
            if d <= n and bool(e2 >> k & 1) != bool(e1 >> base.index[x] & 1):
                return False
    return True


# ------------------------------------------------------------------- pipeline

@dataclass
class Countermodel:
    formula: Formula
    stage: str
    model: object
    world: str
    canonical: CanonicalModel
    unfolding: Optional[Unfolding] = None
    levels: Optional[LevelProduct] = None

    @property
    def stats(self) -> dict:
        s = dict(self.canonical.stats)
        if self.unfolding is not None:
            s["paths"] = len(self.unfolding.model.worlds)
        if self.levels is not None:
            s["level_worlds"] = len(self.levels.model.worlds)
        return s


STAGES = ("canonical", "simplified", "level")


def countermodel(a: Formula, stage: str = "simplified", cons: Optional[Consistency] = None,
                 max_worlds: int = 2000) -> Countermodel:
    """Certified countermodel for a non-theorem.

    The lean closure is tried first; when a witness is missing or the truth
    lemma fails on it, the full adequate set is used instead.
    """
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    cons = cons or Consistency()
    try:
        cm = build_canonical(a, disjunctions=False, cons=cons, max_worlds=max_worlds)
    except WitnessError:
        cm = build_canonical(a, disjunctions=True, cons=cons, max_worlds=max_worlds)
    subs = sort_formulas(subformulas(a))
    if stage == "canonical":
        return Countermodel(a, stage, cm.model, cm.root, cm)
    unf = simplify(cm.model, cm.root)
    if not check_dagger(unf.model) or not unfolding_agrees(cm.model, unf, subs):
        raise AssertionError("unfolding does not agree with the canonical model")
    if extension(unf.model, a) >> 0 & 1:
        raise AssertionError("unfolded root does not falsify the formula")
    if stage == "simplified":
        return Countermodel(a, stage, unf.model, unf.root, cm, unf)
    lp = level_product(unf.model, a)
    if not level_agrees(unf.model, lp, subs):
        raise AssertionError("level product does not agree with its base")
    root = lp.world(unf.root, lp.top)
    if extension(lp.model, a) >> lp.model.index[root] & 1:
        raise AssertionError("level product root does not falsify the formula")
    return Countermodel(a, stage, lp.model, root, cm, unf, lp)
