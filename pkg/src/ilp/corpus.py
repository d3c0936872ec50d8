"""Formula enumerators, axiom-scheme instances and seeded random generators."""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import product
from typing import Callable, Iterator, Sequence

from ilp.syntax import (
    BOT, TOP, And, Box, Formula, Imp, Neg, Or, Rhd, Var, diamond, iff, is_left_modalized,
    substitute,
)

UNARY = (Neg, Box)
BINARY = (And, Or, Imp, Rhd)


@lru_cache(maxsize=None)
def formulas_of_size(n: int, variables: tuple = ("p",), constants: bool = True) -> tuple:
    """All formulas with exactly ``n`` constructor nodes, in a fixed order."""
    if n <= 0:
        return ()
    if n == 1:
        leaves = [Var(v) for v in variables]
        return tuple(leaves + ([BOT] if constants else []))
    out = []
    for u in UNARY:
        out.extend(u(f) for f in formulas_of_size(n - 1, variables, constants))
    for b in BINARY:
        for k in range(1, n - 1):
            for f in formulas_of_size(k, variables, constants):
                for g in formulas_of_size(n - 1 - k, variables, constants):
                    out.append(b(f, g))
    return tuple(out)


def formulas_up_to(n: int, variables: Sequence[str] = ("p",)) -> Iterator[Formula]:
    for k in range(1, n + 1):
        yield from formulas_of_size(k, tuple(variables))


# ------------------------------------------------------------------ schemes

Scheme = Callable[..., Formula]

SCHEMES: dict[str, tuple[int, Scheme]] = {
    "K": (2, lambda a, b: Imp(Box(Imp(a, b)), Imp(Box(a), Box(b)))),
    "Lob": (1, lambda a: Imp(Box(Imp(Box(a), a)), Box(a))),
    "J1": (2, lambda a, b: Imp(Box(Imp(a, b)), Rhd(a, b))),
    "J2": (3, lambda a, b, c: Imp(And(Rhd(a, b), Rhd(b, c)), Rhd(a, c))),
    "J3": (3, lambda a, b, c: Imp(And(Rhd(a, c), Rhd(b, c)), Rhd(Or(a, b), c))),
    "J4": (2, lambda a, b: Imp(Rhd(a, b), Imp(diamond(a), diamond(b)))),
    "J5": (1, lambda a: Rhd(diamond(a), a)),
    "J6": (1, lambda a: iff(Box(a), Rhd(Neg(a), BOT))),
    "J6l": (1, lambda a: Imp(Box(a), Rhd(Neg(a), BOT))),
    "J6r": (1, lambda a: Imp(Rhd(Neg(a), BOT), Box(a))),
    "J2+": (3, lambda a, b, c: Imp(And(Rhd(a, Or(b, c)), Rhd(b, c)), Rhd(a, c))),
    "J4+": (3, lambda a, b, c: Imp(Box(Imp(a, b)), Imp(Rhd(c, a), Rhd(c, b)))),
    "E2": (3, lambda a, b, c: Imp(Box(iff(a, b)), iff(Rhd(a, c), Rhd(b, c)))),
    "E2imp": (3, lambda a, b, c: Imp(Box(Imp(a, b)), Imp(Rhd(b, c), Rhd(a, c)))),
    "P": (2, lambda a, b: Imp(Rhd(a, b), Box(Rhd(a, b)))),
}

DERIVABLE = ("K", "Lob", "J3", "J6l", "J6r", "J6", "P", "E2", "E2imp")
NOT_DERIVABLE = ("J1", "J2", "J4", "J5", "J2+", "J4+")


def _size_tuples(k: int, total: int) -> Iterator[tuple]:
    if k == 0:
        if total >= 0:
            yield ()
        return
    for first in range(1, total - (k - 1) + 1):
        for rest in _size_tuples(k - 1, total - first):
            yield (first,) + rest


def instances(scheme: str, max_total: int = 4, variables: Sequence[str] = ("p", "q")) -> Iterator[Formula]:
    """Instances whose substituted formulas have total size at most ``max_total``."""
    arity, build = SCHEMES[scheme]
    seen = set()
    for sizes in _size_tuples(arity, max_total):
        pools = [formulas_of_size(s, tuple(variables)) for s in sizes]
        for args in product(*pools):
            f = build(*args)
            if f not in seen:
                seen.add(f)
                yield f


def substitution_instances(max_total: int = 4, variables: Sequence[str] = ("p", "q"),
                           hole: str = "x") -> Iterator[Formula]:
    """Instances of ``[](A <-> B) -> (C(A) <-> C(B))`` with ``hole`` left-modalized in C."""
    seen = set()
    names = tuple(variables) + (hole,)
    for c_size in range(2, max_total - 1):
        contexts = [c for c in formulas_of_size(c_size, names)
                    if is_left_modalized(c, hole) and any(
                        isinstance(g, Var) and g.name == hole for g in _nodes(c))]
        for ab in range(2, max_total - c_size + 1):
            for sa in range(1, ab):
                for a in formulas_of_size(sa, tuple(variables)):
                    for b in formulas_of_size(ab - sa, tuple(variables)):
                        for c in contexts:
                            f = Imp(Box(iff(a, b)), iff(substitute(c, hole, a), substitute(c, hole, b)))
                            if f not in seen:
                                seen.add(f)
                                yield f


def _nodes(f: Formula):
    from ilp.syntax import _walk
    return _walk(f)


# ------------------------------------------------------------ tautologies

def _bool_eval(f: Formula, env: dict) -> bool:
    if f in env:
        return env[f]
    if f == BOT:
        return False
    if isinstance(f, Neg):
        return not _bool_eval(f.sub, env)
    if isinstance(f, And):
        return _bool_eval(f.left, env) and _bool_eval(f.right, env)
    if isinstance(f, Or):
        return _bool_eval(f.left, env) or _bool_eval(f.right, env)
    if isinstance(f, Imp):
        return (not _bool_eval(f.left, env)) or _bool_eval(f.right, env)
    raise KeyError(f)


def _prop_atoms(f: Formula, acc: set) -> None:
    if isinstance(f, (Var, Box, Rhd)):
        acc.add(f)
    elif f != BOT:
        from ilp.syntax import children
        for g in children(f):
            _prop_atoms(g, acc)


def is_tautology(f: Formula) -> bool:
    """Truth-table check treating modal subformulas as atoms."""
    atoms: set = set()
    _prop_atoms(f, atoms)
    atoms_l = sorted(atoms, key=repr)
    for bits in product((False, True), repeat=len(atoms_l)):
        if not _bool_eval(f, dict(zip(atoms_l, bits))):
            return False
    return True


def tautologies(max_size: int = 6, variables: Sequence[str] = ("p", "q")) -> Iterator[Formula]:
    for f in formulas_up_to(max_size, variables):
        if is_tautology(f):
            yield f


# ----------------------------------------------------------------- random

def random_formula(rng: random.Random, depth: int, variables: Sequence[str],
                   allow_rhd: bool = True) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        leaves = [Var(v) for v in variables] + [BOT, TOP]
        return rng.choice(leaves)
    ops = ["neg", "and", "or", "imp", "box"] + (["rhd"] if allow_rhd else [])
    op = rng.choice(ops)
    sub = lambda: random_formula(rng, depth - 1, variables, allow_rhd)
    if op == "neg":
        return Neg(sub())
    if op == "box":
        return Box(sub())
    a, b = sub(), sub()
    return {"and": And, "or": Or, "imp": Imp, "rhd": Rhd}[op](a, b)


def random_left_modalized(rng: random.Random, depth: int, p: str = "p",
                          extra: Sequence[str] = ("q", "r")) -> Formula:
    """A random formula of depth at most ``depth`` in which ``p`` is left-modalized."""

    def gen(d: int, mode: str) -> Formula:
        # mode: "bare" (p forbidden), "free" (p allowed), "none" (p forbidden anywhere below)
        leaves = [Var(v) for v in extra] + [BOT, TOP]
        if mode == "free":
            leaves = leaves + [Var(p)] * 2
        if d <= 0 or rng.random() < 0.2:
            return rng.choice(leaves)
        op = rng.choice(["neg", "and", "or", "imp", "box", "rhd", "rhd"])
        if op == "neg":
            return Neg(gen(d - 1, mode))
        if op == "box":
            return Box(gen(d - 1, "none" if mode == "none" else "free"))
        if op == "rhd":
            inner = "none" if mode == "none" else "free"
            return Rhd(gen(d - 1, inner), gen(d - 1, "none"))
        ctor = {"and": And, "or": Or, "imp": Imp}[op]
        return ctor(gen(d - 1, mode), gen(d - 1, mode))

    for _ in range(1000):
        f = gen(depth, "bare")
        if any(isinstance(g, Var) and g.name == p for g in _nodes(f)):
            assert is_left_modalized(f, p)
            return f
    raise RuntimeError("could not generate a formula containing the variable")


def variable_free(max_size: int) -> Iterator[Formula]:
    for k in range(1, max_size + 1):
        yield from formulas_of_size(k, ())
