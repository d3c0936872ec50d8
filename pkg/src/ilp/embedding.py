"""Translation of the ``|>`` language into the fusion of GL and K.

``[0]`` is the provability box and ``[1]`` a plain K box.  An interpretability
formula ``A |> B`` becomes ``[0](A -> <1>B)``.  A simplified model with no
S-chain of length two is, read verbatim, a bimodal model (R0 = R, R1 = S)
validating ``[1][1]false``, and satisfaction is preserved by the translation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

from ilp.semantics import (
    BimodalModel, ModelError, SimplifiedModel, _bits, _is_canonical, _names, check_dagger,
    extension, frame_validates, strict_orders,
)
from ilp.syntax import (
    BOT, TOP, And, Bot, Box, BoxK, Formula, Imp, Neg, Or, Rhd, Var, dia1, iff, show,
    subformulas, vars_of,
)

DOUBLE_ONE_BOT = BoxK(1, BoxK(1, BOT))


def chi(f: Formula) -> Formula:
    """The translation; boxes go to ``[0]``, ``A |> B`` to ``[0](A -> <1>B)``."""
    memo: dict = {}

    def go(g: Formula) -> Formula:
        hit = memo.get(g)
        if hit is not None:
            return hit
        if isinstance(g, (Var, Bot)):
            out = g
        elif isinstance(g, Neg):
            out = Neg(go(g.sub))
        elif isinstance(g, (And, Or, Imp)):
            out = type(g)(go(g.left), go(g.right))
        elif isinstance(g, Box):
            out = BoxK(0, go(g.sub))
        elif isinstance(g, Rhd):
            out = BoxK(0, Imp(go(g.left), dia1(go(g.right))))
        else:
            raise TypeError(f"not a |>-language formula: {g!r}")
        memo[g] = out
        return out

    return go(f)


def as_bimodal(model: SimplifiedModel) -> BimodalModel:
    """The same triple read as a bimodal model."""
    return BimodalModel(model.worlds, model.R, model.S, model.valuation)


@dataclass(frozen=True)
class Transfer:
    model: BimodalModel
    world: str
    formula: Formula
    translated: Formula


def transfer(model: SimplifiedModel, world: str, a: Formula) -> Transfer:
    """Move a countermodel of ``a`` to a bimodal countermodel of ``chi(a)``.

    Raises ModelError if ``a`` holds at ``world``, if the frame has an
    S-chain of length two, or if the bimodal side disagrees.
    """
    if not check_dagger(model):
        raise ModelError("the frame has an S-chain of length two")
    if world not in model.index:
        raise ModelError(f"unknown world {world}")
    i = model.index[world]
    if extension(model, a) >> i & 1:
        raise ModelError(f"{show(a)} holds at {world}")
    bm = as_bimodal(model)
    t = chi(a)
    if extension(bm, t) >> i & 1:
        raise AssertionError("translated formula holds on the transferred model")
    return Transfer(bm, world, a, t)


def correspondence_failures(model: SimplifiedModel, formulas: Iterable[Formula]) -> list:
    """Formulas (with every subformula) whose extension changes under translation."""
    bm = as_bimodal(model)
    m1, m2 = {}, {}
    bad = []
    seen = set()
    for f in formulas:
        for g in subformulas(f):
            if g in seen:
                continue
            seen.add(g)
            if extension(model, g, memo=m1) != extension(bm, chi(g), memo=m2):
                bad.append(g)
    return bad


def double_one_valid(model: SimplifiedModel) -> bool:
    """``[1][1]false`` on the transferred frame."""
    return frame_validates(as_bimodal(model), DOUBLE_ONE_BOT)


# ------------------------------------------------------- soundness sampling

def bimodal_frames(n: int, canonical: bool = True) -> Iterator[BimodalModel]:
    """Bimodal frames on ``n`` worlds with R0 a strict order and any R1."""
    names = _names(n)
    all_pairs = [(i, j) for i in range(n) for j in range(n)]
    for r in strict_orders(n):
        for bits in product((0, 1), repeat=len(all_pairs)):
            s = frozenset(p for p, b in zip(all_pairs, bits) if b)
            if canonical and not _is_canonical(n, (r, s)):
                continue
            yield BimodalModel(names, [(names[a], names[b]) for a, b in r],
                               [(names[a], names[b]) for a, b in s])


@dataclass(frozen=True)
class SoundnessReport:
    checked: int
    frames: int
    failures: tuple = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


def check_translation_soundness(corpus: Iterable[Formula], max_worlds: int = 3) -> SoundnessReport:
    """Translations of the given theorems hold on every small bimodal frame.

    A necessary condition for provability in the fusion logic; frames are
    enumerated up to isomorphism with at most ``max_worlds`` worlds.
    """
    frames = [fr for n in range(1, max_worlds + 1) for fr in bimodal_frames(n)]
    failures = []
    items = list(corpus)
    for f in items:
        t = chi(f)
        for fr in frames:
            if not frame_validates(fr, t):
                failures.append((f, fr))
                break
    return SoundnessReport(len(items), len(frames), tuple(failures))


# ------------------------------------------------- failure of fixed points

def two_world_frame() -> BimodalModel:
    """Worlds x, y with x R0 y and y R1 x."""
    return BimodalModel(("x", "y"), [("x", "y")], [("y", "x")])


def fpp_equation(f: Formula) -> Formula:
    """``F <-> [0]~[1]F``."""
    return iff(f, BoxK(0, Neg(BoxK(1, f))))


def fails_at_x(f: Formula) -> bool:
    """The equation for ``f`` is false at x under every valuation."""
    fr = two_world_frame()
    eq = fpp_equation(f)
    vs = sorted(vars_of(eq))
    for masks in product(range(4), repeat=len(vs)):
        if extension(fr, eq, env=dict(zip(vs, masks))) & 1:
            return False
    return True


def random_biformula(rng: random.Random, depth: int,
                     variables: Sequence[str] = ("p", "q")) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice([Var(v) for v in variables] + [BOT, TOP])
    op = rng.choice(["neg", "and", "or", "imp", "box0", "box1"])
    sub = lambda: random_biformula(rng, depth - 1, variables)
    if op == "neg":
        return Neg(sub())
    if op in ("box0", "box1"):
        return BoxK(int(op[-1]), sub())
    return {"and": And, "or": Or, "imp": Imp}[op](sub(), sub())


def fpp_failure_sample(n: int = 50, seed: int = 0, depth: int = 4,
                       variables: Sequence[str] = ("p", "q")) -> tuple[list, list]:
    """(sampled formulas, those for which the equation does not fail at x)."""
    rng = random.Random(seed)
    fs = [random_biformula(rng, depth, variables) for _ in range(n)]
    return fs, [f for f in fs if not fails_at_x(f)]
