"""Finite relational models: Veltman-style frames with a relation family,
simplified frames with a single relation, and bimodal frames.

Worlds are strings.  Evaluation computes extensions as integer bitmasks over
the world order, so checking a formula at every world costs one pass over its
subformulas.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterable, Iterator, Mapping, Optional, Union

import networkx as nx

from ilp.syntax import (
    And, Bot, Box, BoxK, Formula, Imp, Neg, Or, Rhd, Var, children, vars_of,
)

Pair = tuple[str, str]


class ModelError(ValueError):
    """Malformed model or frame."""


# ----------------------------------------------------------- relation helpers

def _masks(worlds: tuple, pairs: Iterable[Pair], index: Mapping[str, int]) -> list[int]:
    out = [0] * len(worlds)
    for a, b in pairs:
        out[index[a]] |= 1 << index[b]
    return out


def _transitive(succ: list[int]) -> bool:
    for i, m in enumerate(succ):
        j = m
        while j:
            low = j & -j
            k = low.bit_length() - 1
            if succ[k] & ~m:
                return False
            j ^= low
    return True


def _acyclic(succ: list[int]) -> bool:
    # Kahn's algorithm on bitmask adjacency
    n = len(succ)
    indeg = [0] * n
    for m in succ:
        j = m
        while j:
            low = j & -j
            indeg[low.bit_length() - 1] += 1
            j ^= low
    stack = [i for i in range(n) if indeg[i] == 0]
    seen = 0
    while stack:
        i = stack.pop()
        seen += 1
        j = succ[i]
        while j:
            low = j & -j
            k = low.bit_length() - 1
            indeg[k] -= 1
            if indeg[k] == 0:
                stack.append(k)
            j ^= low
    return seen == n


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _pairs(pairs: Iterable) -> frozenset:
    return frozenset((str(a), str(b)) for a, b in pairs)


class _Base:
    worlds: tuple
    valuation: Mapping[str, frozenset]

    def _setup(self) -> None:
        if not self.worlds:
            raise ModelError("a frame needs at least one world")
        if len(set(self.worlds)) != len(self.worlds):
            raise ModelError("duplicate world names")
        idx = {w: i for i, w in enumerate(self.worlds)}
        object.__setattr__(self, "_index", idx)
        for p, ws in self.valuation.items():
            bad = set(ws) - set(idx)
            if bad:
                raise ModelError(f"valuation of {p} mentions unknown worlds {sorted(bad)}")

    def _check_pairs(self, name: str, pairs: Iterable[Pair]) -> None:
        for a, b in pairs:
            if a not in self._index or b not in self._index:
                raise ModelError(f"{name} mentions an unknown world in {(a, b)}")

    @property
    def index(self) -> Mapping[str, int]:
        return self._index

    @property
    def all_mask(self) -> int:
        return (1 << len(self.worlds)) - 1

    def var_mask(self, p: str) -> int:
        if p not in self.valuation:
            raise ModelError(f"variable {p} has no valuation")
        m = 0
        for w in self.valuation[p]:
            m |= 1 << self._index[w]
        return m

    def mask_to_worlds(self, m: int) -> frozenset:
        return frozenset(self.worlds[i] for i in _bits(m))


def _freeze_val(valuation: Mapping) -> dict:
    return {str(p): frozenset(map(str, ws)) for p, ws in valuation.items()}


@dataclass(frozen=True, eq=False)
class VeltmanModel(_Base):
    """Frame ``(W, R, {S_w})`` plus valuation; ``S[w]`` is a set of pairs."""

    worlds: tuple
    R: frozenset
    S: Mapping[str, frozenset]
    valuation: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(map(str, self.worlds)))
        object.__setattr__(self, "R", _pairs(self.R))
        object.__setattr__(self, "S", {str(w): _pairs(ps) for w, ps in self.S.items() if ps})
        object.__setattr__(self, "valuation", _freeze_val(self.valuation))
        self._setup()
        self._check_pairs("R", self.R)
        for w, ps in self.S.items():
            if w not in self._index:
                raise ModelError(f"S is indexed by an unknown world {w}")
            self._check_pairs(f"S_{w}", ps)
            for x, _ in ps:
                if (w, x) not in self.R:
                    raise ModelError(f"S_{w} contains a pair from {x}, which is not an R-successor")
        succ = _masks(self.worlds, self.R, self._index)
        if not _transitive(succ) or not _acyclic(succ):
            raise ModelError("R must be transitive and conversely well-founded")
        object.__setattr__(self, "_R", succ)
        fam = {}
        for w, ps in self.S.items():
            i = self._index[w]
            for x, y in ps:
                key = (i, self._index[x])
                fam[key] = fam.get(key, 0) | (1 << self._index[y])
        object.__setattr__(self, "_S", fam)

    def S_of(self, w: str) -> frozenset:
        return self.S.get(w, frozenset())

    def with_valuation(self, valuation: Mapping) -> "VeltmanModel":
        return VeltmanModel(self.worlds, self.R, self.S, valuation)

    def _rhd(self, a: int, b: int) -> int:
        out = 0
        for w in range(len(self.worlds)):
            ok = True
            for x in _bits(self._R[w] & a):
                if not self._S.get((w, x), 0) & b:
                    ok = False
                    break
            if ok:
                out |= 1 << w
        return out

    def __eq__(self, other):
        return (isinstance(other, VeltmanModel) and self.worlds == other.worlds
                and self.R == other.R and self.S == other.S and self.valuation == other.valuation)


@dataclass(frozen=True, eq=False)
class SimplifiedModel(_Base):
    """Frame ``(W, R, S)`` with one unconstrained relation ``S``."""

    worlds: tuple
    R: frozenset
    S: frozenset
    valuation: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(map(str, self.worlds)))
        object.__setattr__(self, "R", _pairs(self.R))
        object.__setattr__(self, "S", _pairs(self.S))
        object.__setattr__(self, "valuation", _freeze_val(self.valuation))
        self._setup()
        self._check_pairs("R", self.R)
        self._check_pairs("S", self.S)
        succ = _masks(self.worlds, self.R, self._index)
        if not _transitive(succ) or not _acyclic(succ):
            raise ModelError("R must be transitive and conversely well-founded")
        object.__setattr__(self, "_R", succ)
        object.__setattr__(self, "_Sm", _masks(self.worlds, self.S, self._index))

    def with_valuation(self, valuation: Mapping) -> "SimplifiedModel":
        return SimplifiedModel(self.worlds, self.R, self.S, valuation)

    def _rhd(self, a: int, b: int, clause: str = "a") -> int:
        out = 0
        if clause == "a":
            good = 0
            for x, m in enumerate(self._Sm):
                if m & b:
                    good |= 1 << x
            for w, m in enumerate(self._R):
                if not (m & a & ~good):
                    out |= 1 << w
            return out
        # clause (b): the witness must also be an R-successor of w
        for w, m in enumerate(self._R):
            if all(self._Sm[x] & b & m for x in _bits(m & a)):
                out |= 1 << w
        return out

    def __eq__(self, other):
        return (isinstance(other, SimplifiedModel) and self.worlds == other.worlds
                and self.R == other.R and self.S == other.S and self.valuation == other.valuation)


@dataclass(frozen=True, eq=False)
class BimodalModel(_Base):
    """Frame ``(W, R0, R1)`` for the fusion of GL (``[0]``) and K (``[1]``)."""

    worlds: tuple
    R0: frozenset
    R1: frozenset
    valuation: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(map(str, self.worlds)))
        object.__setattr__(self, "R0", _pairs(self.R0))
        object.__setattr__(self, "R1", _pairs(self.R1))
        object.__setattr__(self, "valuation", _freeze_val(self.valuation))
        self._setup()
        self._check_pairs("R0", self.R0)
        self._check_pairs("R1", self.R1)
        r0 = _masks(self.worlds, self.R0, self._index)
        if not _transitive(r0) or not _acyclic(r0):
            raise ModelError("R0 must be transitive and conversely well-founded")
        object.__setattr__(self, "_rel", (r0, _masks(self.worlds, self.R1, self._index)))

    def with_valuation(self, valuation: Mapping) -> "BimodalModel":
        return BimodalModel(self.worlds, self.R0, self.R1, valuation)

    def __eq__(self, other):
        return (isinstance(other, BimodalModel) and self.worlds == other.worlds
                and self.R0 == other.R0 and self.R1 == other.R1
                and self.valuation == other.valuation)


Model = Union[VeltmanModel, SimplifiedModel, BimodalModel]


# ------------------------------------------------------------------ evaluation

def _box(succ: list[int], a: int) -> int:
    out = 0
    for w, m in enumerate(succ):
        if not m & ~a:
            out |= 1 << w
    return out


def extension(model: Model, f: Formula, clause: str = "a",
              memo: Optional[dict] = None, env: Optional[Mapping[str, int]] = None) -> int:
    """Bitmask of the worlds where ``f`` holds.

    ``clause="b"`` switches simplified models to the alternative reading of
    interpretability that also requires the witness to be an R-successor of
    the evaluation world.  It is for experiments only; the normative reading
    is ``"a"``.  ``env`` overrides the valuation with variable bitmasks.
    """
    if memo is None:
        memo = {}
    stack = [f]
    full = model.all_mask
    while stack:
        g = stack[-1]
        if g in memo:
            stack.pop()
            continue
        pending = [h for h in children(g) if h not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        if isinstance(g, Var):
            v = env[g.name] if env is not None and g.name in env else model.var_mask(g.name)
        elif isinstance(g, Bot):
            v = 0
        elif isinstance(g, Neg):
            v = full & ~memo[g.sub]
        elif isinstance(g, And):
            v = memo[g.left] & memo[g.right]
        elif isinstance(g, Or):
            v = memo[g.left] | memo[g.right]
        elif isinstance(g, Imp):
            v = (full & ~memo[g.left]) | memo[g.right]
        elif isinstance(g, Box):
            if isinstance(model, BimodalModel):
                raise ModelError("bimodal models interpret [0] and [1], not []")
            v = _box(model._R, memo[g.sub])
        elif isinstance(g, Rhd):
            if isinstance(model, BimodalModel):
                raise ModelError("bimodal models do not interpret |>")
            if isinstance(model, SimplifiedModel):
                v = model._rhd(memo[g.left], memo[g.right], clause)
            else:
                v = model._rhd(memo[g.left], memo[g.right])
        elif isinstance(g, BoxK):
            if not isinstance(model, BimodalModel):
                raise ModelError("[k] needs a bimodal model")
            v = _box(model._rel[g.k], memo[g.sub])
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = v
    return memo[f]


def eval(model: Model, world: str, f: Formula, clause: str = "a") -> bool:  # noqa: A001
    """Truth of ``f`` at ``world``."""
    if world not in model.index:
        raise ModelError(f"unknown world {world}")
    return bool(extension(model, f, clause) >> model.index[world] & 1)


def truth_set(model: Model, f: Formula, clause: str = "a") -> frozenset:
    return model.mask_to_worlds(extension(model, f, clause))


def valuations(model: Model, variables: Iterable[str]) -> Iterator[dict]:
    """Every valuation of ``variables`` over the worlds of ``model``."""
    vs = sorted(variables)
    n = len(model.worlds)
    for masks in product(range(1 << n), repeat=len(vs)):
        yield {p: model.mask_to_worlds(m) for p, m in zip(vs, masks)}


def frame_validates(frame: Model, f: Formula, clause: str = "a") -> bool:
    """True iff ``f`` holds everywhere under every valuation of its variables."""
    return refuting_valuation(frame, f, clause) is None


def refuting_valuation(frame: Model, f: Formula, clause: str = "a") -> Optional[tuple[dict, str]]:
    """First valuation (in a fixed order) and world where ``f`` fails, if any."""
    vs = sorted(vars_of(f))
    full = frame.all_mask
    for masks in product(range(full + 1), repeat=len(vs)):
        env = dict(zip(vs, masks))
        ext = extension(frame, f, clause, env=env)
        if ext != full:
            miss = next(_bits(full & ~ext))
            return {p: frame.mask_to_worlds(m) for p, m in env.items()}, frame.worlds[miss]
    return None


# ------------------------------------------------------------ frame conditions

def check_P_condition(frame: VeltmanModel) -> bool:
    """``w R x R y`` and ``y S_w z`` imply ``y S_x z``."""
    return P_condition_violation(frame) is None


def P_condition_violation(frame: VeltmanModel) -> Optional[tuple]:
    fam = frame._S
    succ = frame._R
    ws = frame.worlds
    for (w, y), zs in sorted(fam.items()):
        for x in _bits(succ[w]):
            if succ[x] >> y & 1:
                missing = zs & ~fam.get((x, y), 0)
                if missing:
                    return (ws[w], ws[x], ws[y], ws[next(_bits(missing))])
    return None


def check_dagger(frame: SimplifiedModel) -> bool:
    """No ``x S y S z``."""
    targets = {y for _, y in frame.S}
    return not any(x in targets for x, _ in frame.S)


def frame_correspondence_P(frame: VeltmanModel, instances: Iterable[Formula]) -> tuple[bool, bool]:
    """(frame condition, validity of every given P-instance); equal when the
    correspondence holds for this frame and family."""
    cond = check_P_condition(frame)
    valid = all(frame_validates(frame, f) for f in instances)
    return cond, valid


# ---------------------------------------------------------------- enumeration

def strict_orders(n: int) -> Iterator[frozenset]:
    """All transitive irreflexive relations on ``range(n)`` (as index pairs)."""
    cand = [(i, j) for i in range(n) for j in range(n) if i != j]
    for bits in product((0, 1), repeat=len(cand)):
        rel = frozenset(p for p, b in zip(cand, bits) if b)
        if any((b, a) in rel for a, b in rel):
            continue
        if all((a, d) in rel for a, b in rel for c, d in rel if b == c):
            yield rel


def _canonical_code(n: int, rels: tuple, perm: tuple) -> tuple:
    return tuple(tuple(sorted((perm[a], perm[b]) for a, b in r)) for r in rels)


def _is_canonical(n: int, rels: tuple) -> bool:
    base = _canonical_code(n, rels, tuple(range(n)))
    return all(_canonical_code(n, rels, p) >= base for p in permutations(range(n)))


def _names(n: int) -> tuple:
    return tuple(f"w{i}" for i in range(n))


def simplified_frames(n: int, canonical: bool = True) -> Iterator[SimplifiedModel]:
    """Simplified frames on ``n`` worlds, one per isomorphism class if ``canonical``."""
    names = _names(n)
    all_pairs = [(i, j) for i in range(n) for j in range(n)]
    for r in strict_orders(n):
        for bits in product((0, 1), repeat=len(all_pairs)):
            s = frozenset(p for p, b in zip(all_pairs, bits) if b)
            if canonical and not _is_canonical(n, (r, s)):
                continue
            yield SimplifiedModel(names, [(names[a], names[b]) for a, b in r],
                                  [(names[a], names[b]) for a, b in s])


def veltman_frames(n: int, canonical: bool = True) -> Iterator[VeltmanModel]:
    """Veltman frames on ``n`` worlds (every admissible S-family)."""
    names = _names(n)
    for r in strict_orders(n):
        slots = [(w, x, y) for w in range(n) for x in range(n) if (w, x) in r for y in range(n)]
        for bits in product((0, 1), repeat=len(slots)):
            fam = frozenset(t for t, b in zip(slots, bits) if b)
            if canonical and not _is_canonical_family(n, r, fam):
                continue
            S: dict = {}
            for w, x, y in fam:
                S.setdefault(names[w], set()).add((names[x], names[y]))
            yield VeltmanModel(names, [(names[a], names[b]) for a, b in r], S)


def _is_canonical_family(n: int, r: frozenset, fam: frozenset) -> bool:
    def code(p):
        return (tuple(sorted((p[a], p[b]) for a, b in r)),
                tuple(sorted((p[w], p[x], p[y]) for w, x, y in fam)))
    base = code(tuple(range(n)))
    return all(code(p) >= base for p in permutations(range(n)))


def countermodel_search(f: Formula, max_worlds: int = 3, clause: str = "a",
                        min_worlds: int = 1) -> Optional[tuple[SimplifiedModel, str]]:
    """Smallest simplified model (up to ``max_worlds``) falsifying ``f`` somewhere.

    ``None`` only means that no countermodel of that size exists.
    """
    for n in range(min_worlds, max_worlds + 1):
        for frame in simplified_frames(n):
            hit = refuting_valuation(frame, f, clause)
            if hit is not None:
                val, w = hit
                return frame.with_valuation(val), w
    return None


# ----------------------------------------------------------------------- I/O

def _sorted_pairs(ps) -> list:
    return [list(p) for p in sorted(ps)]


def model_to_json(model: Model) -> dict:
    val = {p: sorted(ws) for p, ws in sorted(model.valuation.items())}
    if isinstance(model, VeltmanModel):
        return {"kind": "veltman", "worlds": list(model.worlds), "R": _sorted_pairs(model.R),
                "S_family": {w: _sorted_pairs(ps) for w, ps in sorted(model.S.items())},
                "valuation": val}
    if isinstance(model, SimplifiedModel):
        return {"kind": "simplified", "worlds": list(model.worlds), "R": _sorted_pairs(model.R),
                "S": _sorted_pairs(model.S), "valuation": val}
    return {"kind": "bimodal", "worlds": list(model.worlds), "R": _sorted_pairs(model.R0),
            "R1": _sorted_pairs(model.R1), "valuation": val}


def model_from_json(data: Mapping) -> Model:
    kind = data.get("kind")
    ws = data["worlds"]
    val = data.get("valuation", {})
    pairs = lambda key: [tuple(p) for p in data.get(key, [])]
    if kind == "veltman":
        fam = {w: [tuple(p) for p in ps] for w, ps in data.get("S_family", {}).items()}
        return VeltmanModel(ws, pairs("R"), fam, val)
    if kind == "simplified":
        return SimplifiedModel(ws, pairs("R"), pairs("S"), val)
    if kind == "bimodal":
        return BimodalModel(ws, pairs("R"), pairs("R1"), val)
    raise ModelError(f"unknown model kind {kind!r}")


def dumps_model(model: Model) -> str:
    return json.dumps(model_to_json(model), sort_keys=True, indent=1)


def to_dot(model: Model, highlight: Optional[str] = None) -> str:
    """Graphviz rendering: R solid, S dashed, S_w dashed and labeled by w."""
    lines = ["digraph model {", "  rankdir=BT;"]
    for w in model.worlds:
        true = sorted(p for p, ws in model.valuation.items() if w in ws)
        label = w + (("\\n" + ",".join(true)) if true else "")
        extra = ", peripheries=2" if w == highlight else ""
        lines.append(f'  "{w}" [label="{label}"{extra}];')
    if isinstance(model, BimodalModel):
        for a, b in sorted(model.R0):
            lines.append(f'  "{a}" -> "{b}" [label="0"];')
        for a, b in sorted(model.R1):
            lines.append(f'  "{a}" -> "{b}" [style=dashed, label="1"];')
    else:
        for a, b in sorted(model.R):
            lines.append(f'  "{a}" -> "{b}";')
        if isinstance(model, SimplifiedModel):
            for a, b in sorted(model.S):
                lines.append(f'  "{a}" -> "{b}" [style=dashed];')
        else:
            for w, ps in sorted(model.S.items()):
                for a, b in sorted(ps):
                    lines.append(f'  "{a}" -> "{b}" [style=dashed, label="{w}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_networkx(model: Model, relation: str = "R") -> nx.DiGraph:
    """One relation of a model as a directed graph (``R``, ``S``, ``R0``, ``R1``, ``RS``)."""
    g = nx.DiGraph()
    g.add_nodes_from(model.worlds)
    if relation == "RS":
        g.add_edges_from(model.R)
        g.add_edges_from(model.S)
    else:
        g.add_edges_from(getattr(model, relation))
    return g
