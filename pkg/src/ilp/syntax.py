"""Formulas of the interpretability language and of the bimodal language.

Formulas are immutable, hashable values with structural equality.  The
same propositional constructors serve both languages; ``Box`` and ``Rhd``
belong to the interpretability language, ``BoxK`` to the bimodal one.

Concrete syntax (ASCII), tightest binding first::

    ~A  []A  <>A  [0]A  [1]A  <1>A     unary
    A & B                              left associative
    A | B                              left associative
    A |> B                             non-associative
    A -> B                             right associative
    A <-> B                            non-associative, sugar for (A->B)&(B->A)

``true`` is ``~false`` and ``<>A`` is ``~[]~A``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

__all__ = [
    "Formula", "Var", "Bot", "Neg", "And", "Or", "Imp", "Box", "Rhd", "BoxK",
    "BOT", "TOP", "top", "diamond", "iff", "dia1", "big_or", "big_and",
    "ParseError", "parse", "parse_bimodal", "show",
    "children", "subformulas", "tilde", "vars_of", "is_modalized",
    "is_left_modalized", "degree", "expand_box", "size", "substitute",
    "has_box", "has_rhd", "formula_key", "sort_formulas", "modal_depth",
]

VAR_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
RESERVED = frozenset({"true", "false"})


class Formula:
    """Common base of all formula constructors."""

    __slots__ = ()

    def __str__(self) -> str:
        return show(self)


def _cached_hash(self) -> int:
    d = self.__dict__
    h = d.get("_h")
    if h is None:
        h = hash((type(self).__name__,) + tuple(getattr(self, n) for n in self.__dataclass_fields__))
        object.__setattr__(self, "_h", h)
    return h


@dataclass(frozen=True)
class Var(Formula):
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not VAR_RE.match(self.name) or self.name in RESERVED:
            raise ValueError(f"bad variable name {self.name!r}")

    __hash__ = _cached_hash


@dataclass(frozen=True)
class Bot(Formula):
    __hash__ = _cached_hash


@dataclass(frozen=True)
class Neg(Formula):
    sub: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class Box(Formula):
    sub: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class Rhd(Formula):
    left: Formula
    right: Formula
    __hash__ = _cached_hash


@dataclass(frozen=True)
class BoxK(Formula):
    """Bimodal box ``[k]`` with ``k`` in {0, 1}."""

    k: int
    sub: Formula

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ValueError(f"modality index must be 0 or 1, got {self.k!r}")

    __hash__ = _cached_hash


BOT = Bot()
TOP = Neg(BOT)


def top() -> Formula:
    return TOP


def diamond(f: Formula) -> Formula:
    return Neg(Box(Neg(f)))


def dia1(f: Formula) -> Formula:
    return Neg(BoxK(1, Neg(f)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(Imp(a, b), Imp(b, a))


def big_or(items: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; the empty disjunction is ``false``."""
    items = list(items)
    if not items:
        return BOT
    out = items[-1]
    for f in reversed(items[:-1]):
        out = Or(f, out)
    return out


def big_and(items: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``true``."""
    items = list(items)
    if not items:
        return TOP
    out = items[-1]
    for f in reversed(items[:-1]):
        out = And(f, out)
    return out


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position
        self.message = message


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op><->|->|\|>|\[\]|<>|\[[01]\]|<[01]>|[~&|()])|(?P<id>[a-z][a-z0-9_]*))"
)


def _tokenize(text: str) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group("op") or m.group("id")
        toks.append((tok, m.start("op") if m.group("op") else m.start("id")))
        pos = m.end()
    toks.append(("<eof>", n))
    return toks


class _Parser:
    def __init__(self, text: str, bimodal: bool):
        self.toks = _tokenize(text)
        self.i = 0
        self.bimodal = bimodal

    def peek(self) -> str:
        return self.toks[self.i][0]

    def pos(self) -> int:
        return self.toks[self.i][1]

    def take(self) -> str:
        tok = self.toks[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            raise ParseError(f"expected {tok!r} but found {self.peek()!r}", self.pos())
        self.i += 1

    def parse(self) -> Formula:
        f = self.iff_expr()
        if self.peek() != "<eof>":
            raise ParseError(f"unexpected token {self.peek()!r}", self.pos())
        return f

    def iff_expr(self) -> Formula:
        left = self.imp_expr()
        if self.peek() == "<->":
            self.take()
            right = self.imp_expr()
            if self.peek() == "<->":
                raise ParseError("'<->' is non-associative; add parentheses", self.pos())
            return iff(left, right)
        return left

    def imp_expr(self) -> Formula:
        left = self.rhd_expr()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.imp_expr())
        return left

    def rhd_expr(self) -> Formula:
        left = self.or_expr()
        if self.peek() == "|>":
            at = self.pos()
            if self.bimodal:
                raise ParseError("'|>' is not part of the bimodal language", at)
            self.take()
            right = self.or_expr()
            if self.peek() == "|>":
                raise ParseError("'|>' is non-associative; add parentheses", self.pos())
            return Rhd(left, right)
        return left

    def or_expr(self) -> Formula:
        f = self.and_expr()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.and_expr())
        return f

    def and_expr(self) -> Formula:
        f = self.unary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok, at = self.peek(), self.pos()
        if tok == "~":
            self.take()
            return Neg(self.unary())
        if tok in ("[]", "<>"):
            if self.bimodal:
                raise ParseError(f"{tok!r} is not part of the bimodal language; use [0] or [1]", at)
            self.take()
            sub = self.unary()
            return Box(sub) if tok == "[]" else diamond(sub)
        if tok[0] in "[<" and len(tok) == 3 and tok[1] in "01":
            if not self.bimodal:
                raise ParseError(f"{tok!r} belongs to the bimodal language", at)
            self.take()
            sub = self.unary()
            k = int(tok[1])
            return BoxK(k, sub) if tok[0] == "[" else Neg(BoxK(k, Neg(sub)))
        return self.atom()

    def atom(self) -> Formula:
        tok, at = self.peek(), self.pos()
        if tok == "(":
            self.take()
            f = self.iff_expr()
            self.expect(")")
            return f
        if tok == "false":
            self.take()
            return BOT
        if tok == "true":
            self.take()
            return TOP
        if tok == "<eof>":
            raise ParseError("unexpected end of input", at)
        if VAR_RE.match(tok):
            self.take()
            return Var(tok)
        raise ParseError(f"unexpected token {tok!r}", at)


def parse(text: str) -> Formula:
    """Parse a formula of the interpretability language."""
    return _Parser(text, bimodal=False).parse()


def parse_bimodal(text: str) -> Formula:
    """Parse a formula of the bimodal language (``[0]``, ``[1]``, ``<1>``)."""
    return _Parser(text, bimodal=True).parse()


# --------------------------------------------------------------- printing

_IFF, _IMP, _RHD, _OR, _AND, _UN = range(6)


def _iff_parts(f: Formula):
    if isinstance(f, And) and isinstance(f.left, Imp) and isinstance(f.right, Imp):
        a, b = f.left.left, f.left.right
        if f.right.left == b and f.right.right == a:
            return a, b
    return None


def _show(f: Formula) -> tuple[str, int]:
    if isinstance(f, Var):
        return f.name, _UN
    if isinstance(f, Bot):
        return "false", _UN
    if isinstance(f, Neg):
        g = f.sub
        if isinstance(g, Bot):
            return "true", _UN
        if isinstance(g, Box) and isinstance(g.sub, Neg):
            return "<>" + _wrap(g.sub.sub, _UN), _UN
        if isinstance(g, BoxK) and isinstance(g.sub, Neg):
            return f"<{g.k}>" + _wrap(g.sub.sub, _UN), _UN
        return "~" + _wrap(g, _UN), _UN
    if isinstance(f, Box):
        return "[]" + _wrap(f.sub, _UN), _UN
    if isinstance(f, BoxK):
        return f"[{f.k}]" + _wrap(f.sub, _UN), _UN
    if isinstance(f, And):
        parts = _iff_parts(f)
        if parts is not None:
            return f"{_wrap(parts[0], _IMP)} <-> {_wrap(parts[1], _IMP)}", _IFF
        return f"{_wrap(f.left, _AND)} & {_wrap(f.right, _UN)}", _AND
    if isinstance(f, Or):
        return f"{_wrap(f.left, _OR)} | {_wrap(f.right, _AND)}", _OR
    if isinstance(f, Rhd):
        return f"{_wrap(f.left, _OR)} |> {_wrap(f.right, _OR)}", _RHD
    if isinstance(f, Imp):
        return f"{_wrap(f.left, _RHD)} -> {_wrap(f.right, _IMP)}", _IMP
    raise TypeError(f"not a formula: {f!r}")


def _wrap(f: Formula, need: int) -> str:
    s, lvl = _show(f)
    return s if lvl >= need else f"({s})"


_SHOW_CACHE: dict[Formula, str] = {}


def show(f: Formula) -> str:
    """Canonical ASCII rendering; ``parse(show(f)) == f``."""
    s = _SHOW_CACHE.get(f)
    if s is None:
        s = _show(f)[0]
        if len(_SHOW_CACHE) < 200_000:
            _SHOW_CACHE[f] = s
    return s


def formula_key(f: Formula) -> tuple[int, str]:
    d = f.__dict__
    k = d.get("_key")
    if k is None:
        k = (size(f), show(f))
        object.__setattr__(f, "_key", k)
    return k


def sort_formulas(fs: Iterable[Formula]) -> list[Formula]:
    """Deterministic order used everywhere sets are serialized or iterated."""
    return sorted(fs, key=formula_key)


# ------------------------------------------------------------- structure

def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Var, Bot)):
        return ()
    if isinstance(f, (Neg, Box, BoxK)):
        return (f.sub,)
    if isinstance(f, (And, Or, Imp, Rhd)):
        return (f.left, f.right)
    raise TypeError(f"not a formula: {f!r}")


def _map_children(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    if isinstance(f, (Var, Bot)):
        return f
    if isinstance(f, Neg):
        return Neg(fn(f.sub))
    if isinstance(f, Box):
        return Box(fn(f.sub))
    if isinstance(f, BoxK):
        return BoxK(f.k, fn(f.sub))
    return type(f)(fn(f.left), fn(f.right))


def _walk(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


def _walk_unique(f: Formula) -> Iterator[Formula]:
    # each distinct subformula once; cheap on heavily shared trees
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        stack.extend(children(g))


def subformulas(f: Formula) -> frozenset[Formula]:
    return frozenset(_walk_unique(f))


def size(f: Formula) -> int:
    """Number of constructor nodes."""
    return sum(1 for _ in _walk(f))


def tilde(f: Formula) -> Formula:
    """Strip one negation if present, otherwise add one."""
    return f.sub if isinstance(f, Neg) else Neg(f)


def vars_of(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in _walk_unique(f) if isinstance(g, Var))


def has_box(f: Formula) -> bool:
    return any(isinstance(g, Box) for g in _walk(f))


def has_rhd(f: Formula) -> bool:
    return any(isinstance(g, Rhd) for g in _walk(f))


def _bare(f: Formula, p: str) -> bool:
    # does p occur outside the scope of every modal operator?
    if isinstance(f, Var):
        return f.name == p
    if isinstance(f, (Box, Rhd, BoxK)):
        return False
    return any(_bare(g, p) for g in children(f))


def is_modalized(f: Formula, p: str) -> bool:
    return not _bare(f, p)


def is_left_modalized(f: Formula, p: str) -> bool:
    if not is_modalized(f, p):
        return False
    return all(p not in vars_of(g.right) for g in _walk(f) if isinstance(g, Rhd))


def degree(f: Formula) -> int:
    """Nesting depth of interpretability on the right; boxes do not count."""
    if isinstance(f, (Var, Bot)):
        return 0
    if isinstance(f, Rhd):
        return max(degree(f.left), degree(f.right) + 1)
    return max((degree(g) for g in children(f)), default=0)


def modal_depth(f: Formula) -> int:
    if isinstance(f, (Var, Bot)):
        return 0
    inner = max(modal_depth(g) for g in children(f))
    return inner + 1 if isinstance(f, (Box, Rhd, BoxK)) else inner


_EXPAND_CACHE: dict[Formula, Formula] = {}


def expand_box(f: Formula) -> Formula:
    """Replace every ``[]A`` by ``(~A) |> false``, innermost first."""
    out = _EXPAND_CACHE.get(f)
    if out is not None:
        return out
    if isinstance(f, Box):
        out = Rhd(Neg(expand_box(f.sub)), BOT)
    else:
        out = _map_children(f, expand_box)
    if len(_EXPAND_CACHE) < 200_000:
        _EXPAND_CACHE[f] = out
    return out


def substitute(f: Formula, p: str, g: Formula) -> Formula:
    """Replace every occurrence of the variable ``p`` by ``g``."""
    return replace(f, Var(p), g)


def replace(f: Formula, target: Formula, repl: Formula) -> Formula:
    """Replace every occurrence of the subformula ``target`` by ``repl``."""
    memo: dict[Formula, Formula] = {}

    def go(h: Formula) -> Formula:
        out = memo.get(h)
        if out is None:
            out = repl if h == target else _map_children(h, go)
            memo[h] = out
        return out

    return go(f)


def fresh_var(used: Iterable[str], stem: str = "r") -> str:
    used = set(used)
    i = 0
    while f"{stem}{i}" in used:
        i += 1
    return f"{stem}{i}"
