"""LTL formula syntax tree, concrete-syntax parser, and normal forms.

Formulas are immutable trees over a declared set of atomic propositions.
The concrete grammar understood by :func:`parse_formula`::

    formula := imp
    imp     := disj ('->' imp)?                 # right associative
    disj    := conj ('|' conj)*
    conj    := until ('&' until)*
    until   := unary (('U' | 'W' | 'R') until)? # right associative
    unary   := '!' unary | 'X' unary | 'G' unary | 'F' unary | atom
    atom    := 'true' | 'false' | identifier | '(' formula ')'

Unary operators bind tightest, then U/W/R, then '&', then '|', then '->'.
The single capital letters X, U, W, R, G, F and the words true/false are
reserved and cannot be used as atom names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


class FormulaError(ValueError):
    """Raised for syntax errors and undeclared atoms; carries a position."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueF(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"!{_wrap(self.arg)}"


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"X {_wrap(self.arg)}"


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"G {_wrap(self.arg)}"


@dataclass(frozen=True)
class Finally(Formula):
    arg: Formula

    def __str__(self) -> str:
        return f"F {_wrap(self.arg)}"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} U {self.right})"


@dataclass(frozen=True)
class WeakUntil(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} W {self.right})"


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({self.left} R {self.right})"


def _wrap(f: Formula) -> str:
    if isinstance(f, (Atom, TrueF, FalseF, Not, Next, Globally, Finally)):
        return str(f)
    return f"({f})"


UNARY = (Not, Next, Globally, Finally)
BINARY = (And, Or, Until, WeakUntil, Release)

# A letter of the alphabet is a subset of the declared atomic propositions.
Letter = frozenset


def letters(ap: list[str] | tuple[str, ...]) -> list[Letter]:
    """All 2^|ap| letters in a deterministic order (by size, then names)."""
    base: list[Letter] = [frozenset()]
    for name in sorted(ap):
        base = base + [s | {name} for s in base]
    return sorted(base, key=lambda s: (len(s), tuple(sorted(s))))


def atoms_of(f: Formula) -> set[str]:
    out: set[str] = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.add(g.name)
    return out


def subformulas(f: Formula) -> Iterator[Formula]:
    """Yield every node of the tree, children before parents."""
    if isinstance(f, UNARY):
        yield from subformulas(f.arg)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    yield f


_RESERVED = {"X", "U", "W", "R", "G", "F", "true", "false"}

_TOKEN = re.compile(r"\s*(->|[!&|()]|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise FormulaError(f"unexpected character {stripped[0]!r}",
                               len(text) - len(stripped))
        tokens.append((m.group(1), m.start(1)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, ap: list[str]):
        self.text = text
        self.ap = set(ap)
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def pos(self) -> int:
        if self.i < len(self.tokens):
            return self.tokens[self.i][1]
        return len(self.text)

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of input", self.pos())
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.imp()
        if self.peek() is not None:
            raise FormulaError(f"unexpected token {self.peek()!r}", self.pos())
        return f

    def imp(self) -> Formula:
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Or(Not(left), self.imp())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.until()
        while self.peek() == "&":
            self.take()
            f = And(f, self.until())
        return f

    def until(self) -> Formula:
        left = self.unary()
        tok = self.peek()
        if tok in ("U", "W", "R"):
            self.take()
            right = self.until()
            cls = {"U": Until, "W": WeakUntil, "R": Release}[tok]
            return cls(left, right)
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of input", self.pos())
        if tok == "!":
            self.take()
            return Not(self.unary())
        if tok in ("X", "G", "F"):
            self.take()
            cls = {"X": Next, "G": Globally, "F": Finally}[tok]
            return cls(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        pos = self.pos()
        tok = self.take()
        if tok == "(":
            f = self.imp()
            if self.peek() != ")":
                raise FormulaError("expected ')'", self.pos())
            self.take()
            return f
        if tok == "true":
            return TrueF()
        if tok == "false":
            return FalseF()
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok) and tok not in _RESERVED:
            if tok not in self.ap:
                raise FormulaError(f"undeclared atom {tok!r}", pos)
            return Atom(tok)
        raise FormulaError(f"unexpected token {tok!r}", pos)


def parse_formula(text: str, ap: list[str]) -> Formula:
    """Parse ``text`` into a Formula over the declared atom names.

    Raises FormulaError with the offending position for syntax errors and
    for atom names missing from ``ap``.
    """
    return _Parser(text, ap).parse()


def to_nnf(f: Formula) -> Formula:
    """Negation normal form.

    Negations are pushed onto atoms, Finally/Globally are rewritten into
    Until/Release, and double negations cancel.  The result is language
    equivalent to the input and uses only True/False/Atom/Not(Atom)/
    And/Or/Next/Until/WeakUntil/Release.
    """
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Next):
        return Next(to_nnf(f.arg))
    if isinstance(f, Globally):
        return Release(FalseF(), to_nnf(f.arg))
    if isinstance(f, Finally):
        return Until(TrueF(), to_nnf(f.arg))
    if isinstance(f, And):
        return And(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Or):
        return Or(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Until):
        return Until(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, WeakUntil):
        return WeakUntil(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Release):
        return Release(to_nnf(f.left), to_nnf(f.right))
    if isinstance(f, Not):
        g = f.arg
        if isinstance(g, TrueF):
            return FalseF()
        if isinstance(g, FalseF):
            return TrueF()
        if isinstance(g, Atom):
            return f
        if isinstance(g, Not):
            return to_nnf(g.arg)
        if isinstance(g, Next):
            return Next(to_nnf(Not(g.arg)))
        if isinstance(g, Globally):
            return Until(TrueF(), to_nnf(Not(g.arg)))
        if isinstance(g, Finally):
            return Release(FalseF(), to_nnf(Not(g.arg)))
        if isinstance(g, And):
            return Or(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Or):
            return And(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Until):
            return Release(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, Release):
            return Until(to_nnf(Not(g.left)), to_nnf(Not(g.right)))
        if isinstance(g, WeakUntil):
            # g W h == h R (g | h), so the negation is !h U (!g & !h).
            nl, nr = to_nnf(Not(g.left)), to_nnf(Not(g.right))
            return Until(nr, And(nl, nr))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    for g in subformulas(f):
        if isinstance(g, (Globally, Finally)):
            return False
        if isinstance(g, Not) and not isinstance(g.arg, Atom):
            return False
    return True


def random_formula(rng, ap: list[str], size: int) -> Formula:
    """Random formula with at most ``size`` operator/leaf nodes (seeded rng)."""
    if size <= 1:
        kind = rng.choice(["atom", "atom", "atom", "true", "false"])
        if kind == "true":
            return TrueF()
        if kind == "false":
            return FalseF()
        return Atom(str(rng.choice(ap)))
    unary = ["not", "next", "globally", "finally"]
    binary = ["and", "or", "until", "wuntil", "release"]
    kind = str(rng.choice(unary + binary + ["atom"]))
    if kind == "atom":
        return random_formula(rng, ap, 1)
    if kind in ("not", "next", "globally", "finally"):
        inner = random_formula(rng, ap, size - 1)
        cls = {"not": Not, "next": Next, "globally": Globally,
               "finally": Finally}[kind]
        return cls(inner)
    split = int(rng.integers(1, size - 1)) if size > 2 else 1
    left = random_formula(rng, ap, split)
    right = random_formula(rng, ap, size - 1 - split)
    cls = {"and": And, "or": Or, "until": Until, "wuntil": WeakUntil,
           "release": Release}[kind]
    return cls(left, right)
