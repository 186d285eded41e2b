"""
ltlf.py - LTLf formulas over a partitioned alphabet.

Parses the text grammar, evaluates formulas on finite nonempty traces,
rewrites to negation normal form and counts operators.

Example formula text:
    F(add && WX(add))
    (req -> X(grant)) U done
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import pathlib
import re
from dataclasses import dataclass
from functools import reduce
from typing import AbstractSet, Iterable, Iterator, Optional, Sequence

from besynth.errors import (
    FormulaSyntaxError,
    PartitionError,
    TraceError,
    UndeclaredAtomError,
)

#####################################
# Partition
#####################################

IDENT_PATTERN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

KEYWORDS = frozenset({"true", "false", "X", "WX", "F", "G", "U", "R"})


@dataclass(frozen=True)
class Partition:
    """
    Split of the propositions into environment (X) and agent (Y) variables.

    The order of all_vars (env first, then agent) fixes the bit order of
    letters: bit i of a letter is the value of all_vars[i].
    """

    env_vars: tuple[str, ...]
    agent_vars: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "env_vars", tuple(self.env_vars))
        object.__setattr__(self, "agent_vars", tuple(self.agent_vars))
        names = self.env_vars + self.agent_vars
        for name in names:
            if not IDENT_PATTERN.fullmatch(name) or name in KEYWORDS:
                raise PartitionError(f"invalid proposition name '{name}'")
        if len(set(self.env_vars)) != len(self.env_vars):
            raise PartitionError("duplicate environment variable")
        if len(set(self.agent_vars)) != len(self.agent_vars):
            raise PartitionError("duplicate agent variable")
        overlap = set(self.env_vars) & set(self.agent_vars)
        if overlap:
            raise PartitionError(
                f"environment and agent variables overlap: {sorted(overlap)}"
            )

    @property
    def all_vars(self) -> tuple[str, ...]:
        return self.env_vars + self.agent_vars

    def __contains__(self, name: object) -> bool:
        return name in self.env_vars or name in self.agent_vars

    def require_nonempty(self) -> None:
        """Synthesis problems need at least one variable on each side."""
        if not self.env_vars or not self.agent_vars:
            raise PartitionError(
                "synthesis needs nonempty environment and agent variable sets"
            )

    @classmethod
    def from_text(cls, text: str) -> "Partition":
        """
        Read the partition file format.

        Args:
            text (str): lines ".inputs: a b c" and ".outputs: d e".

        Returns:
            Partition: inputs become X, outputs become Y.
        """
        env: Optional[list[str]] = None
        agent: Optional[list[str]] = None
        for raw in text.splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith(".inputs:"):
                env = line[len(".inputs:"):].split()
            elif line.startswith(".outputs:"):
                agent = line[len(".outputs:"):].split()
            else:
                raise PartitionError(f"unexpected partition line: '{line}'")
        if env is None or agent is None:
            raise PartitionError("partition needs both .inputs: and .outputs: lines")
        return cls(tuple(env), tuple(agent))

    @classmethod
    def load(cls, path: pathlib.Path | str) -> "Partition":
        return cls.from_text(pathlib.Path(path).read_text())

    def to_text(self) -> str:
        return f".inputs: {' '.join(self.env_vars)}\n.outputs: {' '.join(self.agent_vars)}\n"


#####################################
# Formula Tree
#####################################


class Formula:
    """Base class for LTLf formulas. Values are immutable and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class TrueFormula(Formula):
    pass


@dataclass(frozen=True)
class FalseFormula(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    arg: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


TRUE = TrueFormula()
FALSE = FalseFormula()

UNARY_TYPES = (Not, Next, WeakNext, Eventually, Always)
BINARY_TYPES = (And, Or, Implies, Until, Release)

# A trace is a sequence of interpretations, each the set of true propositions.
Trace = Sequence[AbstractSet[str]]


def conjoin(parts: Iterable[Formula]) -> Formula:
    """Right-nested conjunction; TRUE for an empty list."""
    items = list(parts)
    if not items:
        return TRUE
    return reduce(lambda acc, item: And(item, acc), reversed(items[:-1]), items[-1])


def disjoin(parts: Iterable[Formula]) -> Formula:
    """Right-nested disjunction; FALSE for an empty list."""
    items = list(parts)
    if not items:
        return FALSE
    return reduce(lambda acc, item: Or(item, acc), reversed(items[:-1]), items[-1])


def iff(left: Formula, right: Formula) -> Formula:
    return And(Implies(left, right), Implies(right, left))


def conjuncts(formula: Formula) -> list[Formula]:
    """Flatten nested top-level conjunctions, left to right."""
    if isinstance(formula, And):
        return conjuncts(formula.left) + conjuncts(formula.right)
    return [formula]


def atoms(formula: Formula) -> set[str]:
    """Return the names of all atoms in the formula."""
    if isinstance(formula, Atom):
        return {formula.name}
    if isinstance(formula, UNARY_TYPES):
        return atoms(formula.arg)
    if isinstance(formula, BINARY_TYPES):
        return atoms(formula.left) | atoms(formula.right)
    return set()


def size(formula: Formula) -> int:
    """Number of operators; atoms and constants count zero."""
    if isinstance(formula, UNARY_TYPES):
        return 1 + size(formula.arg)
    if isinstance(formula, BINARY_TYPES):
        return 1 + size(formula.left) + size(formula.right)
    return 0


#####################################
# Pretty-Printer
#####################################

UNARY_SYMBOLS = {Next: "X", WeakNext: "WX", Eventually: "F", Always: "G"}
BINARY_SYMBOLS = {And: "&&", Or: "||", Implies: "->", Until: "U", Release: "R"}


def to_text(formula: Formula) -> str:
    """Print a formula so that parse(to_text(f)) == f."""
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, TrueFormula):
        return "true"
    if isinstance(formula, FalseFormula):
        return "false"
    if isinstance(formula, Not):
        inner = to_text(formula.arg)
        if isinstance(formula.arg, (Atom, TrueFormula, FalseFormula)):
            return f"!{inner}"
        return f"!({inner})"
    if isinstance(formula, UNARY_TYPES):
        return f"{UNARY_SYMBOLS[type(formula)]}({to_text(formula.arg)})"
    if isinstance(formula, BINARY_TYPES):
        symbol = BINARY_SYMBOLS[type(formula)]
        return f"({to_text(formula.left)} {symbol} {to_text(formula.right)})"
    raise TypeError(f"not a formula: {formula!r}")


#####################################
# Parser
#####################################

TOKEN_PATTERN = re.compile(
    r"\s*(?:(?P<op>&&|\|\||->|!|\(|\))|(?P<ident>[A-Za-z_][A-Za-z0-9_]*))"
)

# Binding power and associativity of binary operators, weakest first.
BINARY_PRECEDENCE = {
    "->": (1, "right"),
    "||": (2, "left"),
    "&&": (3, "left"),
    "U": (4, "right"),
    "R": (4, "right"),
}

BINARY_BUILDERS = {"->": Implies, "||": Or, "&&": And, "U": Until, "R": Release}
UNARY_BUILDERS = {"!": Not, "X": Next, "WX": WeakNext, "F": Eventually, "G": Always}


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = TOKEN_PATTERN.match(text, position)
        if match is None or match.end() == position:
            skipped = len(text[position:]) - len(text[position:].lstrip())
            raise FormulaSyntaxError(
                f"unexpected character '{text[position + skipped]}'",
                position + skipped,
            )
        value = match.group("op") or match.group("ident")
        tokens.append((value, match.start(match.lastgroup)))
        position = match.end()
    return tokens


class _Parser:
    """Precedence-climbing parser over the token list."""

    def __init__(self, text: str, partition: Optional[Partition]):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.partition = partition

    def peek(self) -> Optional[str]:
        if self.index < len(self.tokens):
            return self.tokens[self.index][0]
        return None

    def position(self) -> int:
        if self.index < len(self.tokens):
            return self.tokens[self.index][1]
        return len(self.text)

    def advance(self) -> str:
        token = self.tokens[self.index][0]
        self.index += 1
        return token

    def parse(self) -> Formula:
        if not self.tokens:
            raise FormulaSyntaxError("empty formula", 0)
        formula = self.binary(1)
        if self.peek() is not None:
            raise FormulaSyntaxError(f"unexpected token '{self.peek()}'", self.position())
        return formula

    def binary(self, min_power: int) -> Formula:
        left = self.unary()
        while True:
            token = self.peek()
            if token not in BINARY_PRECEDENCE:
                return left
            power, assoc = BINARY_PRECEDENCE[token]
            if power < min_power:
                return left
            self.advance()
            next_power = power if assoc == "right" else power + 1
            right = self.binary(next_power)
            left = BINARY_BUILDERS[token](left, right)

    def unary(self) -> Formula:
        token = self.peek()
        if token is None:
            raise FormulaSyntaxError("unexpected end of input", len(self.text))
        if token in UNARY_BUILDERS:
            self.advance()
            return UNARY_BUILDERS[token](self.unary())
        if token == "(":
            self.advance()
            inner = self.binary(1)
            if self.peek() != ")":
                raise FormulaSyntaxError("expected ')'", self.position())
            self.advance()
            return inner
        if token == "true":
            self.advance()
            return TRUE
        if token == "false":
            self.advance()
            return FALSE
        if IDENT_PATTERN.fullmatch(token) and token not in KEYWORDS:
            self.advance()
            if self.partition is not None and token not in self.partition:
                raise UndeclaredAtomError(token)
            return Atom(token)
        raise FormulaSyntaxError(f"unexpected token '{token}'", self.position())


def parse(text: str, partition: Optional[Partition] = None) -> Formula:
    """
    Parse formula text.

    Args:
        text (str): formula in the besynth grammar.
        partition (Partition, optional): when given, every atom must be declared.

    Returns:
        Formula: the abstract syntax tree.
    """
    return _Parser(text, partition).parse()


def load_formula(path: pathlib.Path | str, partition: Optional[Partition] = None) -> Formula:
    """Parse a formula file, ignoring blank lines and '#' comments."""
    lines = [
        line for line in pathlib.Path(path).read_text().splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    return parse(" ".join(lines), partition)


#####################################
# Semantics
#####################################


def evaluate(formula: Formula, trace: Trace, instant: int = 0) -> bool:
    """
    Decide trace, instant |= formula for a finite nonempty trace.

    The last instant is len(trace) - 1.
    """
    if len(trace) == 0:
        raise TraceError("formulas are evaluated on nonempty traces")
    if not 0 <= instant < len(trace):
        raise TraceError(f"instant {instant} outside trace of length {len(trace)}")
    return _holds(formula, trace, instant, len(trace) - 1)


def _holds(formula: Formula, trace: Trace, i: int, last: int) -> bool:
    if isinstance(formula, Atom):
        return formula.name in trace[i]
    if isinstance(formula, TrueFormula):
        return True
    if isinstance(formula, FalseFormula):
        return False
    if isinstance(formula, Not):
        return not _holds(formula.arg, trace, i, last)
    if isinstance(formula, And):
        return _holds(formula.left, trace, i, last) and _holds(formula.right, trace, i, last)
    if isinstance(formula, Or):
        return _holds(formula.left, trace, i, last) or _holds(formula.right, trace, i, last)
    if isinstance(formula, Implies):
        return (not _holds(formula.left, trace, i, last)) or _holds(formula.right, trace, i, last)
    if isinstance(formula, Next):
        return i < last and _holds(formula.arg, trace, i + 1, last)
    if isinstance(formula, WeakNext):
        return i == last or _holds(formula.arg, trace, i + 1, last)
    if isinstance(formula, Eventually):
        return any(_holds(formula.arg, trace, j, last) for j in range(i, last + 1))
    if isinstance(formula, Always):
        return all(_holds(formula.arg, trace, j, last) for j in range(i, last + 1))
    if isinstance(formula, Until):
        for j in range(i, last + 1):
            if _holds(formula.right, trace, j, last):
                return True
            if not _holds(formula.left, trace, j, last):
                return False
        return False
    if isinstance(formula, Release):
        for j in range(i, last + 1):
            if not _holds(formula.right, trace, j, last):
                return False
            if _holds(formula.left, trace, j, last):
                return True
        return True
    raise TypeError(f"not a formula: {formula!r}")


#####################################
# Negation Normal Form
#####################################


def to_nnf(formula: Formula) -> Formula:
    """
    Push negations down to atoms.

    Implications are expanded; Release and WeakNext serve as the duals of
    Until and Next, Always and Eventually as each other's duals.
    """
    return _nnf(formula, negate=False)


def _nnf(formula: Formula, negate: bool) -> Formula:
    if isinstance(formula, Atom):
        return Not(formula) if negate else formula
    if isinstance(formula, TrueFormula):
        return FALSE if negate else TRUE
    if isinstance(formula, FalseFormula):
        return TRUE if negate else FALSE
    if isinstance(formula, Not):
        return _nnf(formula.arg, not negate)
    if isinstance(formula, And):
        builder = Or if negate else And
        return builder(_nnf(formula.left, negate), _nnf(formula.right, negate))
    if isinstance(formula, Or):
        builder = And if negate else Or
        return builder(_nnf(formula.left, negate), _nnf(formula.right, negate))
    if isinstance(formula, Implies):
        if negate:
            return And(_nnf(formula.left, False), _nnf(formula.right, True))
        return Or(_nnf(formula.left, True), _nnf(formula.right, False))
    if isinstance(formula, Next):
        return (WeakNext if negate else Next)(_nnf(formula.arg, negate))
    if isinstance(formula, WeakNext):
        return (Next if negate else WeakNext)(_nnf(formula.arg, negate))
    if isinstance(formula, Eventually):
        return (Always if negate else Eventually)(_nnf(formula.arg, negate))
    if isinstance(formula, Always):
        return (Eventually if negate else Always)(_nnf(formula.arg, negate))
    if isinstance(formula, Until):
        builder = Release if negate else Until
        return builder(_nnf(formula.left, negate), _nnf(formula.right, negate))
    if isinstance(formula, Release):
        builder = Until if negate else Release
        return builder(_nnf(formula.left, negate), _nnf(formula.right, negate))
    raise TypeError(f"not a formula: {formula!r}")


def subformulas(formula: Formula) -> Iterator[Formula]:
    """Yield the formula and every subformula, children first."""
    if isinstance(formula, UNARY_TYPES):
        yield from subformulas(formula.arg)
    elif isinstance(formula, BINARY_TYPES):
        yield from subformulas(formula.left)
        yield from subformulas(formula.right)
    yield formula
