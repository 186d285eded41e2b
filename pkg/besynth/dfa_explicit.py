"""
dfa_explicit.py - explicit-state DFAs over the letters of a partition.

A letter is an integer in [0, 2**P) where bit i is the value of
partition.all_vars[i]. Transitions are a dense numpy table of shape
(states, letters), so every DFA here is complete and deterministic.

Translation from LTLf uses formula progression: a state is a Boolean
combination of pending next-obligations, kept canonical as a BDD in a
private manager. Results are minimized with Hopcroft refinement and
numbered in breadth-first order from the initial state.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Optional, Sequence

import numpy as np

from besynth import ltlf
from besynth.bdd import DdNode, Manager
from besynth.errors import (
    PartitionError,
    ResourceLimitError,
    TraceError,
    UndeclaredAtomError,
)
from besynth.ltlf import Formula, Partition, Trace
from utils.utils_config import get_alphabet_cap, get_state_cap
from utils.utils_logger import logger

#####################################
# Data Types
#####################################

Run = tuple[int, ...]

BOOLEAN_OPERATORS = {
    "and": lambda a, b: a & b,
    "or": lambda a, b: a | b,
    "implies": lambda a, b: ~a | b,
    "iff": lambda a, b: a == b,
}


@dataclass(frozen=True, eq=False)
class ExplicitDfa:
    """
    Complete DFA: table[s, letter] is the successor of state s.

    Attributes:
        partition (Partition): alphabet owner; fixes the letter bit order.
        table (np.ndarray): int32 array of shape (n_states, 2**len(all_vars)).
        initial (int): index of the initial state.
        finals (frozenset[int]): accepting states.
    """

    partition: Partition
    table: np.ndarray
    initial: int
    finals: frozenset[int]

    def __post_init__(self):
        table = np.ascontiguousarray(self.table, dtype=np.int32)
        table.setflags(write=False)
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "finals", frozenset(int(s) for s in self.finals))
        n, width = table.shape
        if width != 1 << len(self.partition.all_vars):
            raise ValueError(f"table has {width} letters, partition needs {1 << len(self.partition.all_vars)}")
        if not 0 <= self.initial < n:
            raise ValueError(f"initial state {self.initial} out of range")
        if n and (table.min() < 0 or table.max() >= n):
            raise ValueError("transition table refers to unknown states")
        if any(not 0 <= s < n for s in self.finals):
            raise ValueError("final state out of range")

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def n_letters(self) -> int:
        return self.table.shape[1]

    def step(self, state: int, letter: int) -> int:
        return int(self.table[state, letter])

    def is_final(self, state: int) -> bool:
        return state in self.finals

    def final_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        mask[list(self.finals)] = True
        return mask

    def __repr__(self) -> str:
        return (
            f"ExplicitDfa(states={self.n_states}, initial={self.initial}, "
            f"finals={sorted(self.finals)}, props={list(self.partition.all_vars)})"
        )


@dataclass(frozen=True, eq=False)
class LiftedProduct:
    """
    Reachable synchronous product with one lifted final set per component.

    dfa.finals holds the states final in every component.
    """

    dfa: ExplicitDfa
    lifted_finals: tuple[frozenset[int], ...]
    state_tuples: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def n_states(self) -> int:
        return self.dfa.n_states


#####################################
# Letters
#####################################


def check_alphabet(partition: Partition) -> None:
    """Refuse partitions whose letters cannot be enumerated."""
    cap = get_alphabet_cap()
    if len(partition.all_vars) > cap:
        raise ResourceLimitError(
            "alphabet", cap, f"{len(partition.all_vars)} propositions cannot be enumerated"
        )


def letter_index(partition: Partition, names: AbstractSet[str]) -> int:
    """Letter of the interpretation that makes exactly `names` true."""
    letter = 0
    for name in names:
        if name not in partition:
            raise UndeclaredAtomError(name)
        letter |= 1 << partition.all_vars.index(name)
    return letter


def letter_names(partition: Partition, letter: int) -> frozenset[str]:
    return frozenset(name for i, name in enumerate(partition.all_vars) if letter >> i & 1)


def _letters(partition: Partition) -> np.ndarray:
    return np.arange(1 << len(partition.all_vars), dtype=np.int64)


#####################################
# Membership
#####################################


def run(dfa: ExplicitDfa, word: Trace) -> Run:
    """States visited while reading the word, starting with the initial state."""
    states = [dfa.initial]
    for interpretation in word:
        states.append(dfa.step(states[-1], letter_index(dfa.partition, interpretation)))
    return tuple(states)


def accepts(dfa: ExplicitDfa, word: Trace) -> bool:
    """True when the nonempty word ends in a final state."""
    if len(word) == 0:
        raise TraceError("automata accept nonempty words only")
    return run(dfa, word)[-1] in dfa.finals


#####################################
# Translation
#####################################


class _Progression:
    """
    Formula progression over BDD-encoded obligations.

    Term variables @X<id> and @W<id> stand for "the next instant exists and
    satisfies formula id" and "if a next instant exists it satisfies id".
    Propositions are declared first, so every progressed state splits
    cleanly into letter cubes on top of successor obligations.
    """

    def __init__(self, partition: Partition):
        self.partition = partition
        self.manager = Manager(cache_enabled=True)
        self.manager.declare(*partition.all_vars)
        self._ids: dict[Formula, int] = {}
        self._formulas: list[Formula] = []
        self._progressed: dict[int, DdNode] = {}
        self._term_targets: dict[str, int] = {}

    def _id(self, formula: Formula) -> int:
        ident = self._ids.get(formula)
        if ident is None:
            ident = len(self._formulas)
            self._ids[formula] = ident
            self._formulas.append(formula)
        return ident

    def term(self, kind: str, formula: Formula) -> DdNode:
        name = f"@{kind}{self._id(formula)}"
        if name not in self._term_targets:
            self.manager.declare(name)
            self._term_targets[name] = self._id(formula)
        return self.manager.var(name)

    def progress(self, formula: Formula) -> DdNode:
        """Obligation on the current letter and the rest of the trace."""
        ident = self._id(formula)
        cached = self._progressed.get(ident)
        if cached is not None:
            return cached
        m = self.manager
        if isinstance(formula, ltlf.TrueFormula):
            result = m.true
        elif isinstance(formula, ltlf.FalseFormula):
            result = m.false
        elif isinstance(formula, ltlf.Atom):
            result = m.var(formula.name)
        elif isinstance(formula, ltlf.Not):
            result = ~m.var(formula.arg.name)
        elif isinstance(formula, ltlf.And):
            result = self.progress(formula.left) & self.progress(formula.right)
        elif isinstance(formula, ltlf.Or):
            result = self.progress(formula.left) | self.progress(formula.right)
        elif isinstance(formula, ltlf.Next):
            result = self.term("X", formula.arg)
        elif isinstance(formula, ltlf.WeakNext):
            result = self.term("W", formula.arg)
        elif isinstance(formula, ltlf.Until):
            result = self.progress(formula.right) | (
                self.progress(formula.left) & self.term("X", formula)
            )
        elif isinstance(formula, ltlf.Release):
            result = self.progress(formula.right) & (
                self.progress(formula.left) | self.term("W", formula)
            )
        elif isinstance(formula, ltlf.Eventually):
            result = self.progress(formula.arg) | self.term("X", formula)
        elif isinstance(formula, ltlf.Always):
            result = self.progress(formula.arg) & self.term("W", formula)
        else:
            raise TypeError(f"formula not in negation normal form: {formula}")
        self._progressed[ident] = result
        return result

    def read(self, state: DdNode) -> DdNode:
        """Substitute every pending obligation by its progression."""
        substitution = {
            name: self.progress(self._formulas[self._term_targets[name]])
            for name in self.manager.support(state)
        }
        return self.manager.vector_compose(state, substitution)

    def accepting(self, state: DdNode) -> bool:
        """Whether the trace may end here: strong obligations fail, weak ones hold."""
        ends = {name: name.startswith("@W") for name in self.manager.support(state)}
        return self.manager.restrict(state, ends).is_true


def translate(formula: Formula, partition: Partition, state_cap: Optional[int] = None) -> ExplicitDfa:
    """
    Build the minimal DFA accepting the nonempty traces that satisfy formula.

    Args:
        formula (Formula): LTLf formula over the partition.
        partition (Partition): the alphabet.
        state_cap (int, optional): defaults to BESYNTH_STATE_CAP.

    Raises:
        UndeclaredAtomError: the formula mentions an unknown atom.
        ResourceLimitError: too many propositions or states.
    """
    for name in sorted(ltlf.atoms(formula)):
        if name not in partition:
            raise UndeclaredAtomError(name)
    check_alphabet(partition)
    cap = state_cap if state_cap is not None else get_state_cap()

    progression = _Progression(partition)
    letters = _letters(partition)
    start = progression.term("X", ltlf.to_nnf(formula))

    index: dict[DdNode, int] = {start: 0}
    states: list[DdNode] = [start]
    rows: list[np.ndarray] = []
    finals: set[int] = set()
    queue = deque([start])
    while queue:
        state = queue.popleft()
        if progression.accepting(state):
            finals.add(index[state])
        row = np.empty(len(letters), dtype=np.int32)
        for cube, successor in progression.manager.split(progression.read(state), partition.all_vars):
            if successor not in index:
                if len(states) >= cap:
                    raise ResourceLimitError("DFA state", cap, f"translating {formula}")
                index[successor] = len(states)
                states.append(successor)
                queue.append(successor)
            care, value = _cube_masks(partition, cube)
            row[(letters & care) == value] = index[successor]
        rows.append(row)
        progression.manager.maybe_collect()

    raw = ExplicitDfa(partition, np.vstack(rows), 0, frozenset(finals))
    logger.debug(f"Translated {formula}: {raw.n_states} raw states")
    return minimize(raw)


def _cube_masks(partition: Partition, cube: dict[str, bool]) -> tuple[int, int]:
    care = value = 0
    for name, bit in cube.items():
        position = 1 << partition.all_vars.index(name)
        care |= position
        if bit:
            value |= position
    return care, value


#####################################
# Minimization
#####################################


def _reachable(dfa: ExplicitDfa) -> list[int]:
    """Reachable states in breadth-first order, successors by first letter."""
    order = [dfa.initial]
    seen = {dfa.initial}
    head = 0
    while head < len(order):
        state = order[head]
        head += 1
        for target in dict.fromkeys(dfa.table[state].tolist()):
            if target not in seen:
                seen.add(target)
                order.append(target)
    return order


def _hopcroft(table: np.ndarray, finals: frozenset[int]) -> list[int]:
    """Block index per state for the coarsest stable partition."""
    n, n_classes = table.shape
    predecessors: list[dict[int, list[int]]] = [{} for _ in range(n_classes)]
    for c in range(n_classes):
        column = table[:, c].tolist()
        for source, target in enumerate(column):
            predecessors[c].setdefault(target, []).append(source)

    accepting = frozenset(s for s in range(n) if s in finals)
    rejecting = frozenset(range(n)) - accepting
    blocks = [b for b in (accepting, rejecting) if b]
    block_of = [0] * n
    for i, block in enumerate(blocks):
        for s in block:
            block_of[s] = i
    if len(blocks) < 2:
        return block_of

    worklist = {min(range(len(blocks)), key=lambda i: len(blocks[i]))}
    while worklist:
        splitter = blocks[worklist.pop()]
        for c in range(n_classes):
            touched: dict[int, set[int]] = {}
            for target in splitter:
                for source in predecessors[c].get(target, ()):
                    touched.setdefault(block_of[source], set()).add(source)
            for i, inside in touched.items():
                if len(inside) == len(blocks[i]):
                    continue
                outside = blocks[i] - inside
                inside = frozenset(inside)
                blocks[i] = inside
                j = len(blocks)
                blocks.append(outside)
                for s in outside:
                    block_of[s] = j
                if i in worklist:
                    worklist.add(j)
                else:
                    worklist.add(i if len(inside) <= len(outside) else j)
    return block_of


def _quotient(dfa: ExplicitDfa, block_of: list[int]) -> ExplicitDfa:
    """Collapse blocks and renumber breadth-first from the initial block."""
    representative: dict[int, int] = {}
    for state, block in enumerate(block_of):
        representative.setdefault(block, state)
    block_table = np.asarray(block_of, dtype=np.int32)[dfa.table]
    order = [block_of[dfa.initial]]
    number = {order[0]: 0}
    head = 0
    while head < len(order):
        block = order[head]
        head += 1
        for target in dict.fromkeys(block_table[representative[block]].tolist()):
            if target not in number:
                number[target] = len(order)
                order.append(target)
    renumber = np.zeros(max(number) + 1, dtype=np.int32)
    for block, new in number.items():
        renumber[block] = new
    table = renumber[block_table[[representative[b] for b in order]]]
    finals = frozenset(number[block_of[s]] for s in dfa.finals if block_of[s] in number)
    return ExplicitDfa(dfa.partition, table, 0, finals)


def minimize(dfa: ExplicitDfa) -> ExplicitDfa:
    """
    Minimal complete DFA for the same language of nonempty words.

    Unreachable states are dropped first and letters with identical columns
    are refined as one class. The empty word is never in a language here, so
    when nothing re-enters the initial state its finality is free and the
    smaller of the two quotients is kept.
    """
    order = _reachable(dfa)
    position = np.full(dfa.n_states, -1, dtype=np.int32)
    position[order] = np.arange(len(order), dtype=np.int32)
    table = position[dfa.table[order]]
    finals = frozenset(int(position[s]) for s in dfa.finals if position[s] >= 0)
    trimmed = ExplicitDfa(dfa.partition, table, 0, finals)

    classes = np.unique(table, axis=1)
    block_of = _hopcroft(classes, finals)
    best = _quotient(trimmed, block_of)

    if not np.any(table == 0):
        flipped = finals ^ {0}
        alternative_blocks = _hopcroft(classes, flipped)
        alternative = _quotient(ExplicitDfa(dfa.partition, table, 0, flipped), alternative_blocks)
        if alternative.n_states < best.n_states:
            best = alternative
    return best


#####################################
# Automata Algebra
#####################################


def complement(dfa: ExplicitDfa) -> ExplicitDfa:
    """Same transition system, finals flipped."""
    finals = frozenset(range(dfa.n_states)) - dfa.finals
    return ExplicitDfa(dfa.partition, dfa.table, dfa.initial, finals)


def product_ts(dfas: Sequence[ExplicitDfa]) -> LiftedProduct:
    """
    Reachable synchronous product, numbered breadth-first.

    Raises:
        PartitionError: the components disagree on the partition.
    """
    if not dfas:
        raise ValueError("product needs at least one automaton")
    partition = dfas[0].partition
    for dfa in dfas[1:]:
        if dfa.partition != partition:
            raise PartitionError("product components use different partitions")

    radix = [1]
    for dfa in dfas[:-1]:
        radix.append(radix[-1] * dfa.n_states)
    start = tuple(dfa.initial for dfa in dfas)
    index = {sum(s * w for s, w in zip(start, radix)): 0}
    tuples = [start]
    rows: list[np.ndarray] = []
    head = 0
    while head < len(tuples):
        states = tuples[head]
        head += 1
        keys = np.zeros(dfas[0].n_letters, dtype=np.int64)
        for dfa, state, weight in zip(dfas, states, radix):
            keys += dfa.table[state].astype(np.int64) * weight
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        ids = np.empty(len(unique_keys), dtype=np.int32)
        for k, key in enumerate(unique_keys.tolist()):
            target = index.get(key)
            if target is None:
                target = len(tuples)
                index[key] = target
                tuples.append(tuple((key // weight) % dfa.n_states for dfa, weight in zip(dfas, radix)))
            ids[k] = target
        rows.append(ids[inverse])

    lifted = tuple(
        frozenset(i for i, states in enumerate(tuples) if states[c] in dfa.finals)
        for c, dfa in enumerate(dfas)
    )
    finals = frozenset.intersection(*lifted)
    product = ExplicitDfa(partition, np.vstack(rows), 0, finals)
    return LiftedProduct(product, lifted, tuple(tuples))


def intersect(a: ExplicitDfa, b: ExplicitDfa) -> ExplicitDfa:
    """Minimal DFA for the words accepted by both."""
    return minimize(product_ts([a, b]).dfa)


def boolean_combination(a: ExplicitDfa, b: ExplicitDfa, op: str) -> ExplicitDfa:
    """
    Product of a and b whose finals combine the lifted final sets with op.

    Args:
        op (str): one of and, or, implies, iff.
    """
    try:
        combine = BOOLEAN_OPERATORS[op]
    except KeyError:
        raise ValueError(f"unknown operator '{op}', expected one of {sorted(BOOLEAN_OPERATORS)}") from None
    product = product_ts([a, b])
    in_a = np.zeros(product.n_states, dtype=bool)
    in_b = np.zeros(product.n_states, dtype=bool)
    in_a[list(product.lifted_finals[0])] = True
    in_b[list(product.lifted_finals[1])] = True
    selected = np.flatnonzero(combine(in_a, in_b))
    return ExplicitDfa(a.partition, product.dfa.table, 0, frozenset(selected.tolist()))


#####################################
# Dump Formats
#####################################


def mask_cubes(partition: Partition, mask: np.ndarray) -> list[dict[str, bool]]:
    """Disjoint cubes covering the letters selected by a boolean mask."""
    names = partition.all_vars
    letters = _letters(partition)

    def split(selected: np.ndarray, subset: np.ndarray, depth: int) -> list[dict[str, bool]]:
        if selected.all():
            return [{}]
        if not selected.any():
            return []
        bit = (subset >> depth) & 1
        low = split(selected[bit == 0], subset[bit == 0], depth + 1)
        high = split(selected[bit == 1], subset[bit == 1], depth + 1)
        if low == high:
            return low
        return [{names[depth]: False, **c} for c in low] + [{names[depth]: True, **c} for c in high]

    return split(np.asarray(mask, dtype=bool), letters, 0)


def cube_text(cube: dict[str, bool]) -> str:
    if not cube:
        return "true"
    return " & ".join(name if value else f"!{name}" for name, value in cube.items())


def _edges(dfa: ExplicitDfa) -> Iterable[tuple[int, int, list[dict[str, bool]]]]:
    for source in range(dfa.n_states):
        row = dfa.table[source]
        for target in dict.fromkeys(row.tolist()):
            yield source, target, mask_cubes(dfa.partition, row == target)


def to_text(dfa: ExplicitDfa) -> str:
    """Line-based dump: header, sizes, then one trans line per cube edge."""
    lines = [
        "dfa v1",
        f"states {dfa.n_states}",
        f"initial {dfa.initial}",
        "finals " + " ".join(str(s) for s in sorted(dfa.finals)),
    ]
    for source, target, cubes in _edges(dfa):
        for cube in cubes:
            lines.append(f'trans {source} "{cube_text(cube)}" {target}')
    return "\n".join(line.rstrip() for line in lines) + "\n"


def from_text(text: str, partition: Partition) -> ExplicitDfa:
    """Read the dump written by to_text."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != "dfa v1":
        raise ValueError("missing 'dfa v1' header")
    n_states = initial = None
    finals: frozenset[int] = frozenset()
    edges: list[tuple[int, str, int]] = []
    for line in lines[1:]:
        keyword, _, rest = line.partition(" ")
        if keyword == "states":
            n_states = int(rest)
        elif keyword == "initial":
            initial = int(rest)
        elif keyword == "finals":
            finals = frozenset(int(s) for s in rest.split())
        elif keyword == "trans":
            source, _, tail = rest.partition(" ")
            _, cube, target = tail.split('"')
            edges.append((int(source), cube, int(target)))
        else:
            raise ValueError(f"unexpected line: '{line}'")
    if n_states is None or initial is None:
        raise ValueError("dump needs 'states' and 'initial' lines")

    letters = _letters(partition)
    table = np.full((n_states, len(letters)), -1, dtype=np.int32)
    for source, cube, target in edges:
        care, value = _cube_masks(partition, _parse_cube(cube))
        table[source, (letters & care) == value] = target
    if (table < 0).any():
        raise ValueError("dump does not define a complete transition table")
    return ExplicitDfa(partition, table, initial, finals)


def _parse_cube(text: str) -> dict[str, bool]:
    if text.strip() == "true":
        return {}
    cube = {}
    for literal in text.split("&"):
        literal = literal.strip()
        if literal.startswith("!"):
            cube[literal[1:]] = False
        else:
            cube[literal] = True
    return cube


def to_dot(dfa: ExplicitDfa, name: str = "dfa") -> str:
    """Graphviz DOT with double circles on final states and cube-labeled edges."""
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point, label=""];']
    for state in range(dfa.n_states):
        shape = "doublecircle" if state in dfa.finals else "circle"
        lines.append(f"  s{state} [shape={shape}, label=\"{state}\"];")
    lines.append(f"  init -> s{dfa.initial};")
    for source, target, cubes in _edges(dfa):
        label = " | ".join(cube_text(cube) for cube in cubes)
        lines.append(f'  s{source} -> s{target} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
