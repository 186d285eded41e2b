"""
bdd.py - reduced ordered binary decision diagrams.

A Manager owns a hash-consed unique table of nodes and a computed table
for if-then-else. Variables are ordered by declaration. Handles returned to
callers are DdNode objects; two handles are equal iff they denote the same
Boolean function.

A Manager is single-threaded. Nodes from different managers never mix.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional

from besynth.errors import (
    ManagerMismatchError,
    ResourceLimitError,
    UnknownVariableError,
    UnsatisfiableError,
)
from utils.utils_config import get_node_limit
from utils.utils_logger import logger

#####################################
# Constants
#####################################

FALSE_ID = 0
TRUE_ID = 1
TERMINAL_LEVEL = 1 << 30

APPLY_OPERATORS = ("and", "or", "xor", "implies", "iff")
QUANTIFIERS = ("exists", "forall")

DEFAULT_GC_THRESHOLD = 100_000


#####################################
# Node Handles
#####################################


class DdNode:
    """Reference-counted handle to a node of one Manager."""

    __slots__ = ("manager", "node")

    def __init__(self, manager: "Manager", node: int):
        self.manager = manager
        self.node = node
        manager._ref[node] += 1

    def __del__(self):
        try:
            self.manager._ref[self.node] -= 1
        except Exception:
            pass

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DdNode):
            return NotImplemented
        return self.manager is other.manager and self.node == other.node

    def __hash__(self) -> int:
        return hash((id(self.manager), self.node))

    def __repr__(self) -> str:
        if self.node == TRUE_ID:
            return "DdNode(true)"
        if self.node == FALSE_ID:
            return "DdNode(false)"
        return f"DdNode({self.node}, var={self.var})"

    def __invert__(self) -> "DdNode":
        return self.manager.negate(self)

    def __and__(self, other: "DdNode") -> "DdNode":
        return self.manager.apply("and", self, other)

    def __or__(self, other: "DdNode") -> "DdNode":
        return self.manager.apply("or", self, other)

    def __xor__(self, other: "DdNode") -> "DdNode":
        return self.manager.apply("xor", self, other)

    def implies(self, other: "DdNode") -> "DdNode":
        return self.manager.apply("implies", self, other)

    def iff(self, other: "DdNode") -> "DdNode":
        return self.manager.apply("iff", self, other)

    @property
    def is_true(self) -> bool:
        return self.node == TRUE_ID

    @property
    def is_false(self) -> bool:
        return self.node == FALSE_ID

    @property
    def is_constant(self) -> bool:
        return self.node <= TRUE_ID

    @property
    def var(self) -> Optional[str]:
        """Name of the top variable, None for constants."""
        if self.is_constant:
            return None
        return self.manager._names[self.manager._level[self.node]]

    @property
    def low(self) -> "DdNode":
        return DdNode(self.manager, self.manager._low[self.node])

    @property
    def high(self) -> "DdNode":
        return DdNode(self.manager, self.manager._high[self.node])


#####################################
# Manager
#####################################


class Manager:
    """
    Unique table, computed table and variable order for a family of BDDs.

    Args:
        node_limit (int, optional): cap on live nodes; defaults to BESYNTH_NODE_LIMIT.
        cache_enabled (bool): memoize if-then-else results.
    """

    def __init__(self, node_limit: Optional[int] = None, cache_enabled: bool = True):
        self.node_limit = node_limit if node_limit is not None else get_node_limit()
        self.cache_enabled = cache_enabled
        self._names: list[str] = []
        self._levels: dict[str, int] = {}
        self._level: list[int] = [TERMINAL_LEVEL, TERMINAL_LEVEL]
        self._low: list[int] = [FALSE_ID, TRUE_ID]
        self._high: list[int] = [FALSE_ID, TRUE_ID]
        self._ref: list[int] = [0, 0]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._free: list[int] = []
        self._ite_cache: dict[tuple[int, int, int], int] = {}
        self._gc_threshold = DEFAULT_GC_THRESHOLD
        self.false = DdNode(self, FALSE_ID)
        self.true = DdNode(self, TRUE_ID)

    #####################################
    # Variables
    #####################################

    def declare(self, *names: str) -> None:
        """Append variables to the order; already declared names are kept in place."""
        for name in names:
            if name not in self._levels:
                self._levels[name] = len(self._names)
                self._names.append(name)

    @property
    def var_names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def level_of(self, name: str) -> int:
        try:
            return self._levels[name]
        except KeyError:
            raise UnknownVariableError(name) from None

    def var(self, name: str) -> DdNode:
        return DdNode(self, self._make(self.level_of(name), FALSE_ID, TRUE_ID))

    def constant(self, value: bool) -> DdNode:
        return self.true if value else self.false

    def cube(self, assignment: Mapping[str, bool]) -> DdNode:
        """Conjunction of literals for a (partial) assignment."""
        literals = sorted(
            ((self.level_of(name), bool(value)) for name, value in assignment.items()),
            reverse=True,
        )
        u = TRUE_ID
        for level, value in literals:
            u = self._make(level, FALSE_ID, u) if value else self._make(level, u, FALSE_ID)
        return DdNode(self, u)

    @property
    def node_count(self) -> int:
        """Number of live internal nodes in the unique table."""
        return len(self._unique)

    #####################################
    # Core Construction
    #####################################

    def _make(self, level: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (level, low, high)
        u = self._unique.get(key)
        if u is not None:
            return u
        if len(self._unique) >= self.node_limit:
            raise ResourceLimitError("BDD node", self.node_limit)
        if self._free:
            u = self._free.pop()
            self._level[u] = level
            self._low[u] = low
            self._high[u] = high
            self._ref[u] = 0
        else:
            u = len(self._level)
            self._level.append(level)
            self._low.append(low)
            self._high.append(high)
            self._ref.append(0)
        self._unique[key] = u
        return u

    def _cofactors(self, u: int, level: int) -> tuple[int, int]:
        if self._level[u] == level:
            return self._low[u], self._high[u]
        return u, u

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE_ID:
            return g
        if f == FALSE_ID:
            return h
        if g == h:
            return g
        if g == TRUE_ID and h == FALSE_ID:
            return f
        key = (f, g, h)
        if self.cache_enabled:
            cached = self._ite_cache.get(key)
            if cached is not None:
                return cached
        top = min(self._level[f], self._level[g], self._level[h])
        f0, f1 = self._cofactors(f, top)
        g0, g1 = self._cofactors(g, top)
        h0, h1 = self._cofactors(h, top)
        u = self._make(top, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        if self.cache_enabled:
            self._ite_cache[key] = u
        return u

    def _check(self, *nodes: DdNode) -> None:
        for node in nodes:
            if node.manager is not self:
                raise ManagerMismatchError("node belongs to a different manager")

    #####################################
    # Boolean Operations
    #####################################

    def negate(self, f: DdNode) -> DdNode:
        self._check(f)
        return DdNode(self, self._ite(f.node, FALSE_ID, TRUE_ID))

    def ite(self, c: DdNode, t: DdNode, e: DdNode) -> DdNode:
        self._check(c, t, e)
        return DdNode(self, self._ite(c.node, t.node, e.node))

    def apply(self, op: str, f: DdNode, g: DdNode) -> DdNode:
        """
        Combine two functions pointwise.

        Args:
            op (str): one of and, or, xor, implies, iff.
        """
        self._check(f, g)
        a, b = f.node, g.node
        if op == "and":
            u = self._ite(a, b, FALSE_ID)
        elif op == "or":
            u = self._ite(a, TRUE_ID, b)
        elif op == "xor":
            u = self._ite(a, self._ite(b, FALSE_ID, TRUE_ID), b)
        elif op == "implies":
            u = self._ite(a, b, TRUE_ID)
        elif op == "iff":
            u = self._ite(a, b, self._ite(b, FALSE_ID, TRUE_ID))
        else:
            raise ValueError(f"unknown operator '{op}', expected one of {APPLY_OPERATORS}")
        return DdNode(self, u)

    def conjoin(self, nodes: Iterable[DdNode]) -> DdNode:
        result = self.true
        for node in nodes:
            result = self.apply("and", result, node)
        return result

    def disjoin(self, nodes: Iterable[DdNode]) -> DdNode:
        result = self.false
        for node in nodes:
            result = self.apply("or", result, node)
        return result

    #####################################
    # Quantification and Substitution
    #####################################

    def quantify(self, kind: str, names: Iterable[str], f: DdNode) -> DdNode:
        """Existential or universal abstraction of the named variables."""
        if kind not in QUANTIFIERS:
            raise ValueError(f"unknown quantifier '{kind}', expected one of {QUANTIFIERS}")
        self._check(f)
        levels = frozenset(self.level_of(name) for name in names)
        if not levels:
            return f
        memo: dict[int, int] = {}
        combine_exists = kind == "exists"
        top = max(levels)

        def walk(u: int) -> int:
            if u <= TRUE_ID or self._level[u] > top:
                return u
            result = memo.get(u)
            if result is not None:
                return result
            lo = walk(self._low[u])
            hi = walk(self._high[u])
            level = self._level[u]
            if level in levels:
                if combine_exists:
                    result = self._ite(lo, TRUE_ID, hi)
                else:
                    result = self._ite(lo, hi, FALSE_ID)
            else:
                result = self._make(level, lo, hi)
            memo[u] = result
            return result

        return DdNode(self, walk(f.node))

    def exists(self, names: Iterable[str], f: DdNode) -> DdNode:
        return self.quantify("exists", names, f)

    def forall(self, names: Iterable[str], f: DdNode) -> DdNode:
        return self.quantify("forall", names, f)

    def vector_compose(self, f: DdNode, substitution: Mapping[str, DdNode]) -> DdNode:
        """Replace every named variable by its function, all at once."""
        self._check(f, *substitution.values())
        by_level = {self.level_of(name): g.node for name, g in substitution.items()}
        if not by_level:
            return f
        top = max(by_level)
        memo: dict[int, int] = {}

        def walk(u: int) -> int:
            if u <= TRUE_ID or self._level[u] > top:
                return u
            result = memo.get(u)
            if result is not None:
                return result
            level = self._level[u]
            lo = walk(self._low[u])
            hi = walk(self._high[u])
            g = by_level.get(level)
            if g is None:
                g = self._make(level, FALSE_ID, TRUE_ID)
            result = self._ite(g, hi, lo)
            memo[u] = result
            return result

        return DdNode(self, walk(f.node))

    def restrict(self, f: DdNode, assignment: Mapping[str, bool]) -> DdNode:
        """Cofactor by a partial assignment."""
        self._check(f)
        by_level = {self.level_of(name): bool(value) for name, value in assignment.items()}
        if not by_level:
            return f
        top = max(by_level)
        memo: dict[int, int] = {}

        def walk(u: int) -> int:
            if u <= TRUE_ID or self._level[u] > top:
                return u
            result = memo.get(u)
            if result is not None:
                return result
            level = self._level[u]
            if level in by_level:
                result = walk(self._high[u] if by_level[level] else self._low[u])
            else:
                result = self._make(level, walk(self._low[u]), walk(self._high[u]))
            memo[u] = result
            return result

        return DdNode(self, walk(f.node))

    #####################################
    # Queries
    #####################################

    def evaluate(self, f: DdNode, assignment: Mapping[str, bool]) -> bool:
        """Value of f under an assignment covering its support."""
        self._check(f)
        u = f.node
        while u > TRUE_ID:
            name = self._names[self._level[u]]
            try:
                value = assignment[name]
            except KeyError:
                raise UnknownVariableError(name) from None
            u = self._high[u] if value else self._low[u]
        return u == TRUE_ID

    def support(self, f: DdNode) -> set[str]:
        self._check(f)
        seen: set[int] = set()
        levels: set[int] = set()
        stack = [f.node]
        while stack:
            u = stack.pop()
            if u <= TRUE_ID or u in seen:
                continue
            seen.add(u)
            levels.add(self._level[u])
            stack.append(self._low[u])
            stack.append(self._high[u])
        return {self._names[level] for level in levels}

    def sat_count(self, f: DdNode, names: Iterable[str]) -> int:
        """Number of satisfying assignments over the given variables."""
        self._check(f)
        levels = sorted(self.level_of(name) for name in set(names))
        position = {level: index for index, level in enumerate(levels)}
        width = len(levels)
        missing = self.support(f) - {self._names[level] for level in levels}
        if missing:
            raise ValueError(f"variables {sorted(missing)} are in the support but not counted")
        memo: dict[int, int] = {}

        def pos(u: int) -> int:
            return width if u <= TRUE_ID else position[self._level[u]]

        def count(u: int) -> int:
            if u == FALSE_ID:
                return 0
            if u == TRUE_ID:
                return 1
            if u in memo:
                return memo[u]
            here = pos(u)
            lo, hi = self._low[u], self._high[u]
            total = count(lo) * 2 ** (pos(lo) - here - 1) + count(hi) * 2 ** (pos(hi) - here - 1)
            memo[u] = total
            return total

        return count(f.node) * 2 ** pos(f.node)

    def pick_witness(self, f: DdNode, outputs: Iterable[str]) -> dict[str, bool]:
        """
        One assignment to the outputs that extends to a model of f.

        Other variables are existentially abstracted first. Walking down in
        variable order, the false branch wins whenever it is satisfiable, so
        the result is the smallest witness under the declared order.

        Raises:
            UnsatisfiableError: f is unsatisfiable.
        """
        self._check(f)
        output_names = list(outputs)
        for name in output_names:
            self.level_of(name)
        others = self.support(f) - set(output_names)
        g = self.exists(others, f)
        if g.is_false:
            raise UnsatisfiableError("no witness for an unsatisfiable function")
        witness = {name: False for name in output_names}
        u = g.node
        while u > TRUE_ID:
            if self._low[u] != FALSE_ID:
                u = self._low[u]
            else:
                witness[self._names[self._level[u]]] = True
                u = self._high[u]
        return witness

    def iter_cubes(self, f: DdNode) -> Iterator[dict[str, bool]]:
        """Disjoint cubes (paths to true) covering f."""
        self._check(f)

        def walk(u: int, path: dict[str, bool]) -> Iterator[dict[str, bool]]:
            if u == FALSE_ID:
                return
            if u == TRUE_ID:
                yield dict(path)
                return
            name = self._names[self._level[u]]
            path[name] = False
            yield from walk(self._low[u], path)
            path[name] = True
            yield from walk(self._high[u], path)
            del path[name]

        yield from walk(f.node, {})

    def split(self, f: DdNode, names: Iterable[str]) -> Iterator[tuple[dict[str, bool], DdNode]]:
        """
        Yield disjoint (cube, cofactor) pairs that partition f on the named variables.

        The named variables must come before every other variable of the
        support in the order; each cofactor is free of them.
        """
        self._check(f)
        levels = frozenset(self.level_of(name) for name in names)

        def walk(u: int, path: dict[str, bool]) -> Iterator[tuple[dict[str, bool], DdNode]]:
            if u <= TRUE_ID or self._level[u] not in levels:
                yield dict(path), DdNode(self, u)
                return
            name = self._names[self._level[u]]
            path[name] = False
            yield from walk(self._low[u], path)
            path[name] = True
            yield from walk(self._high[u], path)
            del path[name]

        yield from walk(f.node, {})

    def to_expr(self, f: DdNode) -> str:
        """Stable sum-of-cubes text, e.g. '(a & !b) | c'."""
        if f.is_true:
            return "true"
        if f.is_false:
            return "false"
        terms = []
        for cube in self.iter_cubes(f):
            literals = [name if value else f"!{name}" for name, value in cube.items()]
            terms.append(" & ".join(literals) if literals else "true")
        if len(terms) == 1:
            return terms[0]
        return " | ".join(f"({term})" if " & " in term else term for term in terms)

    def to_dot(self, f: DdNode, name: str = "bdd") -> str:
        """Graphviz DOT text for the DAG rooted at f (dashed edges are low)."""
        self._check(f)
        lines = [f"digraph {name} {{", '  t1 [shape=box, label="1"];', '  t0 [shape=box, label="0"];']
        seen: set[int] = set()
        stack = [f.node]
        while stack:
            u = stack.pop()
            if u <= TRUE_ID or u in seen:
                continue
            seen.add(u)
            lines.append(f'  n{u} [label="{self._names[self._level[u]]}"];')
            for child, style in ((self._low[u], "dashed"), (self._high[u], "solid")):
                target = f"t{child}" if child <= TRUE_ID else f"n{child}"
                lines.append(f"  n{u} -> {target} [style={style}];")
                stack.append(child)
        if f.node <= TRUE_ID:
            lines.append(f"  root -> t{f.node};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    #####################################
    # Garbage Collection
    #####################################

    def collect_garbage(self) -> int:
        """Free nodes unreachable from live handles; clears the computed table."""
        marked = {FALSE_ID, TRUE_ID}
        stack = [u for u, count in enumerate(self._ref) if count > 0 and u > TRUE_ID]
        while stack:
            u = stack.pop()
            if u in marked:
                continue
            marked.add(u)
            stack.append(self._low[u])
            stack.append(self._high[u])
        freed = 0
        for key, u in list(self._unique.items()):
            if u not in marked:
                del self._unique[key]
                self._free.append(u)
                freed += 1
        self._ite_cache.clear()
        logger.debug(f"BDD garbage collection freed {freed} nodes, {len(self._unique)} live")
        return freed

    def maybe_collect(self) -> int:
        """Collect when the unique table has grown past the adaptive threshold."""
        if len(self._unique) < self._gc_threshold:
            return 0
        freed = self.collect_garbage()
        self._gc_threshold = max(self._gc_threshold, 2 * len(self._unique))
        return freed
