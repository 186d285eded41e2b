"""
games.py - reachability games on symbolic DFAs.

The agent moves first in every round: it picks Y from the current state,
then the environment picks X and the arena advances through eta. Both
games grow a relation t over Z and Y from t = f:

    adversarial:  t' = t | (~w & forall X. w(eta))
    cooperative:  t' = t | (~w & exists X. w(eta))
    w' = exists Y. t'

until w stops growing. Positional strategies come out of t by Boolean
synthesis with a false-first tie-break.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from besynth.bdd import DdNode, Manager
from besynth.dfa_symbolic import SymbolicDfa
from utils.utils_logger import logger

#####################################
# Constants
#####################################

ADVERSARIAL = "adversarial"
COOPERATIVE = "cooperative"
MODES = (ADVERSARIAL, COOPERATIVE)

TRUTH_TABLE_LIMIT = 16

#####################################
# Strategies
#####################################


class PositionalStrategy:
    """
    Map from state assignments to agent outputs.

    One Boolean function over Z per agent variable. Calling the strategy
    on a state assignment returns the output assignment.
    """

    def __init__(self, manager: Manager, state_vars: Iterable[str], functions: Mapping[str, DdNode]):
        self.manager = manager
        self.state_vars = tuple(state_vars)
        self.functions = dict(functions)

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(self.functions)

    def __call__(self, z: Mapping[str, bool]) -> dict[str, bool]:
        assignment = {name: bool(z[name]) for name in self.state_vars}
        return {y: self.manager.evaluate(fn, assignment) for y, fn in self.functions.items()}

    def relation(self) -> DdNode:
        """Graph of the strategy as a predicate over Z and Y."""
        m = self.manager
        return m.conjoin(m.var(y).iff(fn) for y, fn in self.functions.items())

    def with_output(self, name: str, fn: DdNode) -> "PositionalStrategy":
        """Copy with one output function replaced."""
        if name not in self.functions:
            raise KeyError(f"'{name}' is not an output of this strategy")
        functions = dict(self.functions)
        functions[name] = fn
        return PositionalStrategy(self.manager, self.state_vars, functions)

    def truth_table(self) -> list[tuple[dict[str, bool], dict[str, bool]]]:
        """All (state, output) rows; only for small state spaces."""
        if len(self.state_vars) > TRUTH_TABLE_LIMIT:
            raise ValueError(f"truth table over {len(self.state_vars)} state variables is too large")
        rows = []
        for code in range(1 << len(self.state_vars)):
            z = {name: bool(code >> j & 1) for j, name in enumerate(self.state_vars)}
            rows.append((z, self(z)))
        return rows

    def dump(self) -> str:
        lines = [f"{y} = {self.manager.to_expr(fn)}" for y, fn in self.functions.items()]
        return "\n".join(lines) + "\n"


def boolean_synthesis(
    relation: DdNode,
    region: DdNode,
    outputs: Iterable[str],
    state_vars: Iterable[str],
) -> PositionalStrategy:
    """
    Extract one output function per Y variable from a relation over Z and Y.

    Outputs are fixed in variable order; an output is true only where
    false admits no completion. Off the region every output is false.
    """
    m = relation.manager
    outputs = list(outputs)
    ordered = sorted(outputs, key=m.level_of)
    functions: dict[str, DdNode] = {}
    current = relation
    for i, y in enumerate(ordered):
        rest = ordered[i + 1:]
        refuse = m.exists(rest, m.restrict(current, {y: False}))
        fn = region & ~refuse
        functions[y] = fn
        current = m.vector_compose(current, {y: fn})
    return PositionalStrategy(m, state_vars, {y: functions[y] for y in outputs})


#####################################
# Game Solutions
#####################################


@dataclass(eq=False)
class GameSolution:
    """
    Fixpoint of one game.

    Attributes:
        winning_region: w (or the cooperative w-hat) over Z.
        strategy_relation: t over Z and Y with exists Y. t == w.
        positional_strategy: tau or gamma, None until extracted.
        iterations: number of growth steps of w.
    """

    arena: SymbolicDfa
    mode: str
    winning_region: DdNode
    strategy_relation: DdNode
    iterations: int
    positional_strategy: Optional[PositionalStrategy] = field(default=None)

    def wins(self, z: Mapping[str, bool]) -> bool:
        assignment = {name: bool(z[name]) for name in self.arena.state_vars}
        return self.arena.manager.evaluate(self.winning_region, assignment)

    def extract(self) -> PositionalStrategy:
        """Run Boolean synthesis once and keep the result."""
        if self.positional_strategy is None:
            self.positional_strategy = boolean_synthesis(
                self.strategy_relation,
                self.winning_region,
                self.arena.agent_vars,
                self.arena.state_vars,
            )
        return self.positional_strategy


def _check_objective(arena: SymbolicDfa, f: DdNode) -> None:
    extra = arena.manager.support(f) - set(arena.state_vars)
    if extra:
        raise ValueError(f"objective mentions non-state variables {sorted(extra)}")


def solve(arena: SymbolicDfa, f: DdNode, mode: str, synthesize: bool = True) -> GameSolution:
    """
    Least fixpoint of the reachability game for objective f.

    Args:
        arena (SymbolicDfa): the transition system.
        f (DdNode): target predicate over the arena's state variables.
        mode (str): adversarial or cooperative.
        synthesize (bool): also extract the positional strategy.
    """
    if mode not in MODES:
        raise ValueError(f"unknown game mode '{mode}', expected one of {MODES}")
    _check_objective(arena, f)
    m = arena.manager
    quantify = m.forall if mode == ADVERSARIAL else m.exists
    t = w = f
    iterations = 0
    while not w.is_true:
        moves = quantify(arena.env_vars, m.vector_compose(w, arena.eta))
        t_next = t | (~w & moves)
        w_next = m.exists(arena.agent_vars, t_next)
        if w_next == w:
            break
        t, w = t_next, w_next
        iterations += 1
        logger.debug(f"{mode} iteration {iterations}: {m.node_count} live nodes")
        m.maybe_collect()
    logger.info(f"{mode} game solved after {iterations} iterations")
    solution = GameSolution(arena, mode, w, t, iterations)
    if synthesize:
        solution.extract()
    return solution


def solve_adversarial(arena: SymbolicDfa, f: DdNode, synthesize: bool = True) -> GameSolution:
    """Agent forces f against every environment."""
    return solve(arena, f, ADVERSARIAL, synthesize)


def solve_cooperative(arena: SymbolicDfa, f: DdNode, synthesize: bool = True) -> GameSolution:
    """Agent reaches f with some environment's help."""
    return solve(arena, f, COOPERATIVE, synthesize)


def env_winning_region(arena: SymbolicDfa, f: DdNode) -> DdNode:
    """States from which the environment keeps the play out of f forever."""
    return ~solve_adversarial(arena, f, synthesize=False).winning_region
