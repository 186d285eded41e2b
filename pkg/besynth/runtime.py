"""
runtime.py - execute, simulate and validate synthesized strategies.

A Transducer plays kappa: from the current state it emits the agent
output, consumes the environment input, then advances through eta.

validate() checks the best-effort property on an independent explicit
arena built from fresh translations of E and phi. Each position gets the
best value any agent strategy can achieve from it (winning, pending,
losing) against environments that keep E enforceable; kappa is dominated
when some history it allows ends with a lower value under kappa than the
best possible.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import AbstractSet, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from besynth import dfa_explicit, dfa_symbolic
from besynth.besteffort import BestEffortStrategy, Problem
from besynth.dfa_explicit import ExplicitDfa, LiftedProduct
from besynth.errors import BoundsExceededError, PartitionError, UndeclaredAtomError
from besynth.ltlf import Partition
from utils.utils_logger import logger

#####################################
# Types
#####################################

EnvInput = Union[AbstractSet[str], Mapping[str, bool]]

FLAG_NAMES = ("conjunction", "violation", "implication")


def _env_letter(partition: Partition, env_input: EnvInput) -> frozenset[str]:
    """Normalize an environment input to the set of true X variables."""
    if isinstance(env_input, Mapping):
        names = {name for name, value in env_input.items() if value}
        unknown = set(env_input) - set(partition.all_vars)
    else:
        names = set(env_input)
        unknown = names - set(partition.all_vars)
    if unknown:
        raise UndeclaredAtomError(sorted(unknown)[0])
    agent = names & set(partition.agent_vars)
    if agent:
        raise PartitionError(f"environment input sets agent variables {sorted(agent)}")
    return frozenset(names)


#####################################
# Transducer
#####################################


class Transducer:
    """Mealy-style executor of a best-effort strategy."""

    def __init__(self, strategy: BestEffortStrategy):
        self.strategy = strategy
        self.arena = strategy.arena
        self.kappa = strategy.kappa
        self.reset()

    def reset(self) -> None:
        self.state: dict[str, bool] = dict(self.arena.initial)
        self.history_length = 0

    def output(self) -> dict[str, bool]:
        """Agent output for the current state."""
        return self.kappa(self.state)

    def consume(self, env_input: EnvInput) -> frozenset[str]:
        """Play one round and return the letter (true X and Y variables)."""
        inputs = _env_letter(self.arena.partition, env_input)
        outputs = {y for y, value in self.output().items() if value}
        letter = inputs | frozenset(outputs)
        self.state = dfa_symbolic.step(self.arena, self.state, letter)
        self.history_length += 1
        return letter

    def flags(self) -> dict[str, bool]:
        """Which lifted objectives the current state satisfies."""
        m = self.arena.manager
        return {
            name: m.evaluate(predicate, self.state)
            for name, predicate in zip(FLAG_NAMES, (
                self.strategy.objectives.conjunction,
                self.strategy.objectives.violation,
                self.strategy.objectives.implication,
            ))
        }


def induce(strategy: BestEffortStrategy) -> Transducer:
    """Transducer positioned at the initial state."""
    return Transducer(strategy)


#####################################
# Plays
#####################################


@dataclass
class PlayRecord:
    """
    One play: trace[i] is the i-th letter, states[i] the state before it.

    flags[i] are the objective flags of states[i + 1].
    """

    trace: list[frozenset[str]] = field(default_factory=list)
    states: list[dict[str, bool]] = field(default_factory=list)
    outputs: list[dict[str, bool]] = field(default_factory=list)
    flags: list[dict[str, bool]] = field(default_factory=list)
    pending_output: dict[str, bool] = field(default_factory=dict)

    def to_json_lines(self) -> str:
        lines = []
        for i, letter in enumerate(self.trace):
            lines.append(json.dumps({
                "step": i,
                "letter": sorted(letter),
                "outputs": {y: int(v) for y, v in self.outputs[i].items()},
                "state": {z: int(v) for z, v in self.states[i + 1].items()},
                "flags": self.flags[i],
            }))
        return "".join(line + "\n" for line in lines)


def simulate(t: Transducer, env_inputs: Iterable[EnvInput]) -> PlayRecord:
    """Replay the play of kappa against the given inputs, from the initial state."""
    t.reset()
    record = PlayRecord(states=[dict(t.state)])
    for env_input in env_inputs:
        record.outputs.append(t.output())
        record.trace.append(t.consume(env_input))
        record.states.append(dict(t.state))
        record.flags.append(t.flags())
    record.pending_output = t.output()
    logger.debug(f"Simulated {len(record.trace)} steps")
    return record


def transducer_to_dot(strategy: BestEffortStrategy, name: str = "kappa", max_states: int = 4096) -> str:
    """DOT of the states kappa can reach; edges labeled 'X-cube / Y-assignment'."""
    arena = strategy.arena
    env_partition = Partition(arena.env_vars, ())
    n_inputs = 1 << len(arena.env_vars)

    def key(z: Mapping[str, bool]) -> tuple[bool, ...]:
        return tuple(z[v] for v in arena.state_vars)

    start = dict(arena.initial)
    index = {key(start): 0}
    states = [start]
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point, label=""];', "  init -> q0;"]
    head = 0
    while head < len(states) and head < max_states:
        z = states[head]
        outputs = strategy.kappa(z)
        y_text = " & ".join(y if v else f"!{y}" for y, v in outputs.items()) or "true"
        y_letter = frozenset(y for y, v in outputs.items() if v)
        targets = np.empty(n_inputs, dtype=np.int64)
        for x in range(n_inputs):
            x_letter = dfa_explicit.letter_names(env_partition, x)
            successor = dfa_symbolic.step(arena, z, x_letter | y_letter)
            if key(successor) not in index:
                index[key(successor)] = len(states)
                states.append(successor)
            targets[x] = index[key(successor)]
        lines.append(f'  q{head} [label="{head}"];')
        for target in dict.fromkeys(targets.tolist()):
            cubes = dfa_explicit.mask_cubes(env_partition, targets == target)
            x_text = " | ".join(dfa_explicit.cube_text(c) for c in cubes)
            lines.append(f'  q{head} -> q{target} [label="{x_text} / {y_text}"];')
        head += 1
    lines.append("}")
    return "\n".join(lines) + "\n"


#####################################
# Validation
#####################################

UNDOMINATED = "undominated"
DOMINATED = "dominated"
UNTESTED = "untested"

LOSING, PENDING, WINNING = 0, 1, 2
VALUE_NAMES = {LOSING: "losing", PENDING: "pending", WINNING: "winning"}

POSITIONAL_CAVEAT = (
    "values are computed on the explicit product of the E and goal automata, "
    "so environments and competing agent strategies are compared through "
    "positional behaviour on that arena only"
)


@dataclass(frozen=True)
class ValidationBounds:
    """Largest explicit arena validate() will build."""

    states: int = 8
    env_props: int = 2


@dataclass
class ValidationReport:
    status: str
    algorithm: str
    method: str = "positional-value"
    arena_states: int = 0
    joint_states: int = 0
    enforces: Optional[bool] = None
    witness: Optional[str] = None
    reason: Optional[str] = None
    caveat: str = POSITIONAL_CAVEAT

    @property
    def dominated(self) -> bool:
        return self.status == DOMINATED

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ExplicitArena:
    """
    Explicit game arena E x phi x start with per-position values.

    successors[p, y, x] is the position after agent letter y and
    environment letter x. safe marks positions from which the environment
    can keep every prefix inside E; best marks the highest value any agent
    strategy achieves there.
    """

    partition: Partition
    product: LiftedProduct
    successors: np.ndarray
    goal: np.ndarray
    safe: np.ndarray
    best: np.ndarray

    @property
    def initial(self) -> int:
        return self.product.dfa.initial


def start_dfa(partition: Partition) -> ExplicitDfa:
    """Two states: the initial position and everything after the first step."""
    n_letters = 1 << len(partition.all_vars)
    return ExplicitDfa(partition, np.ones((2, n_letters), dtype=np.int32), 0, frozenset({1}))


def _safe_region(good: np.ndarray, successors: np.ndarray) -> np.ndarray:
    """Greatest set inside good where every agent letter has a safe answer."""
    safe = good.copy()
    while True:
        shrunk = safe & safe[successors].any(axis=2).all(axis=1)
        if (shrunk == safe).all():
            return safe
        safe = shrunk


def _best_values(goal: np.ndarray, safe: np.ndarray, successors: np.ndarray) -> np.ndarray:
    allowed = safe[successors]
    winning = goal & safe
    while True:
        forced = (~allowed | winning[successors]).all(axis=2).any(axis=1)
        grown = winning | (safe & forced)
        if (grown == winning).all():
            break
        winning = grown
    reachable = goal & safe
    while True:
        grown = reachable | (safe & (allowed & reachable[successors]).any(axis=(1, 2)))
        if (grown == reachable).all():
            break
        reachable = grown
    return np.where(winning, WINNING, np.where(reachable, PENDING, LOSING))


def explicit_arena(problem: Problem, bounds: ValidationBounds = ValidationBounds()) -> ExplicitArena:
    """
    Build and solve the explicit arena.

    Raises:
        BoundsExceededError: too many environment propositions or positions.
    """
    partition = problem.partition
    if len(partition.env_vars) > bounds.env_props:
        raise BoundsExceededError(
            f"{len(partition.env_vars)} environment propositions exceed the bound of {bounds.env_props}"
        )
    a_env = dfa_explicit.translate(problem.env_spec, partition)
    a_goal = dfa_explicit.translate(problem.goal, partition)
    core = dfa_explicit.product_ts([a_env, a_goal])
    if core.n_states > bounds.states:
        raise BoundsExceededError(f"{core.n_states} arena states exceed the bound of {bounds.states}")

    product = dfa_explicit.product_ts([a_env, a_goal, start_dfa(partition)])
    n = product.n_states
    n_x = 1 << len(partition.env_vars)
    n_y = 1 << len(partition.agent_vars)
    successors = product.dfa.table.reshape(n, n_y, n_x)
    in_env, in_goal, started = (np.zeros(n, dtype=bool) for _ in range(3))
    in_env[list(product.lifted_finals[0])] = True
    in_goal[list(product.lifted_finals[1])] = True
    started[list(product.lifted_finals[2])] = True
    good = ~started | in_env
    goal = started & in_goal
    safe = _safe_region(good, successors)
    best = _best_values(goal, safe, successors)
    return ExplicitArena(partition, product, successors, goal, safe, best)


def validate(
    problem: Problem,
    strategy: BestEffortStrategy,
    bounds: ValidationBounds = ValidationBounds(),
) -> ValidationReport:
    """
    Check that no agent strategy achieves a better value than kappa anywhere kappa can go.

    Returns an 'untested' report when the explicit arena exceeds the bounds.
    """
    try:
        arena = explicit_arena(problem, bounds)
    except BoundsExceededError as e:
        logger.warning(f"Validation skipped: {e}")
        return ValidationReport(UNTESTED, strategy.algorithm, reason=str(e))

    symbolic = strategy.arena
    partition = problem.partition
    n_x = 1 << len(partition.env_vars)
    p0 = arena.initial
    if not arena.safe[p0]:
        logger.warning("E is not enforceable from the initial position; dominance holds vacuously")
        return ValidationReport(
            UNDOMINATED, strategy.algorithm, arena_states=arena.product.n_states,
            reason="no environment strategy enforces E",
        )

    def key(z: Mapping[str, bool]) -> tuple[bool, ...]:
        return tuple(bool(z[v]) for v in symbolic.state_vars)

    start = (p0, key(symbolic.initial))
    assignments = {start[1]: dict(symbolic.initial)}
    index = {start: 0}
    joints = [start]
    parents: list[Optional[tuple[int, frozenset[str]]]] = [None]
    edges: list[list[int]] = []
    queue = deque([0])
    while queue:
        j = queue.popleft()
        p, zk = joints[j]
        targets: list[int] = []
        if not arena.goal[p]:
            z = assignments[zk]
            outputs = strategy.kappa(z)
            y_index = sum(1 << i for i, y in enumerate(partition.agent_vars) if outputs[y])
            y_letter = frozenset(y for y, v in outputs.items() if v)
            for x in range(n_x):
                p_next = int(arena.successors[p, y_index, x])
                if not arena.safe[p_next]:
                    continue
                letter = dfa_explicit.letter_names(partition, x) | y_letter
                z_next = dfa_symbolic.step(symbolic, z, letter)
                joint = (p_next, key(z_next))
                assignments.setdefault(joint[1], z_next)
                if joint not in index:
                    index[joint] = len(joints)
                    joints.append(joint)
                    parents.append((j, letter))
                    queue.append(index[joint])
                targets.append(index[joint])
        edges.append(targets)

    values = _strategy_values([arena.goal[p] for p, _ in joints], edges)
    report = ValidationReport(
        UNDOMINATED,
        strategy.algorithm,
        arena_states=arena.product.n_states,
        joint_states=len(joints),
        enforces=values[0] == WINNING,
    )
    for j, (p, _) in enumerate(joints):
        if values[j] < arena.best[p]:
            report.status = DOMINATED
            report.witness = (
                f"after {_history(parents, j)} the strategy is {VALUE_NAMES[values[j]]} "
                f"but {VALUE_NAMES[int(arena.best[p])]} is achievable"
            )
            logger.warning(f"Strategy of algorithm {strategy.algorithm} is dominated: {report.witness}")
            break
    else:
        logger.info(f"Strategy of algorithm {strategy.algorithm} is undominated on {len(joints)} joint states")
    return report


def _strategy_values(goal: Sequence[bool], edges: Sequence[Sequence[int]]) -> list[int]:
    """Value of each joint state when the agent follows kappa."""
    winning = list(goal)
    changed = True
    while changed:
        changed = False
        for j, targets in enumerate(edges):
            if not winning[j] and targets and all(winning[t] for t in targets):
                winning[j] = changed = True
    reachable = list(goal)
    changed = True
    while changed:
        changed = False
        for j, targets in enumerate(edges):
            if not reachable[j] and any(reachable[t] for t in targets):
                reachable[j] = changed = True
    return [WINNING if w else PENDING if r else LOSING for w, r in zip(winning, reachable)]


def _history(parents: Sequence[Optional[tuple[int, frozenset[str]]]], j: int) -> str:
    letters = []
    while parents[j] is not None:
        j, letter = parents[j]
        letters.append("{" + ", ".join(sorted(letter)) + "}")
    return "[" + ", ".join(reversed(letters)) + "]"
