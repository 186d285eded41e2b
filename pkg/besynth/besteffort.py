"""
besteffort.py - best-effort synthesis pipelines.

Every pipeline ends in the same three games on one symbolic arena:

1. adversarial game for E -> phi gives the winning region W_ag and tau,
2. the environment region for not-E gives the states where E is still
   enforceable; the arena is restricted to it,
3. cooperative game for E and phi on the restricted arena gives gamma,

and kappa plays tau inside W_ag and gamma elsewhere. The pipelines differ
in how the arena is built:

    "1"  three translations (E -> phi, not E, E and phi), encoded and multiplied
    "2"  two translations, the three objective DFAs built explicitly by
         complement and intersection, each minimized
    "3"  two translations, one symbolic product, objectives lifted from the
         two final predicates

"reactive" is the plain baseline: translate E -> phi and solve one game.

Objectives are conjoined with the arena's start flag, so a play wins only
after the agent has moved at least once.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

import json
import pathlib
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator

from besynth import dfa_explicit, dfa_symbolic, games, ltlf
from besynth.bdd import DdNode, Manager
from besynth.dfa_explicit import ExplicitDfa
from besynth.dfa_symbolic import Objectives, SymbolicDfa
from besynth.errors import UndeclaredAtomError
from besynth.games import PositionalStrategy
from besynth.ltlf import Formula, Partition
from utils.utils_logger import logger

#####################################
# Constants
#####################################

ALGORITHMS = ("1", "2", "3", "reactive")
STAGES = ("translate", "product", "adversarial", "cooperative", "extract")

REALIZABLE = "realizable"
BEST_EFFORT_ONLY = "best-effort-only"

#####################################
# Problems
#####################################


@dataclass(frozen=True)
class Problem:
    """Environment specification E and agent goal phi over one partition."""

    env_spec: Formula
    goal: Formula
    partition: Partition

    def __post_init__(self):
        self.partition.require_nonempty()
        for formula in (self.env_spec, self.goal):
            for name in sorted(ltlf.atoms(formula)):
                if name not in self.partition:
                    raise UndeclaredAtomError(name)

    @classmethod
    def from_files(cls, env: pathlib.Path | str, goal: pathlib.Path | str, part: pathlib.Path | str) -> "Problem":
        """Load the partition file, then both formula files against it."""
        partition = Partition.load(part)
        return cls(
            ltlf.load_formula(env, partition),
            ltlf.load_formula(goal, partition),
            partition,
        )


#####################################
# Instrumentation
#####################################


class StageTimer:
    """Wall-clock milliseconds per pipeline stage (monotonic clock)."""

    def __init__(self):
        self.timings_ms = {stage: 0.0 for stage in STAGES}

    @contextmanager
    def stage(self, name: str) -> Iterator[None]:
        logger.info(f"START {name}")
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = (time.perf_counter() - start) * 1000.0
            self.timings_ms[name] += elapsed
            logger.info(f"DONE {name} in {elapsed:.1f} ms")

    @property
    def total_ms(self) -> float:
        return sum(self.timings_ms.values())


#####################################
# Results
#####################################


@dataclass(eq=False)
class BestEffortStrategy:
    """
    Outcome of one pipeline run.

    kappa plays tau on adversarial_region and gamma elsewhere; the verdict
    is realizable exactly when the initial state lies in adversarial_region.
    """

    algorithm: str
    arena: SymbolicDfa
    restricted_arena: SymbolicDfa
    objectives: Objectives
    adversarial_region: DdNode
    env_region: DdNode
    cooperative_region: DdNode
    tau: PositionalStrategy
    gamma: PositionalStrategy
    kappa: PositionalStrategy
    verdict: str
    env_enforceable: bool
    iterations_adversarial: int
    iterations_cooperative: int
    translations: int
    timings_by_stage_ms: dict[str, float] = field(default_factory=dict)

    @property
    def realizable(self) -> bool:
        return self.verdict == REALIZABLE

    @property
    def manager(self) -> Manager:
        return self.arena.manager

    def to_record(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "verdict": self.verdict,
            "state_vars": len(self.arena.state_vars),
            "iterations_adversarial": self.iterations_adversarial,
            "iterations_cooperative": self.iterations_cooperative,
            "timings_by_stage_ms": {k: round(v, 3) for k, v in self.timings_by_stage_ms.items()},
            "translations": self.translations,
        }

    def strategy_summary(self) -> dict:
        m = self.manager
        return {
            "outputs": list(self.kappa.outputs),
            "state_vars": list(self.arena.state_vars),
            "initial": {name: int(value) for name, value in self.arena.initial.items()},
            "initial_output": {y: int(v) for y, v in self.kappa(self.arena.initial).items()},
            "adversarial_region": m.to_expr(self.adversarial_region),
            "env_enforceable": self.env_enforceable,
        }

    def to_json_lines(self) -> str:
        """Two lines: the result record, then the strategy summary."""
        return json.dumps(self.to_record()) + "\n" + json.dumps(self.strategy_summary()) + "\n"


def combine(tau: PositionalStrategy, gamma: PositionalStrategy, region: DdNode) -> PositionalStrategy:
    """kappa(Z) = tau(Z) where region holds, gamma(Z) elsewhere."""
    m = region.manager
    functions = {y: m.ite(region, tau.functions[y], gamma.functions[y]) for y in tau.outputs}
    return PositionalStrategy(m, tau.state_vars, functions)


#####################################
# Arena Construction
#####################################


def _shared_manager(partition: Partition, parts: list[tuple[str, ExplicitDfa]]) -> Manager:
    """Declare every state variable, the start flag, then X, then Y."""
    m = Manager()
    for prefix, dfa in parts:
        m.declare(*dfa_symbolic.state_var_names(prefix, dfa_symbolic.state_width(dfa)))
    m.declare(dfa_symbolic.START_VAR)
    m.declare(*partition.env_vars)
    m.declare(*partition.agent_vars)
    return m


def _encode_all(partition: Partition, parts: list[tuple[str, ExplicitDfa]]) -> SymbolicDfa:
    m = _shared_manager(partition, parts)
    encoded = [dfa_symbolic.encode(dfa, m, prefix) for prefix, dfa in parts]
    return dfa_symbolic.with_start_flag(dfa_symbolic.sym_product(encoded))


def _solve(
    algorithm: str,
    arena: SymbolicDfa,
    objectives: Objectives,
    timer: StageTimer,
    translations: int,
) -> BestEffortStrategy:
    m = arena.manager
    started = arena.started
    with timer.stage("adversarial"):
        adversarial = games.solve_adversarial(arena, objectives.implication & started, synthesize=False)
        env_region = games.env_winning_region(arena, objectives.violation & started)
    with timer.stage("cooperative"):
        restricted = dfa_symbolic.restrict(arena, env_region)
        cooperative = games.solve_cooperative(
            restricted, objectives.conjunction & env_region & started, synthesize=False
        )
    with timer.stage("extract"):
        tau = adversarial.extract()
        gamma = cooperative.extract()
        kappa = combine(tau, gamma, adversarial.winning_region)
        m.maybe_collect()

    realizable = m.evaluate(adversarial.winning_region, arena.initial)
    enforceable = m.evaluate(env_region, arena.initial)
    if not enforceable:
        logger.warning("The environment cannot enforce E from the initial state; continuing anyway")
    verdict = REALIZABLE if realizable else BEST_EFFORT_ONLY
    logger.info(f"Algorithm {algorithm}: {verdict} with {len(arena.state_vars)} state variables")
    return BestEffortStrategy(
        algorithm=algorithm,
        arena=arena,
        restricted_arena=restricted,
        objectives=objectives,
        adversarial_region=adversarial.winning_region,
        env_region=env_region,
        cooperative_region=cooperative.winning_region,
        tau=tau,
        gamma=gamma,
        kappa=kappa,
        verdict=verdict,
        env_enforceable=enforceable,
        iterations_adversarial=adversarial.iterations,
        iterations_cooperative=cooperative.iterations,
        translations=translations,
        timings_by_stage_ms=dict(timer.timings_ms),
    )


#####################################
# Pipelines
#####################################


def synth_monolithic(problem: Problem) -> BestEffortStrategy:
    """Three translations, one product of their encodings."""
    timer = StageTimer()
    e, phi, part = problem.env_spec, problem.goal, problem.partition
    with timer.stage("translate"):
        a_imp = dfa_explicit.translate(ltlf.Implies(e, phi), part)
        a_neg = dfa_explicit.translate(ltlf.Not(e), part)
        a_and = dfa_explicit.translate(ltlf.And(e, phi), part)
    with timer.stage("product"):
        arena = _encode_all(part, [("zI", a_imp), ("zN", a_neg), ("zA", a_and)])
        objectives = Objectives(*arena.component_finals)
    return _solve("1", arena, objectives, timer, translations=3)


def synth_explicit_compositional(problem: Problem) -> BestEffortStrategy:
    """Two translations; objective DFAs by complement and intersection."""
    timer = StageTimer()
    part = problem.partition
    with timer.stage("translate"):
        a_env = dfa_explicit.translate(problem.env_spec, part)
        a_goal = dfa_explicit.translate(problem.goal, part)
    with timer.stage("product"):
        a_imp = dfa_explicit.minimize(
            dfa_explicit.complement(dfa_explicit.intersect(a_env, dfa_explicit.complement(a_goal)))
        )
        a_neg = dfa_explicit.minimize(dfa_explicit.complement(a_env))
        a_and = dfa_explicit.intersect(a_env, a_goal)
        logger.debug(f"Objective DFAs: {a_imp.n_states}, {a_neg.n_states}, {a_and.n_states} states")
        arena = _encode_all(part, [("zI", a_imp), ("zN", a_neg), ("zA", a_and)])
        objectives = Objectives(*arena.component_finals)
    return _solve("2", arena, objectives, timer, translations=2)


def synth_symbolic_compositional(problem: Problem) -> BestEffortStrategy:
    """Two translations, one symbolic product, lifted objectives."""
    timer = StageTimer()
    part = problem.partition
    with timer.stage("translate"):
        a_env = dfa_explicit.translate(problem.env_spec, part)
        a_goal = dfa_explicit.translate(problem.goal, part)
    with timer.stage("product"):
        arena = _encode_all(part, [("zE", a_env), ("zG", a_goal)])
        f_env, f_goal = arena.component_finals
        objectives = dfa_symbolic.lift_finals(f_env, f_goal)
    return _solve("3", arena, objectives, timer, translations=2)


def synth_reactive(problem: Problem) -> BestEffortStrategy:
    """
    Plain reactive synthesis for E -> phi.

    No environment region or cooperative game: gamma and kappa both equal
    tau, and only the implication objective is tracked.
    """
    timer = StageTimer()
    part = problem.partition
    with timer.stage("translate"):
        a_imp = dfa_explicit.translate(ltlf.Implies(problem.env_spec, problem.goal), part)
    with timer.stage("product"):
        arena = _encode_all(part, [("zI", a_imp)])
    m = arena.manager
    objectives = Objectives(arena.final, m.false, m.false)
    with timer.stage("adversarial"):
        adversarial = games.solve_adversarial(arena, arena.final & arena.started, synthesize=False)
    with timer.stage("extract"):
        tau = adversarial.extract()
    realizable = m.evaluate(adversarial.winning_region, arena.initial)
    verdict = REALIZABLE if realizable else BEST_EFFORT_ONLY
    logger.info(f"Reactive baseline: {verdict}")
    return BestEffortStrategy(
        algorithm="reactive",
        arena=arena,
        restricted_arena=arena,
        objectives=objectives,
        adversarial_region=adversarial.winning_region,
        env_region=m.true,
        cooperative_region=m.false,
        tau=tau,
        gamma=tau,
        kappa=tau,
        verdict=verdict,
        env_enforceable=True,
        iterations_adversarial=adversarial.iterations,
        iterations_cooperative=0,
        translations=1,
        timings_by_stage_ms=dict(timer.timings_ms),
    )


PIPELINES = {
    "1": synth_monolithic,
    "2": synth_explicit_compositional,
    "3": synth_symbolic_compositional,
    "reactive": synth_reactive,
}


def synthesize(problem: Problem, algorithm: str | int = "3") -> BestEffortStrategy:
    """Run the pipeline named by algorithm (1, 2, 3 or reactive)."""
    key = str(algorithm)
    if key not in PIPELINES:
        raise ValueError(f"unknown algorithm '{algorithm}', expected one of {ALGORITHMS}")
    logger.info(f"Synthesizing with algorithm {key}: E = {problem.env_spec}, goal = {problem.goal}")
    return PIPELINES[key](problem)
