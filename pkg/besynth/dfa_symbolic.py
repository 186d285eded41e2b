"""
dfa_symbolic.py - log-encoded symbolic transition systems.

State s of an explicit DFA gets codeword s + 1 over |Z| Boolean state
variables; the all-false codeword is a non-final sink that also absorbs
unused codewords and, after restriction, every transition leaving the
restricting predicate. A single-state DFA needs no state variables.

State variable names carry brackets (e.g. zE[0]) so they never collide
with proposition names.
"""

#####################################
# Import Modules
#####################################

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import AbstractSet, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from besynth.bdd import DdNode, Manager
from besynth.dfa_explicit import ExplicitDfa, check_alphabet, mask_cubes
from besynth.errors import ManagerMismatchError, PartitionError
from besynth.ltlf import Partition

#####################################
# Data Types
#####################################

START_VAR = "zS[0]"


@dataclass(frozen=True, eq=False)
class EncodedComponent:
    """One encoded DFA inside a symbolic arena."""

    label: str
    state_vars: tuple[str, ...]
    n_states: int
    final: DdNode


@dataclass(frozen=True, eq=False)
class SymbolicDfa:
    """
    Symbolic transition system (X, Y, Z, Z0, eta) with final predicates.

    Attributes:
        state_vars: Z in declaration order.
        initial: Z0 as an assignment.
        eta: next-state function per state variable, over X, Y and Z.
        final: conjunction of the component final predicates.
        components: encoded DFAs whose state variables partition Z.
        domain: restricting predicate (true unless restricted).
        start_var: state variable that turns true after the first step, if any.
    """

    manager: Manager
    partition: Partition
    state_vars: tuple[str, ...]
    initial: Mapping[str, bool]
    eta: Mapping[str, DdNode]
    final: DdNode
    components: tuple[EncodedComponent, ...]
    domain: DdNode
    start_var: Optional[str] = field(default=None)

    @property
    def env_vars(self) -> tuple[str, ...]:
        return self.partition.env_vars

    @property
    def agent_vars(self) -> tuple[str, ...]:
        return self.partition.agent_vars

    @property
    def component_finals(self) -> tuple[DdNode, ...]:
        return tuple(component.final for component in self.components)

    @property
    def started(self) -> DdNode:
        """Predicate of positions reached after at least one step."""
        if self.start_var is None:
            return self.manager.true
        return self.manager.var(self.start_var)

    def initial_cube(self) -> DdNode:
        return self.manager.cube(self.initial)


class Objectives(NamedTuple):
    """Lifted final predicates for the best-effort games."""

    implication: DdNode
    violation: DdNode
    conjunction: DdNode


#####################################
# Encoding
#####################################


def state_width(dfa: ExplicitDfa) -> int:
    """Number of state variables encode() will use for this DFA."""
    return 0 if dfa.n_states == 1 else dfa.n_states.bit_length()


def state_var_names(prefix: str, width: int) -> tuple[str, ...]:
    return tuple(f"{prefix}[{j}]" for j in range(width))


def letters_bdd(manager: Manager, partition: Partition, mask: np.ndarray) -> DdNode:
    """BDD over X and Y for the set of letters selected by mask."""
    return manager.disjoin(manager.cube(cube) for cube in mask_cubes(partition, mask))


def codeword(manager: Manager, state_vars: Sequence[str], code: int) -> DdNode:
    return manager.cube({name: bool(code >> j & 1) for j, name in enumerate(state_vars)})


def encode(
    dfa: ExplicitDfa,
    manager: Optional[Manager] = None,
    prefix: str = "z",
    label: Optional[str] = None,
) -> SymbolicDfa:
    """
    Encode an explicit DFA with |S|.bit_length() state variables.

    Args:
        dfa (ExplicitDfa): complete DFA to encode.
        manager (Manager, optional): shared manager; a fresh one by default.
            State variables are appended unless already declared.
        prefix (str): state variable prefix.
        label (str, optional): component label, defaults to the prefix.
    """
    check_alphabet(dfa.partition)
    m = manager if manager is not None else Manager()
    width = state_width(dfa)
    names = state_var_names(prefix, width)
    m.declare(*names)
    m.declare(*dfa.partition.all_vars)

    if width == 0:
        final = m.constant(dfa.initial in dfa.finals)
        component = EncodedComponent(label or prefix, (), 1, final)
        return SymbolicDfa(m, dfa.partition, (), {}, {}, final, (component,), m.true)

    codes = [codeword(m, names, s + 1) for s in range(dfa.n_states)]
    targets = dfa.table.astype(np.int64) + 1
    eta = {}
    for j, name in enumerate(names):
        bit_set = (targets >> j) & 1 == 1
        eta[name] = m.disjoin(
            codes[s] & letters_bdd(m, dfa.partition, bit_set[s])
            for s in range(dfa.n_states)
            if bit_set[s].any()
        )
    final = m.disjoin(codes[s] for s in sorted(dfa.finals))
    initial = {name: bool((dfa.initial + 1) >> j & 1) for j, name in enumerate(names)}
    component = EncodedComponent(label or prefix, names, dfa.n_states, final)
    return SymbolicDfa(m, dfa.partition, names, initial, eta, final, (component,), m.true)


#####################################
# Products and Restriction
#####################################


def sym_product(dfas: Sequence[SymbolicDfa]) -> SymbolicDfa:
    """
    Synchronous product of symbolic DFAs sharing one manager.

    State variables that collide with an earlier component are renamed
    with a numeric suffix.
    """
    if not dfas:
        raise ValueError("product needs at least one symbolic DFA")
    if len(dfas) == 1:
        return dfas[0]
    m = dfas[0].manager
    partition = dfas[0].partition
    state_vars: list[str] = []
    initial: dict[str, bool] = {}
    eta: dict[str, DdNode] = {}
    components: list[EncodedComponent] = []
    domain = m.true
    for k, d in enumerate(dfas):
        if d.manager is not m:
            raise ManagerMismatchError("product components live in different managers")
        if d.partition != partition:
            raise PartitionError("product components use different partitions")
        renaming = {name: f"{name}_{k}" for name in d.state_vars if name in initial}
        if renaming:
            m.declare(*renaming.values())
        substitution = {old: m.var(new) for old, new in renaming.items()}

        def rename(node: DdNode) -> DdNode:
            return m.vector_compose(node, substitution) if substitution else node

        for name in d.state_vars:
            new = renaming.get(name, name)
            state_vars.append(new)
            initial[new] = d.initial[name]
            eta[new] = rename(d.eta[name])
        for component in d.components:
            components.append(
                EncodedComponent(
                    component.label,
                    tuple(renaming.get(name, name) for name in component.state_vars),
                    component.n_states,
                    rename(component.final),
                )
            )
        domain = domain & rename(d.domain)
    final = m.conjoin(component.final for component in components)
    start_var = next((d.start_var for d in dfas if d.start_var), None)
    return SymbolicDfa(m, partition, tuple(state_vars), initial, eta, final, tuple(components), domain, start_var)


def with_start_flag(d: SymbolicDfa, name: str = START_VAR) -> SymbolicDfa:
    """Add a state variable that is false initially and true after any step."""
    m = d.manager
    m.declare(name)
    eta = dict(d.eta)
    eta[name] = m.true
    initial = dict(d.initial)
    initial[name] = False
    return replace(d, state_vars=d.state_vars + (name,), initial=initial, eta=eta, start_var=name)


def restrict(d: SymbolicDfa, g: DdNode) -> SymbolicDfa:
    """
    Conjoin every next-state function and every final predicate with g.

    Transitions out of states violating g lead to the all-false codeword.
    """
    extra = d.manager.support(g) - set(d.state_vars)
    if extra:
        raise ValueError(f"restricting predicate mentions non-state variables {sorted(extra)}")
    eta = {name: fn & g for name, fn in d.eta.items()}
    components = tuple(replace(component, final=component.final & g) for component in d.components)
    return replace(d, eta=eta, final=d.final & g, components=components, domain=d.domain & g)


def lift_finals(f_env: DdNode, f_goal: DdNode) -> Objectives:
    """Objectives E -> phi, not E and E and phi from the component finals."""
    return Objectives(f_env.implies(f_goal), ~f_env, f_env & f_goal)


#####################################
# Concrete States
#####################################


def decode(d: SymbolicDfa, assignment: Mapping[str, bool]) -> tuple[Optional[int], ...]:
    """Explicit state per component; None for the sink or an unused codeword."""
    states = []
    for component in d.components:
        if not component.state_vars:
            states.append(0)
            continue
        code = sum(1 << j for j, name in enumerate(component.state_vars) if assignment[name])
        states.append(code - 1 if 1 <= code <= component.n_states else None)
    return tuple(states)


def state_cube(d: SymbolicDfa, component: int, state: int) -> DdNode:
    """Codeword of an explicit state of one component, as a BDD over its variables."""
    encoded = d.components[component]
    if not 0 <= state < encoded.n_states:
        raise ValueError(f"state {state} out of range for component '{encoded.label}'")
    return codeword(d.manager, encoded.state_vars, state + 1 if encoded.state_vars else 0)


def step(d: SymbolicDfa, z: Mapping[str, bool], letter: AbstractSet[str]) -> dict[str, bool]:
    """Successor assignment of z under the letter (the set of true propositions)."""
    assignment = {name: bool(z[name]) for name in d.state_vars}
    for name in d.partition.all_vars:
        assignment[name] = name in letter
    return {name: d.manager.evaluate(d.eta[name], assignment) for name in d.state_vars}


def dump(d: SymbolicDfa) -> str:
    """Stable text listing of Z, Z0, eta and the final predicates."""
    m = d.manager
    lines = [
        f"inputs {' '.join(d.env_vars)}",
        f"outputs {' '.join(d.agent_vars)}",
        f"state_vars {' '.join(d.state_vars)}",
        "initial " + " ".join(f"{name}={int(d.initial[name])}" for name in d.state_vars),
    ]
    for name in d.state_vars:
        lines.append(f"eta {name} = {m.to_expr(d.eta[name])}")
    for component in d.components:
        lines.append(f"final {component.label} = {m.to_expr(component.final)}")
    lines.append(f"final = {m.to_expr(d.final)}")
    if not d.domain.is_true:
        lines.append(f"domain = {m.to_expr(d.domain)}")
    return "\n".join(line.rstrip() for line in lines) + "\n"
