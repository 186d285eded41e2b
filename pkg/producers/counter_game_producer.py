"""
counter_game_producer.py

Generate counter-game synthesis problems and write them as problem files.

The environment sends increment requests (add); the agent grants them and
drives the n counter bits itself. The goal is to get every bit set to 1;
the environment only guarantees K consecutive requests somewhere in the
trace:

    E_K = F(add && WX(add) && WX(WX(add)) && ...)     K conjuncts

Bits follow a ripple-carry counter: with c_0 = add && grant and
c_{i+1} = c_i && b_i, bit b_i flips at the next instant exactly when c_i
holds. The agent can only win against every such environment when
K >= 2^n - 1.

Example files for n=2, K=3:

    counter_n2_k3.part   .inputs: add / .outputs: grant b_0 b_1
    counter_n2_k3.env    F((add && (WX(add) && WX(WX(add)))))
"""

#####################################
# Import Modules
#####################################

# Import packages from Python Standard Library
import pathlib
from dataclasses import dataclass
from typing import Iterator

# Import functions from local modules
from besynth.besteffort import Problem
from besynth.ltlf import (
    Always,
    And,
    Atom,
    Eventually,
    Formula,
    Implies,
    Not,
    Partition,
    WeakNext,
    conjoin,
    to_text,
)
from utils.utils_config import get_data_dir
from utils.utils_logger import logger

#####################################
# Define Constants
#####################################

MIN_SIZE = 1
MAX_SIZE = 10

ADD = "add"
GRANT = "grant"

#####################################
# Define Counter Game Spec
#####################################


@dataclass(frozen=True, order=True)
class CounterGameSpec:
    """Counter with n bits against an environment guaranteeing K requests."""

    n: int
    K: int

    def __post_init__(self):
        for name, value in (("n", self.n), ("K", self.K)):
            if not MIN_SIZE <= value <= MAX_SIZE:
                raise ValueError(f"{name}={value} is outside {MIN_SIZE}..{MAX_SIZE}")

    @property
    def stem(self) -> str:
        return f"counter_n{self.n}_k{self.K}"

    @property
    def realizable(self) -> bool:
        """Expected verdict: enough guaranteed requests to count to 2^n - 1."""
        return self.K >= (1 << self.n) - 1


def counter_grid(n_max: int, k_max: int, n_min: int = 1, k_min: int = 1) -> list[CounterGameSpec]:
    """All specs with n_min <= n <= n_max and k_min <= K <= k_max, n-major."""
    return [CounterGameSpec(n, k) for n in range(n_min, n_max + 1) for k in range(k_min, k_max + 1)]


#####################################
# Formula Builders
#####################################


def bit_names(n: int) -> tuple[str, ...]:
    return tuple(f"b_{i}" for i in range(n))


def counter_partition(n: int) -> Partition:
    return Partition((ADD,), (GRANT,) + bit_names(n))


def weak_next_power(formula: Formula, times: int) -> Formula:
    for _ in range(times):
        formula = WeakNext(formula)
    return formula


def env_requests(K: int) -> Formula:
    """F of K nested weak-next add conjuncts."""
    return Eventually(conjoin([weak_next_power(Atom(ADD), i) for i in range(K)]))


def _carry(i: int) -> Formula:
    carry: Formula = And(Atom(ADD), Atom(GRANT))
    for j in range(i):
        carry = And(carry, Atom(f"b_{j}"))
    return carry


def _bit_dynamics(i: int) -> Formula:
    bit = Atom(f"b_{i}")
    carry = _carry(i)
    flip = And(Implies(bit, WeakNext(Not(bit))), Implies(Not(bit), WeakNext(bit)))
    keep = And(Implies(bit, WeakNext(bit)), Implies(Not(bit), WeakNext(Not(bit))))
    return And(Implies(carry, flip), Implies(Not(carry), keep))


def counter_goal(n: int) -> Formula:
    """All bits start low, follow the counter dynamics, and are eventually all high."""
    bits = [Atom(name) for name in bit_names(n)]
    init = conjoin([Not(bit) for bit in bits])
    dynamics = Always(conjoin([_bit_dynamics(i) for i in range(n)]))
    return conjoin([init, dynamics, Eventually(conjoin(bits))])


def gen_counter_game(spec: CounterGameSpec) -> Problem:
    """Build the synthesis problem for one counter-game instance."""
    problem = Problem(env_requests(spec.K), counter_goal(spec.n), counter_partition(spec.n))
    logger.debug(f"Generated {spec.stem}")
    return problem


#####################################
# Problem Files
#####################################


def problem_paths(spec: CounterGameSpec, folder: pathlib.Path) -> tuple[pathlib.Path, pathlib.Path, pathlib.Path]:
    """Paths of the env, goal and partition files for a spec."""
    return (
        folder.joinpath(f"{spec.stem}.env"),
        folder.joinpath(f"{spec.stem}.goal"),
        folder.joinpath(f"{spec.stem}.part"),
    )


def write_problem_files(spec: CounterGameSpec, folder: pathlib.Path) -> tuple[pathlib.Path, pathlib.Path, pathlib.Path]:
    """Write the three problem files the synth command reads."""
    folder.mkdir(parents=True, exist_ok=True)
    problem = gen_counter_game(spec)
    env_path, goal_path, part_path = problem_paths(spec, folder)
    env_path.write_text(f"# counter game n={spec.n} K={spec.K}: environment\n{to_text(problem.env_spec)}\n")
    goal_path.write_text(f"# counter game n={spec.n}: agent goal\n{to_text(problem.goal)}\n")
    part_path.write_text(problem.partition.to_text())
    logger.info(f"Wrote {spec.stem} problem files to {folder}")
    return env_path, goal_path, part_path


def generate_problems(n_max: int, k_max: int) -> Iterator[CounterGameSpec]:
    """Yield each spec of the grid after writing its files."""
    folder = get_data_dir().joinpath("problems")
    for spec in counter_grid(n_max, k_max):
        write_problem_files(spec, folder)
        yield spec


#####################################
# Main Function
#####################################


def main(n_max: int = 3, k_max: int = 5) -> None:
    logger.info("START counter game producer...")
    try:
        count = sum(1 for _ in generate_problems(n_max, k_max))
        logger.info(f"Wrote {count} counter game problems")
    except KeyboardInterrupt:
        logger.warning("Producer interrupted by user.")
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        raise
    finally:
        logger.info("Producer shutting down.")


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    main()
