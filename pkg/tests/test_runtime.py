import dataclasses
import json

import pytest

from besynth import ltlf, runtime
from besynth.besteffort import Problem, synthesize
from besynth.errors import PartitionError, UndeclaredAtomError
from besynth.runtime import DOMINATED, UNDOMINATED, UNTESTED, ValidationBounds
from producers.counter_game_producer import CounterGameSpec, gen_counter_game
from tests.oracles import positional_dominance

WIDE = ValidationBounds(states=64)


@pytest.fixture
def tiny(xy):
    """Agent can only win when the environment plays x together with y."""
    return Problem(ltlf.TRUE, ltlf.parse("F(x && y)", xy), xy)


@pytest.fixture(scope="module")
def counter_1_1():
    problem = gen_counter_game(CounterGameSpec(1, 1))
    return problem, synthesize(problem, "3")


def never(strategy, output):
    """Copy of strategy whose kappa keeps output low everywhere."""
    m = strategy.manager
    return dataclasses.replace(strategy, kappa=strategy.kappa.with_output(output, m.false))


class TestTransducer:
    def test_counter_reaches_goal(self, counter_1_1):
        _, strategy = counter_1_1
        t = runtime.induce(strategy)
        assert t.output() == {"grant": True, "b_0": False}
        record = runtime.simulate(t, [{"add"}, {"add": True}])
        assert record.trace[0] == frozenset({"add", "grant"})
        assert record.outputs[1]["b_0"] is True
        assert record.flags[1]["conjunction"]
        assert record.flags[1]["implication"]
        assert len(record.states) == 3

    def test_simulate_restarts(self, counter_1_1):
        _, strategy = counter_1_1
        t = runtime.induce(strategy)
        first = runtime.simulate(t, [set(), {"add"}])
        second = runtime.simulate(t, [set(), {"add"}])
        assert first.trace == second.trace
        assert t.history_length == 2

    def test_env_input_errors(self, counter_1_1):
        _, strategy = counter_1_1
        t = runtime.induce(strategy)
        with pytest.raises(UndeclaredAtomError):
            t.consume({"ask"})
        with pytest.raises(PartitionError):
            t.consume({"grant"})
        with pytest.raises(UndeclaredAtomError):
            t.consume({"ask": False})

    def test_play_record_json(self, counter_1_1):
        _, strategy = counter_1_1
        record = runtime.simulate(runtime.induce(strategy), [{"add"}, set(), set()])
        lines = [json.loads(line) for line in record.to_json_lines().splitlines()]
        assert [line["step"] for line in lines] == [0, 1, 2]
        assert lines[0]["letter"] == ["add", "grant"]
        assert set(lines[0]["flags"]) == set(runtime.FLAG_NAMES)

    def test_dot(self, counter_1_1):
        _, strategy = counter_1_1
        dot = runtime.transducer_to_dot(strategy)
        assert dot.startswith("digraph kappa {")
        assert "init -> q0;" in dot
        assert "/ grant & !b_0" in dot


class TestValidate:
    def test_tiny_instance_is_undominated(self, tiny):
        strategy = synthesize(tiny, "3")
        report = runtime.validate(tiny, strategy)
        assert report.status == UNDOMINATED
        assert report.enforces is False
        assert report.joint_states > 0

    def test_planted_defect_is_dominated(self, tiny):
        defect = never(synthesize(tiny, "3"), "y")
        report = runtime.validate(tiny, defect)
        assert report.status == DOMINATED
        assert report.dominated
        assert "pending is achievable" in report.witness

    def test_brute_force_agrees_on_tiny_instance(self, tiny):
        strategy = synthesize(tiny, "3")
        assert positional_dominance(tiny, strategy)["dominated"] is False
        assert positional_dominance(tiny, never(strategy, "y"))["dominated"] is True

    @pytest.mark.parametrize("alg", ("1", "2", "3"))
    @pytest.mark.parametrize("n, K", [(1, 1), (2, 1), (2, 2)])
    def test_counter_strategies_are_undominated(self, alg, n, K):
        problem = gen_counter_game(CounterGameSpec(n, K))
        report = runtime.validate(problem, synthesize(problem, alg), WIDE)
        assert report.status == UNDOMINATED
        assert report.enforces == CounterGameSpec(n, K).realizable

    def test_counter_defect_is_dominated(self, counter_1_1):
        problem, strategy = counter_1_1
        report = runtime.validate(problem, never(strategy, "grant"), WIDE)
        assert report.status == DOMINATED
        assert "winning is achievable" in report.witness

    def test_untested_beyond_bounds(self, counter_1_1):
        problem, strategy = counter_1_1
        report = runtime.validate(problem, strategy, ValidationBounds(states=1))
        assert report.status == UNTESTED
        assert report.reason
        narrow = runtime.validate(problem, strategy, ValidationBounds(states=64, env_props=0))
        assert narrow.status == UNTESTED

    def test_unenforceable_environment_is_vacuous(self, xy):
        problem = Problem(ltlf.FALSE, ltlf.parse("F y", xy), xy)
        report = runtime.validate(problem, synthesize(problem, "3"))
        assert report.status == UNDOMINATED
        assert report.reason == "no environment strategy enforces E"

    def test_report_dict(self, tiny):
        report = runtime.validate(tiny, synthesize(tiny, "3"))
        record = report.to_dict()
        assert record["method"] == "positional-value"
        assert record["algorithm"] == "3"


class TestExplicitArena:
    def test_values(self, tiny):
        arena = runtime.explicit_arena(tiny)
        assert arena.product.n_states == 3
        assert arena.safe.all()
        assert arena.best[arena.initial] == runtime.PENDING
        assert arena.successors.shape == (3, 2, 2)

    def test_realizable_instance_is_winning(self, counter_1_1):
        problem, _ = counter_1_1
        arena = runtime.explicit_arena(problem, WIDE)
        assert arena.best[arena.initial] == runtime.WINNING
