import pathlib

import pytest

from besynth import ltlf
from besynth.besteffort import Problem
from producers import counter_game_producer as producer
from producers.counter_game_producer import CounterGameSpec


class TestCounterGameSpec:
    def test_stem_and_order(self):
        specs = sorted([CounterGameSpec(2, 1), CounterGameSpec(1, 3), CounterGameSpec(1, 2)])
        assert [s.stem for s in specs] == ["counter_n1_k2", "counter_n1_k3", "counter_n2_k1"]

    @pytest.mark.parametrize("n, K", [(0, 1), (1, 0), (11, 1), (1, 11)])
    def test_range(self, n, K):
        with pytest.raises(ValueError):
            CounterGameSpec(n, K)

    @pytest.mark.parametrize(
        "n, K, expected",
        [(1, 1, True), (2, 2, False), (2, 3, True), (3, 6, False), (3, 7, True)],
    )
    def test_expected_realizability(self, n, K, expected):
        assert CounterGameSpec(n, K).realizable is expected

    def test_grid_is_n_major(self):
        grid = producer.counter_grid(2, 3)
        assert len(grid) == 6
        assert grid[0] == CounterGameSpec(1, 1)
        assert grid[3] == CounterGameSpec(2, 1)
        assert producer.counter_grid(3, 2, n_min=3, k_min=2) == [CounterGameSpec(3, 2)]


class TestFormulas:
    def test_partition(self):
        part = producer.counter_partition(3)
        assert part.env_vars == ("add",)
        assert part.agent_vars == ("grant", "b_0", "b_1", "b_2")

    @pytest.mark.parametrize("K", (1, 2, 5))
    def test_env_requests_has_K_conjuncts(self, K):
        env = producer.env_requests(K)
        assert isinstance(env, ltlf.Eventually)
        parts = ltlf.conjuncts(env.arg)
        assert len(parts) == K
        assert parts[-1] == producer.weak_next_power(ltlf.Atom("add"), K - 1)

    def test_env_requests_text(self):
        assert ltlf.to_text(producer.env_requests(2)) == "F((add && WX(add)))"

    def test_goal_shape(self):
        low_0, low_1, dynamics, target = ltlf.conjuncts(producer.counter_goal(2))
        assert (low_0, low_1) == (ltlf.Not(ltlf.Atom("b_0")), ltlf.Not(ltlf.Atom("b_1")))
        assert isinstance(dynamics, ltlf.Always)
        assert target == ltlf.Eventually(ltlf.And(ltlf.Atom("b_0"), ltlf.Atom("b_1")))

    def test_counting_trace_satisfies_goal(self):
        # add and grant every step: 00, 10, 01, 11 (b_0 first)
        bits = [(0, 0), (1, 0), (0, 1), (1, 1)]
        trace = [
            frozenset({"add", "grant"} | {f"b_{i}" for i, v in enumerate(b) if v})
            for b in bits
        ]
        assert ltlf.evaluate(producer.counter_goal(2), trace)
        assert not ltlf.evaluate(producer.counter_goal(2), trace[:3])

    def test_bits_only_move_on_carry(self):
        trace = [frozenset({"grant"}), frozenset({"grant", "b_0"})]
        assert not ltlf.evaluate(producer.counter_goal(1), trace)

    def test_gen_counter_game(self):
        problem = producer.gen_counter_game(CounterGameSpec(2, 3))
        assert isinstance(problem, Problem)
        assert ltlf.atoms(problem.goal) == {"add", "grant", "b_0", "b_1"}


class TestProblemFiles:
    def test_files_round_trip(self, tmp_path):
        spec = CounterGameSpec(2, 3)
        env_path, goal_path, part_path = producer.write_problem_files(spec, tmp_path / "problems")
        assert env_path.name == "counter_n2_k3.env"
        assert env_path.read_text().startswith("# counter game n=2 K=3")
        assert part_path.read_text() == ".inputs: add\n.outputs: grant b_0 b_1\n"
        loaded = Problem.from_files(env_path, goal_path, part_path)
        assert loaded == producer.gen_counter_game(spec)

    def test_generate_problems(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BESYNTH_DATA_DIR", str(tmp_path))
        specs = list(producer.generate_problems(1, 2))
        assert specs == [CounterGameSpec(1, 1), CounterGameSpec(1, 2)]
        assert len(list((tmp_path / "problems").glob("*.part"))) == 2

    def test_shipped_example_matches_generator(self):
        folder = pathlib.Path(__file__).resolve().parents[1] / "data" / "problems"
        spec = CounterGameSpec(1, 1)
        shipped = Problem.from_files(*producer.problem_paths(spec, folder))
        assert shipped == producer.gen_counter_game(spec)
