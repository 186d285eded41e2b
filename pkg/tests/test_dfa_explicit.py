import random

import numpy as np
import pytest

from besynth import dfa_explicit, ltlf
from besynth.dfa_explicit import ExplicitDfa
from besynth.errors import PartitionError, ResourceLimitError, TraceError, UndeclaredAtomError
from besynth.ltlf import Partition
from tests.oracles import equivalent_pairs, random_dfa, random_formula, reachable_states, traces


def translate(text: str, partition: Partition) -> ExplicitDfa:
    return dfa_explicit.translate(ltlf.parse(text, partition), partition)


def language(dfa: ExplicitDfa, max_length: int) -> set:
    return {t for t in traces(dfa.partition, max_length) if dfa_explicit.accepts(dfa, t)}


class TestLetters:
    def test_letter_bits_follow_partition_order(self, abc):
        assert dfa_explicit.letter_index(abc, {"a"}) == 1
        assert dfa_explicit.letter_index(abc, {"c"}) == 4
        assert dfa_explicit.letter_names(abc, 6) == frozenset({"b", "c"})

    def test_undeclared_name(self, abc):
        with pytest.raises(UndeclaredAtomError):
            dfa_explicit.letter_index(abc, {"d"})

    def test_alphabet_cap(self, monkeypatch):
        monkeypatch.setenv("BESYNTH_ALPHABET_CAP", "2")
        with pytest.raises(ResourceLimitError):
            dfa_explicit.check_alphabet(Partition(("a", "b"), ("c",)))


class TestExplicitDfa:
    def test_validation(self, xy):
        with pytest.raises(ValueError):
            ExplicitDfa(xy, np.zeros((1, 2), dtype=np.int32), 0, frozenset())
        with pytest.raises(ValueError):
            ExplicitDfa(xy, np.full((1, 4), 3, dtype=np.int32), 0, frozenset())

    def test_table_is_read_only(self, xy):
        dfa = ExplicitDfa(xy, np.zeros((1, 4), dtype=np.int32), 0, frozenset())
        with pytest.raises(ValueError):
            dfa.table[0, 0] = 0

    def test_run_and_accepts(self, abc):
        dfa = translate("F a", abc)
        assert dfa_explicit.run(dfa, [set(), {"a"}]) == (0, 0, 1)
        assert dfa_explicit.accepts(dfa, [set(), {"a"}])
        assert not dfa_explicit.accepts(dfa, [{"b"}])
        with pytest.raises(TraceError):
            dfa_explicit.accepts(dfa, [])


class TestTranslate:
    @pytest.mark.parametrize(
        "text, states",
        [("F a", 2), ("G a", 2), ("a", 3), ("X a", 4), ("true", 1), ("false", 1)],
    )
    def test_minimal_sizes(self, abc, text, states):
        assert translate(text, abc).n_states == states

    def test_eventually_accepts_from_first_a(self, abc):
        dfa = translate("F a", abc)
        assert dfa.initial not in dfa.finals
        assert dfa.finals == frozenset({1})

    def test_undeclared_atom(self, abc):
        with pytest.raises(UndeclaredAtomError):
            dfa_explicit.translate(ltlf.Atom("z"), abc)

    def test_state_cap(self, abc):
        with pytest.raises(ResourceLimitError):
            dfa_explicit.translate(ltlf.parse("X X X a", abc), abc, state_cap=2)

    def test_agrees_with_semantics(self):
        partition = Partition(("a",), ("b",))
        all_traces = list(traces(partition, 4))
        rng = random.Random(3)
        for _ in range(60):
            formula = random_formula(rng, ("a", "b"), rng.randint(0, 5))
            dfa = dfa_explicit.translate(formula, partition)
            for trace in all_traces:
                assert dfa_explicit.accepts(dfa, trace) == ltlf.evaluate(formula, trace), (formula, trace)

    def test_result_is_minimal(self):
        partition = Partition(("a",), ("b",))
        rng = random.Random(5)
        for _ in range(40):
            dfa = dfa_explicit.translate(random_formula(rng, ("a", "b"), rng.randint(0, 6)), partition)
            assert equivalent_pairs(dfa) == []
            assert reachable_states(dfa) == set(range(dfa.n_states))

    @pytest.mark.slow
    def test_agrees_with_semantics_sweep(self):
        partition = Partition(("a", "b"), ("c",))
        all_traces = list(traces(partition, 5))
        rng = random.Random(2024)
        for _ in range(500):
            formula = random_formula(rng, ("a", "b", "c"), rng.randint(0, 6))
            dfa = dfa_explicit.translate(formula, partition)
            for trace in all_traces:
                assert dfa_explicit.accepts(dfa, trace) == ltlf.evaluate(formula, trace), (formula, trace)


class TestMinimize:
    def test_merges_equivalent_states(self, xy):
        table = np.array([[1, 2, 1, 2], [3, 3, 3, 3], [3, 3, 3, 3], [3, 3, 3, 3]], dtype=np.int32)
        dfa = ExplicitDfa(xy, table, 0, frozenset({3}))
        minimal = dfa_explicit.minimize(dfa)
        assert minimal.n_states == 3
        assert language(minimal, 3) == language(dfa, 3)

    def test_drops_unreachable_states(self, xy):
        table = np.array([[0, 0, 0, 0], [1, 1, 1, 1]], dtype=np.int32)
        dfa = ExplicitDfa(xy, table, 0, frozenset({0, 1}))
        assert dfa_explicit.minimize(dfa).n_states == 1

    def test_random_automata_keep_their_language(self, xy):
        rng = random.Random(9)
        for _ in range(30):
            dfa = random_dfa(rng, xy, rng.randint(1, 8))
            minimal = dfa_explicit.minimize(dfa)
            assert minimal.n_states <= dfa.n_states
            assert language(minimal, 3) == language(dfa, 3)
            assert equivalent_pairs(minimal) == []


class TestAlgebra:
    def test_complement(self, abc):
        dfa = translate("F a", abc)
        negated = dfa_explicit.complement(dfa)
        for trace in traces(abc, 2):
            assert dfa_explicit.accepts(negated, trace) != dfa_explicit.accepts(dfa, trace)

    def test_intersect_matches_conjunction(self, abc):
        both = dfa_explicit.intersect(translate("F a", abc), translate("G c", abc))
        direct = translate("F a && G c", abc)
        assert both.n_states == direct.n_states
        assert language(both, 3) == language(direct, 3)

    @pytest.mark.parametrize("op, text", [("or", "F a || G c"), ("implies", "F a -> G c"), ("iff", "(F a -> G c) && (G c -> F a)")])
    def test_boolean_combination(self, abc, op, text):
        combined = dfa_explicit.boolean_combination(translate("F a", abc), translate("G c", abc), op)
        assert language(combined, 3) == language(translate(text, abc), 3)

    def test_unknown_operator(self, abc):
        dfa = translate("a", abc)
        with pytest.raises(ValueError):
            dfa_explicit.boolean_combination(dfa, dfa, "xor")

    def test_product_lifts_finals(self, abc):
        product = dfa_explicit.product_ts([translate("F a", abc), translate("F b", abc)])
        assert product.n_states == 4
        assert product.dfa.finals == product.lifted_finals[0] & product.lifted_finals[1]
        assert product.state_tuples[product.dfa.initial] == (0, 0)

    def test_product_needs_one_partition(self, abc, xy):
        with pytest.raises(PartitionError):
            dfa_explicit.product_ts([translate("F a", abc), translate("F x", xy)])


class TestDumps:
    def test_text_dump_is_read_back(self, abc):
        dfa = translate("a U (b && X c)", abc)
        text = dfa_explicit.to_text(dfa)
        assert text.startswith("dfa v1\n")
        again = dfa_explicit.from_text(text, abc)
        assert np.array_equal(again.table, dfa.table)
        assert again.finals == dfa.finals and again.initial == dfa.initial

    def test_text_dump_of_eventually(self, abc):
        text = dfa_explicit.to_text(translate("F a", abc))
        assert text.splitlines() == [
            "dfa v1",
            "states 2",
            "initial 0",
            "finals 1",
            'trans 0 "!a" 0',
            'trans 0 "a" 1',
            'trans 1 "true" 1',
        ]

    def test_incomplete_dump(self, abc):
        with pytest.raises(ValueError):
            dfa_explicit.from_text('dfa v1\nstates 1\ninitial 0\nfinals\ntrans 0 "a" 0\n', abc)

    def test_dot(self, abc):
        dot = dfa_explicit.to_dot(translate("F a", abc))
        assert "s1 [shape=doublecircle" in dot
        assert 's0 -> s1 [label="a"];' in dot
        assert "init -> s0;" in dot
