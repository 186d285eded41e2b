import random

import pytest

from besynth import ltlf
from besynth.errors import FormulaSyntaxError, PartitionError, TraceError, UndeclaredAtomError
from besynth.ltlf import (
    FALSE,
    TRUE,
    Always,
    And,
    Atom,
    Eventually,
    Implies,
    Next,
    Not,
    Or,
    Partition,
    Release,
    Until,
    WeakNext,
)
from tests.oracles import random_formula, traces

a, b, c = Atom("a"), Atom("b"), Atom("c")


class TestPartition:
    def test_from_text(self):
        part = Partition.from_text(".inputs: a b\n.outputs: c\n")
        assert part.env_vars == ("a", "b")
        assert part.agent_vars == ("c",)
        assert part.all_vars == ("a", "b", "c")

    def test_comments_and_blank_lines_are_skipped(self):
        part = Partition.from_text("# counter\n\n.inputs: add\n.outputs: grant b_0\n")
        assert part.agent_vars == ("grant", "b_0")

    def test_to_text_is_read_back(self):
        part = Partition(("x",), ("y", "z"))
        assert Partition.from_text(part.to_text()) == part

    def test_load(self, tmp_path):
        path = tmp_path / "p.part"
        path.write_text(".inputs: x\n.outputs: y\n")
        assert Partition.load(path) == Partition(("x",), ("y",))

    @pytest.mark.parametrize(
        "text",
        [
            ".inputs: a\n.outputs: a\n",
            ".inputs: a a\n.outputs: b\n",
            ".inputs: a\n",
            ".inputs: a\n.outputs: F\n",
            ".inputs: a\n.outputs: 1b\n",
            "inputs a\n",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(PartitionError):
            Partition.from_text(text)

    def test_require_nonempty(self):
        Partition(("a",), ("b",)).require_nonempty()
        with pytest.raises(PartitionError):
            Partition((), ("b",)).require_nonempty()

    def test_contains(self, abc):
        assert "a" in abc and "c" in abc
        assert "d" not in abc


class TestParse:
    @pytest.mark.parametrize(
        "text, expected",
        [
            ("a", a),
            ("true", TRUE),
            ("!a", Not(a)),
            ("a && b || c", Or(And(a, b), c)),
            ("a || b && c", Or(a, And(b, c))),
            ("a -> b -> c", Implies(a, Implies(b, c))),
            ("a U b U c", Until(a, Until(b, c))),
            ("a R b", Release(a, b)),
            ("X a && b", And(Next(a), b)),
            ("WX(a)", WeakNext(a)),
            ("F G a", Eventually(Always(a))),
            ("!(a U b)", Not(Until(a, b))),
            ("a && b U c", And(a, Until(b, c))),
        ],
    )
    def test_precedence(self, text, expected):
        assert ltlf.parse(text) == expected

    @pytest.mark.parametrize("text", ["", "a &&", "(a", "a b", "a $ b", "F", "X X"])
    def test_syntax_errors(self, text):
        with pytest.raises(FormulaSyntaxError):
            ltlf.parse(text)

    def test_error_position(self):
        with pytest.raises(FormulaSyntaxError) as info:
            ltlf.parse("a && $")
        assert info.value.position == 5

    def test_undeclared_atom(self, abc):
        with pytest.raises(UndeclaredAtomError) as info:
            ltlf.parse("a && d", abc)
        assert info.value.atom == "d"

    def test_to_text_round_trip(self):
        rng = random.Random(7)
        for _ in range(100):
            formula = random_formula(rng, ("a", "b"), rng.randint(0, 6))
            assert ltlf.parse(ltlf.to_text(formula)) == formula

    def test_load_formula_skips_comments(self, tmp_path, abc):
        path = tmp_path / "goal.ltlf"
        path.write_text("# goal\nF(a &&\n  b)\n")
        assert ltlf.load_formula(path, abc) == Eventually(And(a, b))


class TestHelpers:
    def test_conjoin_and_conjuncts(self):
        formula = ltlf.conjoin([a, b, c])
        assert ltlf.conjuncts(formula) == [a, b, c]
        assert ltlf.conjoin([]) == TRUE
        assert ltlf.disjoin([]) == FALSE

    def test_atoms_and_size(self):
        formula = ltlf.parse("F(a && X b) U !c")
        assert ltlf.atoms(formula) == {"a", "b", "c"}
        assert ltlf.size(formula) == 5

    def test_subformulas_children_first(self):
        formula = And(a, Next(b))
        assert list(ltlf.subformulas(formula)) == [a, b, Next(b), formula]


class TestEvaluate:
    def test_next_fails_at_last_instant(self):
        assert not ltlf.evaluate(Next(a), [{"a"}])
        assert ltlf.evaluate(WeakNext(a), [{"a"}])
        assert ltlf.evaluate(Next(a), [set(), {"a"}])

    def test_eventually_and_always(self):
        trace = [set(), {"a"}, set()]
        assert ltlf.evaluate(Eventually(a), trace)
        assert not ltlf.evaluate(Always(a), trace)
        assert ltlf.evaluate(Always(a), trace, instant=1) is False
        assert ltlf.evaluate(Eventually(a), trace, instant=2) is False

    def test_until_and_release(self):
        assert ltlf.evaluate(Until(a, b), [{"a"}, {"a"}, {"b"}])
        assert not ltlf.evaluate(Until(a, b), [{"a"}, {"a"}])
        assert ltlf.evaluate(Release(a, b), [{"b"}, {"b"}])
        assert not ltlf.evaluate(Release(a, b), [{"b"}, set()])

    def test_empty_trace_and_bad_instant(self):
        with pytest.raises(TraceError):
            ltlf.evaluate(a, [])
        with pytest.raises(TraceError):
            ltlf.evaluate(a, [{"a"}], instant=1)


class TestNnf:
    def test_dual_operators(self):
        assert ltlf.to_nnf(Not(Next(a))) == WeakNext(Not(a))
        assert ltlf.to_nnf(Not(Eventually(a))) == Always(Not(a))
        assert ltlf.to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))
        assert ltlf.to_nnf(Implies(a, b)) == Or(Not(a), b)

    def test_preserves_semantics(self):
        rng = random.Random(11)
        all_traces = list(traces(Partition(("a",), ("b",)), 3))
        for _ in range(60):
            formula = random_formula(rng, ("a", "b"), rng.randint(1, 5))
            nnf = ltlf.to_nnf(formula)
            for trace in all_traces:
                assert ltlf.evaluate(nnf, trace) == ltlf.evaluate(formula, trace)
