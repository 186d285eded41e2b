import itertools

import pytest

from besynth.bdd import Manager
from besynth.errors import (
    ManagerMismatchError,
    ResourceLimitError,
    UnknownVariableError,
    UnsatisfiableError,
)


@pytest.fixture
def m() -> Manager:
    manager = Manager()
    manager.declare("a", "b", "c", "d")
    return manager


def assignments(names):
    for values in itertools.product((False, True), repeat=len(names)):
        yield dict(zip(names, values))


class TestConstruction:
    def test_declare_keeps_order(self, m):
        m.declare("b", "e")
        assert m.var_names == ("a", "b", "c", "d", "e")
        assert m.level_of("e") == 4

    def test_unknown_variable(self, m):
        with pytest.raises(UnknownVariableError):
            m.var("z")
        with pytest.raises(KeyError):
            m.level_of("z")

    def test_canonical_nodes(self, m):
        a, b = m.var("a"), m.var("b")
        assert (a & b) == (b & a)
        assert (a | ~a).is_true
        assert (a & ~a).is_false
        assert ~~a == a
        assert (a ^ b) == ((a & ~b) | (~a & b))
        assert a.implies(b) == (~a | b)
        assert a.iff(b) == ~(a ^ b)

    def test_node_structure(self, m):
        a = m.var("a")
        assert a.var == "a"
        assert a.low.is_false and a.high.is_true
        assert m.true.var is None and m.true.is_constant

    def test_cube(self, m):
        cube = m.cube({"a": True, "c": False})
        assert cube == (m.var("a") & ~m.var("c"))
        assert m.cube({}).is_true

    def test_apply_rejects_unknown_operator(self, m):
        with pytest.raises(ValueError):
            m.apply("nand", m.true, m.false)

    def test_managers_do_not_mix(self, m):
        other = Manager()
        other.declare("a")
        with pytest.raises(ManagerMismatchError):
            m.var("a") & other.var("a")

    def test_node_limit(self):
        small = Manager(node_limit=3)
        small.declare("a", "b", "c", "d")
        with pytest.raises(ResourceLimitError):
            small.conjoin(small.var(name) for name in ("a", "b", "c", "d"))


class TestOperations:
    def test_quantifiers(self, m):
        a, b, c = m.var("a"), m.var("b"), m.var("c")
        f = (a & b) | (~a & c)
        assert m.exists(["a"], f) == (b | c)
        assert m.forall(["a"], f) == (b & c)
        assert m.exists([], f) == f
        with pytest.raises(ValueError):
            m.quantify("some", ["a"], f)

    def test_vector_compose_is_simultaneous(self, m):
        a, b = m.var("a"), m.var("b")
        f = a & ~b
        swapped = m.vector_compose(f, {"a": b, "b": a})
        assert swapped == (b & ~a)

    def test_restrict(self, m):
        a, b, c = m.var("a"), m.var("b"), m.var("c")
        f = (a & b) | c
        assert m.restrict(f, {"a": True}) == (b | c)
        assert m.restrict(f, {"a": False, "c": False}).is_false

    def test_evaluate_matches_truth_table(self, m):
        a, b, c = m.var("a"), m.var("b"), m.var("c")
        f = (a ^ b) | (b & ~c)
        for z in assignments(("a", "b", "c")):
            expected = (z["a"] != z["b"]) or (z["b"] and not z["c"])
            assert m.evaluate(f, z) == expected

    def test_evaluate_needs_support(self, m):
        with pytest.raises(UnknownVariableError):
            m.evaluate(m.var("a"), {"b": True})

    def test_support_and_sat_count(self, m):
        f = m.var("a") | m.var("c")
        assert m.support(f) == {"a", "c"}
        assert m.sat_count(f, ["a", "c"]) == 3
        assert m.sat_count(f, ["a", "b", "c"]) == 6
        assert m.sat_count(m.true, ["a", "b"]) == 4
        with pytest.raises(ValueError):
            m.sat_count(f, ["a"])

    def test_pick_witness_prefers_false(self, m):
        a, b, c = m.var("a"), m.var("b"), m.var("c")
        assert m.pick_witness(a | b, ["a", "b"]) == {"a": False, "b": True}
        assert m.pick_witness((a & c) | b, ["a"]) == {"a": False}
        with pytest.raises(UnsatisfiableError):
            m.pick_witness(a & ~a, ["a"])

    def test_iter_cubes_are_disjoint_cover(self, m):
        a, b, c = m.var("a"), m.var("b"), m.var("c")
        f = (a & ~b) | c
        cubes = list(m.iter_cubes(f))
        assert m.disjoin(m.cube(cube) for cube in cubes) == f
        for left, right in itertools.combinations(cubes, 2):
            assert (m.cube(left) & m.cube(right)).is_false

    def test_split_on_leading_variables(self, m):
        a, b, c, d = (m.var(n) for n in "abcd")
        f = (a & c) | (~b & d)
        pieces = list(m.split(f, ["a", "b"]))
        assert m.disjoin(m.cube(cube) & rest for cube, rest in pieces) == f
        for _, rest in pieces:
            assert m.support(rest) <= {"c", "d"}

    def test_to_expr(self, m):
        assert m.to_expr(m.true) == "true"
        assert m.to_expr(m.false) == "false"
        assert m.to_expr(m.var("a") & ~m.var("b")) == "a & !b"
        assert m.to_expr(m.var("a") | m.var("b")) == "(!a & b) | a"

    def test_to_dot(self, m):
        text = m.to_dot(m.var("a") & m.var("b"))
        assert text.startswith("digraph bdd {")
        assert 'label="a"' in text and 'label="b"' in text


class TestGarbageCollection:
    def test_dead_nodes_are_freed(self, m):
        keep = m.var("a") & m.var("b")
        for name in ("c", "d"):
            _ = m.var(name) | m.var("a")
        del _
        freed = m.collect_garbage()
        assert freed > 0
        assert keep == (m.var("a") & m.var("b"))

    def test_results_survive_collection(self, m):
        f = (m.var("a") & m.var("b")) | m.var("c")
        m.collect_garbage()
        for z in assignments(("a", "b", "c")):
            assert m.evaluate(f, z) == ((z["a"] and z["b"]) or z["c"])
