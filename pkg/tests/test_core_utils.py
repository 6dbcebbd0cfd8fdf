from fractions import Fraction

import pytest

from core_utils import (
    EmptyTreeError,
    Order,
    TreeModel,
    cantor_distance,
    check_convex,
    check_geometrical,
    every_other_tree,
    full_tree,
    hausdorff_premeasure,
    is_prefix_free,
    lebesgue_premeasure,
    level_graph,
    live_classes,
    order_eval,
    premeasure_eval,
    single_path_tree,
    table_premeasure,
    tree_expand,
)
from numeric_utils import DomainError, Interval

CEIL_HALF = Order.staircase([0, 1], 1)


def test_prefix_free():
    assert is_prefix_free(["0", "10", "11"])
    assert not is_prefix_free(["0", "01"])
    assert not is_prefix_free(["1", "0", "110", "11"])
    assert is_prefix_free([])


def test_cantor_distance():
    assert cantor_distance("0101", "0110").value == Interval.exact(Fraction(1, 4))
    assert cantor_distance("0", "1").value == Interval.exact(1)
    assert cantor_distance("01", "011").unresolved
    with pytest.raises(ValueError):
        cantor_distance("012", "0")


def test_cantor_distance_is_an_ultrametric(rng):
    for _ in range(300):
        x, y, z = ("".join(rng.choice("01") for _ in range(8)) for _ in range(3))
        if len({x, y, z}) < 3:
            continue
        xy, yz, xz = cantor_distance(x, y).value, cantor_distance(y, z).value, cantor_distance(x, z).value
        assert xy == cantor_distance(y, x).value
        assert xz.lo <= max(xy.hi, yz.hi)


def test_linear_order():
    h = Order.linear(Fraction(1, 2))
    assert h(4) == 2
    assert h(3) == Fraction(3, 2)


def test_staircase_is_ceil_half():
    assert [CEIL_HALF(n) for n in range(7)] == [0, 1, 1, 2, 2, 3, 3]


def test_table_order_tail():
    h = Order.table([0, 1, 1, 2], tail=1)
    assert [h(n) for n in range(6)] == [0, 1, 1, 2, 3, 4]
    with pytest.raises(DomainError):
        Order.table([0, 1])(2)


@pytest.mark.parametrize("kwargs", [
    {"kind": "linear"},
    {"kind": "table", "values": (2, 1)},
    {"kind": "linear", "slope": -1},
    {"kind": "staircase", "values": (0, 3), "slope": 1},
    {"kind": "bogus", "slope": 1},
])
def test_order_rejects(kwargs):
    with pytest.raises(ValueError):
        Order(**kwargs)


def test_order_json_round_trip():
    for h in (Order.linear(Fraction(1, 3)), Order.table([0, 1], Fraction(1, 2)), CEIL_HALF):
        assert Order.from_json(h.to_json()) == h
    assert CEIL_HALF.to_json() == {"kind": "staircase", "values": ["0", "1"], "step": "1"}


def test_order_eval_is_exact():
    assert [order_eval(CEIL_HALF, n) for n in (0, 1, 4, 5)] == [Interval.exact(k) for k in (0, 1, 2, 3)]
    assert order_eval(Order.linear(Fraction(1, 3)), 3) == Interval.exact(1)


def test_check_convex():
    assert check_convex(Order.linear(1), 10)
    assert check_convex(CEIL_HALF, 10)
    assert not check_convex(Order.linear(2), 10)
    assert not check_convex(Order.table([0, 0, 2], tail=0), 3)
    with pytest.raises(ValueError):
        check_convex(Order.linear(1), 0)


def test_premeasure_values():
    assert premeasure_eval(lebesgue_premeasure(), "010") == Interval.exact(Fraction(1, 8))
    assert hausdorff_premeasure(CEIL_HALF).evaluate("000") == Interval.exact(Fraction(1, 4))
    assert hausdorff_premeasure(Order.linear(1), scale=3).evaluate("0") == Interval.exact(Fraction(3, 2))
    rho = table_premeasure({"": 1, "0": Fraction(1, 2)})
    assert rho.evaluate("0") == Interval.exact(Fraction(1, 2))
    with pytest.raises(DomainError):
        rho.evaluate("1")


def test_lebesgue_is_geometrical():
    report = check_geometrical(lebesgue_premeasure(), 5)
    assert report.ok
    assert report.p == Interval.exact(Fraction(1, 2))
    assert report.q == Interval.exact(1)


def test_half_dimensional_premeasure_is_geometrical():
    report = check_geometrical(hausdorff_premeasure(Order.linear(Fraction(1, 2))), 6)
    assert report.ok
    # p encloses 2^(-1/2) and q encloses 2^(1/2)
    assert report.p.lo ** 2 <= Fraction(1, 2) <= report.p.hi ** 2
    assert report.q.lo ** 2 <= 2 <= report.q.hi ** 2


def test_geometrical_violations():
    report = check_geometrical(hausdorff_premeasure(Order.linear(2)), 3)
    assert not report.ok and report.clause == "G3" and report.node == ""
    growing = table_premeasure({"": Fraction(1, 2), "0": 1, "1": 0})
    report = check_geometrical(growing, 0)
    assert not report.ok and report.clause == "G2"


@pytest.mark.parametrize("child,ok", [(Fraction(99, 100), True), (Fraction(1), False)])
def test_geometrical_witnesses_stay_in_range(child, ok):
    report = check_geometrical(table_premeasure({"": 1, "0": child, "1": child}), 0)
    assert report.ok is ok
    if ok:
        assert report.p == Interval.exact(child)
        assert report.q == Interval.exact(2 * child)
        assert report.p.hi < 1 and 1 <= report.q.lo and report.q.hi < 2
    else:
        assert report.clause == "G2"


def test_every_other_expansion():
    nodes = tree_expand(every_other_tree(), 3)
    assert nodes == {"", "0", "1", "00", "10", "000", "001", "100", "101"}
    assert every_other_tree().contains("1000")
    assert not every_other_tree().contains("0100")


def test_single_path_and_full_trees():
    assert tree_expand(single_path_tree(), 4) == {"", "0", "00", "000", "0000"}
    assert len(tree_expand(full_tree(), 4)) == 31


def test_explicit_tree_must_be_prefix_closed():
    with pytest.raises(ValueError):
        TreeModel.explicit({"", "01"})


def test_dead_start_state():
    dead = TreeModel.automaton({"A": {"0": "A"}}, "A", [])
    with pytest.raises(EmptyTreeError):
        tree_expand(dead, 2)
    assert level_graph(dead, 2) == []


def test_tree_json_round_trip():
    explicit = TreeModel.explicit({"", "1", "10", "11"})
    assert TreeModel.from_json(explicit.to_json()).nodes == explicit.nodes
    automaton = TreeModel.from_json(every_other_tree().to_json())
    assert tree_expand(automaton, 6) == tree_expand(every_other_tree(), 6)


def test_automaton_json_without_start_uses_first_state():
    T = TreeModel.from_json({"kind": "automaton", "transitions": {"0": {"0": "0", "1": "0"}}, "accept": ["0"]})
    assert T.start == "0"
    assert len(tree_expand(T, 3)) == 15
    with pytest.raises(ValueError):
        TreeModel.from_json({"kind": "automaton", "transitions": {}, "accept": []})


@pytest.mark.parametrize("tree,start,expected", [
    (full_tree(), 0, 0),
    (full_tree(), 3, 3),
    (TreeModel.automaton({"R": {"0": "A"}, "A": {"0": "A", "1": "A"}}, "R", ["R", "A"]), 0, 1),
    (every_other_tree(), 0, None),
    (single_path_tree(), 0, None),
    (TreeModel.explicit({"", "0"}), 0, None),
])
def test_full_depth(tree, start, expected):
    assert tree.full_depth(start) == expected


def test_level_graph_shares_states():
    levels = level_graph(full_tree(), 3)
    assert len(levels) == 4
    assert levels[0] == {"F": [("0", "F"), ("1", "F")]}
    assert levels[3] == {"F": []}


def test_live_classes_prune_dead_branches():
    T = TreeModel.explicit({"", "0", "1", "00"})
    levels = level_graph(T, 2)
    live = live_classes(levels)
    assert live[1] == {"0"}
    assert live[2] == {"00"}
