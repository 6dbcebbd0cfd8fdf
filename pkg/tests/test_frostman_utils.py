from fractions import Fraction

import pytest

from core_utils import (
    Order,
    TreeModel,
    every_other_tree,
    full_tree,
    hausdorff_premeasure,
    single_path_tree,
    tree_expand,
)
from frostman_utils import (
    MonotoneMachine,
    build_measure_along_tree,
    certified_caps,
    complexity_tree,
    doubling_machine,
    empty_machine,
    identity_machine,
    machine_preimage_semimeasure,
    machine_semimeasure,
    mass_distribution_bound,
    maxflow_measure,
    networkx_flow_value,
    semimeasure_validate,
    table_semimeasure,
    zero_semimeasure,
)
from hausdorff_utils import exhaustive_method1_value
from measure_utils import check_h_bounded, dirac_zero, lebesgue_measure, natural_measure, validate_probability
from numeric_utils import DomainError, Interval, interval_min

CEIL_HALF = Order.staircase([0, 1], 1)


# ============================================================================
# SEMIMEASURES AND MACHINES
# ============================================================================

def test_semimeasure_validate():
    assert semimeasure_validate(zero_semimeasure(), 4) == (True, None)
    good = table_semimeasure({"": 1, "0": Fraction(1, 2), "1": Fraction(1, 2), "00": Fraction(1, 4)})
    assert semimeasure_validate(good, 3) == (True, None)
    bad = table_semimeasure({"": Fraction(1, 2), "0": Fraction(1, 2), "1": Fraction(1, 4)})
    assert semimeasure_validate(bad, 2) == (False, "")
    assert semimeasure_validate(table_semimeasure({"": 2}), 1) == (False, "")


def test_identity_machine_gives_lebesgue():
    eta = machine_semimeasure(identity_machine(3))
    assert eta("01") == Fraction(1, 4)
    assert semimeasure_validate(eta, 3) == (True, None)


def test_doubling_machine_preimages():
    M = doubling_machine(2)
    assert M.preimage("00") == ("0",)
    assert M.preimage("0") == ("0",)
    assert machine_preimage_semimeasure(M, "01") == 0
    assert machine_preimage_semimeasure(M, "0011") == Fraction(1, 4)
    assert empty_machine().preimage("") == ()


def test_inconsistent_machine_rejected():
    with pytest.raises(DomainError):
        MonotoneMachine((("0", "1"), ("00", "0")))


def test_complexity_trees():
    assert len(tree_expand(complexity_tree(identity_machine(5), Order.linear(Fraction(1, 2)), 1, 5), 5)) == 63
    T = complexity_tree(doubling_machine(2), Order.linear(1), 1, 2)
    assert T.nodes == {"", "0", "1", "01", "10"}


# ============================================================================
# THE INDUCTIVE CONSTRUCTION
# ============================================================================

def test_construction_on_full_tree_is_lebesgue():
    result = build_measure_along_tree(full_tree(), zero_semimeasure(), Order.linear(1), 1, 4)
    assert result.ok
    assert result.measure.mass("0101") == Fraction(1, 16)
    assert result.measure.mass("01011") == Fraction(1, 32)


def test_construction_on_every_other_tree_is_natural():
    result = build_measure_along_tree(every_other_tree(), zero_semimeasure(), CEIL_HALF, 1, 4)
    assert result.ok
    assert result.clamped == 0
    natural = natural_measure(every_other_tree())
    for sigma in tree_expand(every_other_tree(), 4):
        assert result.measure.mass(sigma) == natural.mass(sigma)


def test_construction_respects_semimeasure():
    eta = table_semimeasure({"": 1, "0": Fraction(1, 2), "00": Fraction(1, 4)})
    result = build_measure_along_tree(full_tree(), eta, Order.linear(Fraction(1, 2)), 1, 4)
    assert result.ok
    assert result.measure.mass("00") >= Fraction(1, 4)
    assert result.to_json()["audit"]["violation"] is None


@pytest.mark.parametrize("eta,h,gamma", [
    (zero_semimeasure(), Order.linear(2), 1),
    (zero_semimeasure(), Order.linear(1), Fraction(1, 2)),
    (table_semimeasure({"": 1, "0": 1}), Order.linear(1), 1),
    (table_semimeasure({"": Fraction(1, 2), "0": Fraction(1, 2), "1": Fraction(1, 2)}), Order.linear(1), 1),
])
def test_construction_rejects(eta, h, gamma):
    with pytest.raises(DomainError):
        build_measure_along_tree(full_tree(), eta, h, gamma, 3)


def test_certified_caps_halve_at_most():
    caps = certified_caps(Order.linear(Fraction(1, 3)), 1, 8)
    assert caps[0] == 1
    assert all(caps[n] <= 2 * caps[n + 1] for n in range(8))


def _random_semimeasure(rng, T, caps, N):
    values = {"": min(Fraction(1), caps[0]) * Fraction(rng.randint(0, 4), 4)}
    frontier = [""]
    for n in range(N):
        nxt = []
        for sigma in frontier:
            for b in "01":
                child = sigma + b
                if T.contains(child):
                    values[child] = min(caps[n + 1], values[sigma] * Fraction(rng.randint(0, 4), 8))
                    nxt.append(child)
        frontier = nxt
    return table_semimeasure(values)


def _random_convex_order(rng):
    kind = rng.randrange(3)
    if kind == 0:
        return Order.linear(Fraction(rng.randint(0, 4), 4))
    if kind == 1:
        values = [Fraction(0)]
        for _ in range(rng.randint(0, 4)):
            values.append(values[-1] + Fraction(rng.randint(0, 2), 2))
        return Order.table(values, Fraction(rng.randint(0, 2), 2))
    return CEIL_HALF


def test_construction_audit_on_random_instances(rng, make_tree):
    for _ in range(1000):
        N = rng.randint(1, 5)
        T = make_tree(rng, N)
        h = _random_convex_order(rng)
        gamma = rng.choice([Fraction(1), Fraction(3, 2), Fraction(2)])
        eta = _random_semimeasure(rng, T, certified_caps(h, gamma, N), N)
        result = build_measure_along_tree(T, eta, h, gamma, N)
        assert result.ok, result.violation
        assert validate_probability(result.measure) == (True, None)
        assert all(eta(sigma) <= result.measure.mass(sigma) for sigma in tree_expand(T, N))
        assert check_h_bounded(result.measure, h, gamma, N) == (True, None)


# ============================================================================
# MAX-FLOW
# ============================================================================

def test_every_other_tree_blocks_dimension_one():
    result = maxflow_measure(every_other_tree(), Order.linear(1), 1, 6)
    assert result.value == Interval.exact(Fraction(1, 8))
    assert not result.feasible
    assert result.measure is None
    assert result.crosscheck is None


def test_networkx_agrees_on_explicit_copy():
    T = TreeModel.explicit(tree_expand(every_other_tree(), 6))
    result = maxflow_measure(T, Order.linear(1), 1, 6)
    assert result.crosscheck == Fraction(1, 8)
    assert networkx_flow_value(T, Order.linear(1), 2, 6) == Fraction(1, 4)


def test_feasible_flow_yields_bounded_measure():
    result = maxflow_measure(every_other_tree(), CEIL_HALF, 1, 6)
    assert result.feasible
    assert result.bounded is True
    assert result.measure.mass("10") == Fraction(1, 2)
    assert check_h_bounded(result.measure, CEIL_HALF, 1, 6) == (True, None)
    full = maxflow_measure(full_tree(), Order.linear(1), 1, 5)
    assert full.measure.mass("01") == Fraction(1, 4)


def test_networkx_needs_integer_orders():
    with pytest.raises(DomainError):
        networkx_flow_value(full_tree(), Order.linear(Fraction(1, 2)), 1, 3)


FLOW_CASES = [
    (Order.linear(1), Fraction(1)),
    (Order.linear(1), Fraction(2)),
    (CEIL_HALF, Fraction(1)),
    (CEIL_HALF, Fraction(1, 2)),
    (Order.linear(0), Fraction(1, 2)),
]


def test_max_flow_matches_exhaustive_min_cut(rng, make_tree):
    checked = 0
    while checked < 200:
        N = rng.randint(1, 5)
        T = make_tree(rng, N)
        if not any(len(sigma) == N for sigma in T.nodes):
            continue
        h, gamma = FLOW_CASES[checked % len(FLOW_CASES)]
        result = maxflow_measure(T, h, gamma, N)
        cut = exhaustive_method1_value(T, hausdorff_premeasure(h, scale=gamma), N)
        assert result.cut_value == cut
        assert result.value == interval_min(Interval.exact(1), cut)
        assert Interval.exact(result.crosscheck) == result.value
        if result.feasible:
            assert result.bounded is True
        checked += 1


def test_maxflow_on_empty_tree():
    dead = TreeModel.automaton({"A": {}}, "A", [])
    with pytest.raises(DomainError):
        maxflow_measure(dead, Order.linear(1), 1, 3)


# ============================================================================
# MASS DISTRIBUTION PRINCIPLE
# ============================================================================

def test_mass_distribution_on_full_tree():
    result = mass_distribution_bound(lebesgue_measure(), full_tree(), 1, 1, 5)
    assert result.bound == 1
    assert result.holds
    assert result.value == Interval.exact(1)


def test_mass_distribution_on_every_other_tree():
    m = natural_measure(every_other_tree())
    result = mass_distribution_bound(m, every_other_tree(), Fraction(1, 2), 1, 6)
    assert result.holds
    assert result.value == Interval.exact(1)
    assert mass_distribution_bound(m, every_other_tree(), Fraction(1, 2), 2, 6).bound == Fraction(1, 2)


def test_mass_distribution_on_random_instances(rng, make_tree):
    checked = 0
    while checked < 200:
        N = rng.randint(1, 6)
        T = make_tree(rng, N)
        if not any(len(sigma) == N for sigma in T.nodes):
            continue
        m = natural_measure(T, N)
        # m <= c 2^(-n) on every level, hence m <= c 2^(-sn) for s <= 1
        c = max(m.max_mass(n) * 2 ** n for n in range(N + 1)) * rng.choice([1, Fraction(3, 2), 2])
        s = Fraction(rng.randint(1, 4), 4)
        result = mass_distribution_bound(m, T, s, c, N)
        assert result.bound == 1 / c
        assert result.holds
        assert result.value.ge(result.bound) is True
        checked += 1


def test_mass_distribution_rejects():
    with pytest.raises(DomainError):
        mass_distribution_bound(dirac_zero(), full_tree(), Fraction(1, 2), 1, 4)
    with pytest.raises(DomainError):
        mass_distribution_bound(lebesgue_measure(), every_other_tree(), Fraction(1, 2), 1, 4)
    with pytest.raises(ValueError):
        mass_distribution_bound(lebesgue_measure(), full_tree(), 1, 0, 4)
    with pytest.raises(DomainError):
        mass_distribution_bound(lebesgue_measure(), single_path_tree(), 1, 1, 2)
