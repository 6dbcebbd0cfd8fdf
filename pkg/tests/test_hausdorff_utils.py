from fractions import Fraction

import pytest

from core_utils import (
    Order,
    TreeModel,
    every_other_tree,
    full_tree,
    hausdorff_premeasure,
    lebesgue_premeasure,
    probability_premeasure,
    single_path_tree,
)
from hausdorff_utils import (
    CutCertificate,
    bisect_dimension,
    check_certificate,
    enumerate_cuts,
    exhaustive_method1_value,
    hdim_estimate,
    method1_value,
)
from numeric_utils import Interval


def test_full_tree_lebesgue_value_is_one():
    value, cert = method1_value(full_tree(), lebesgue_premeasure(), 6)
    assert value == Interval.exact(1)
    assert cert.antichain == ("",)
    assert check_certificate(full_tree(), lebesgue_premeasure(), 6, cert) == (True, None)


def test_every_other_tree_at_dimension_one():
    value, cert = method1_value(every_other_tree(), lebesgue_premeasure(), 4)
    assert value == Interval.exact(Fraction(1, 4))
    assert cert.antichain == ("0000", "0010", "1000", "1010")
    assert cert.weight == value


def test_single_path_collapses_to_deepest_node():
    value, cert = method1_value(single_path_tree(), lebesgue_premeasure(), 5)
    assert value == Interval.exact(Fraction(1, 32))
    assert cert.antichain == ("00000",)


def test_large_cut_is_not_materialized():
    _, cert = method1_value(every_other_tree(), lebesgue_premeasure(), 4, certificate_limit=2)
    assert not cert.materialized
    assert cert.size == 4
    assert cert.to_json()["truncated"] is True
    assert check_certificate(every_other_tree(), lebesgue_premeasure(), 4, cert)[0] is False


@pytest.mark.parametrize("cut,reason", [
    (("0", "00", "1"), "cut is not prefix-free"),
    (("0",), "depth-2 node '10' is not covered"),
    (("0", "1", "111"), "cut is not prefix-free"),
])
def test_bad_certificates(cut, reason):
    cert = CutCertificate(cut, len(cut), Interval.exact(0))
    assert check_certificate(full_tree(), lebesgue_premeasure(), 2, cert) == (False, reason)


def test_certificate_must_stay_on_tree():
    cert = CutCertificate(("0", "1"), 2, Interval.exact(1))
    assert check_certificate(single_path_tree(), lebesgue_premeasure(), 2, cert) == (False, "cut leaves the tree")


def test_enumerate_cuts():
    assert enumerate_cuts(full_tree(), 1) == [("",), ("0", "1")]
    assert len(enumerate_cuts(full_tree(), 2)) == 5


@pytest.mark.parametrize("order", [Order.linear(1), Order.staircase([0, 1], 1), Order.linear(0)])
def test_min_cut_matches_exhaustive_search(rng, make_tree, order):
    rho = hausdorff_premeasure(order)
    for _ in range(25):
        T = make_tree(rng, 4)
        value, cert = method1_value(T, rho, 4)
        assert value == exhaustive_method1_value(T, rho, 4)
        assert cert.weight == value
        assert check_certificate(T, rho, 4, cert) == (True, None)


def test_per_node_premeasure_matches_exhaustive_search(rng, make_tree, make_measure):
    for _ in range(25):
        T = make_tree(rng, 4)
        rho = probability_premeasure(make_measure(rng, 4, zero_rate=0.2))
        value, cert = method1_value(T, rho, 4)
        assert value == exhaustive_method1_value(T, rho, 4)
        assert check_certificate(T, rho, 4, cert) == (True, None)


def _pruned(rng, T, keep=0.8):
    """Prefix-closed subtree of T: each non-root node survives with its parent with probability keep."""
    dropped = {sigma for sigma in sorted(T.nodes) if sigma and rng.random() >= keep}
    return TreeModel.explicit({
        sigma for sigma in T.nodes if not any(sigma[:k] in dropped for k in range(1, len(sigma) + 1))
    })


@pytest.mark.parametrize("rho", [lebesgue_premeasure(), hausdorff_premeasure(Order.linear(Fraction(1, 2)))])
def test_method1_is_monotone_under_pruning(rng, make_tree, rho):
    for _ in range(50):
        T = make_tree(rng, 5, p=0.7)
        smaller, _ = method1_value(_pruned(rng, T), rho, 5)
        value, _ = method1_value(T, rho, 5)
        assert smaller.lo <= value.hi


@pytest.mark.parametrize("rho", [lebesgue_premeasure(), hausdorff_premeasure(Order.linear(Fraction(1, 2)))])
def test_method1_is_subadditive_over_unions(rng, make_tree, rho):
    for _ in range(50):
        A, B = make_tree(rng, 5), make_tree(rng, 5)
        union, _ = method1_value(TreeModel.explicit(A.nodes | B.nodes), rho, 5)
        a, _ = method1_value(A, rho, 5)
        b, _ = method1_value(B, rho, 5)
        assert union.lo <= (a + b).hi


def test_negative_depth_rejected():
    with pytest.raises(ValueError):
        method1_value(full_tree(), lebesgue_premeasure(), -1)


# ============================================================================
# DIMENSION SEARCH
# ============================================================================

def test_bisect_dimension():
    lo, hi, trials = bisect_dimension(lambda s: s <= Fraction(1, 3), Fraction(1, 16))
    assert lo <= Fraction(1, 3) <= hi
    assert hi - lo <= Fraction(1, 16)
    assert trials[0] == (Fraction(1), False)
    assert bisect_dimension(lambda s: True, Fraction(1, 8)) == (1, 1, [(Fraction(1), True)])


@pytest.mark.parametrize("tree,lo,hi", [
    (every_other_tree(), Fraction(37, 80), Fraction(9, 16)),
    (full_tree(), Fraction(9, 10), Fraction(1)),
    (single_path_tree(), Fraction(0), Fraction(1, 16)),
])
def test_hdim_estimate(tree, lo, hi):
    estimate = hdim_estimate(tree, 40, Fraction(1, 10))
    assert (estimate.lo, estimate.hi) == (lo, hi)
    assert estimate.hi - estimate.lo <= Fraction(1, 10)


def test_hdim_estimate_brackets_half_for_every_other_tree():
    estimate = hdim_estimate(every_other_tree(), 40, Fraction(1, 10))
    assert estimate.contains(Fraction(1, 2))
    data = estimate.to_json()
    assert data["interval"] == ["37/80", "9/16"]
    assert data["trials"][0] == {"s": "1", "positive": False}


@pytest.mark.parametrize("N,tol", [(0, Fraction(1, 10)), (10, Fraction(0)), (10, Fraction(1))])
def test_hdim_estimate_rejects(N, tol):
    with pytest.raises(ValueError):
        hdim_estimate(full_tree(), N, tol)
