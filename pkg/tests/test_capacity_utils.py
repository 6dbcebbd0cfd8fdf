import itertools
from fractions import Fraction

import pytest

from capacity_utils import capacity_lower, capdim_estimate, energy, minimize_energy, potential
from core_utils import Order, TreeModel, common_prefix_length, every_other_tree, full_tree, single_path_tree
from frostman_utils import build_measure_along_tree, zero_semimeasure
from measure_utils import dirac_zero, lebesgue_measure, natural_measure
from numeric_utils import DomainError, Interval, pow2

HALF = Fraction(1, 2)


def _encloses_lebesgue_half_energy(total):
    # I_{1/2}(lambda) = 1 + sqrt(2)/2
    return (2 * (total.lo - 1)) ** 2 <= 2 <= (2 * (total.hi - 1)) ** 2


def test_lebesgue_energy():
    report = energy(lebesgue_measure(), HALF, 30)
    assert report.finite
    assert _encloses_lebesgue_half_energy(report.total)
    assert report.total.width < Fraction(1, 10 ** 12)


def test_lebesgue_potential_matches_energy():
    report = potential(lebesgue_measure(), "0" * 30, HALF, 30)
    assert _encloses_lebesgue_half_energy(report.total)


def test_dirac_potential_away_from_the_atom():
    report = potential(dirac_zero(), "1" + "0" * 29, HALF, 30)
    assert report.total == Interval.exact(1)


def test_atoms_make_energy_diverge():
    report = energy(dirac_zero(), HALF, 10)
    assert report.divergent
    assert not report.finite
    assert report.total is None
    assert report.to_json()["tailBound"] == "divergent"


def test_zero_energy_counts_every_pair():
    assert energy(lebesgue_measure(), 0, 5).total == Interval.exact(1)


def test_lebesgue_energy_diverges_at_dimension_one():
    assert energy(lebesgue_measure(), 1, 8).divergent


def test_negative_t_rejected():
    with pytest.raises(DomainError):
        energy(lebesgue_measure(), -1, 4)
    with pytest.raises(ValueError):
        potential(lebesgue_measure(), "01", HALF, 4)


def test_bounded_measure_has_finite_energy_below_s():
    m = natural_measure(every_other_tree())
    report = energy(m, Fraction(1, 4), 30, bound=(HALF, 1))
    assert report.finite
    assert report.total.hi < 2
    assert not energy(m, Fraction(1, 4), 30).finite


@pytest.mark.parametrize("t", [0, 1, 2])
def test_partial_sum_matches_pair_sum(rng, make_measure, t):
    for _ in range(5):
        m = make_measure(rng, 6, zero_rate=0.3)
        leaves = [("".join(bits), m.mass("".join(bits))) for bits in itertools.product("01", repeat=6)]
        brute = sum(
            (Fraction(2) ** (t * common_prefix_length(a, b)) * ma * mb
             for (a, ma), (b, mb) in itertools.product(leaves, repeat=2) if a != b),
            Fraction(0),
        )
        assert energy(m, t, 6).value == Interval.exact(brute)


def test_energy_is_monotone_in_t(rng, make_measure):
    ts = [Fraction(k, 4) for k in range(4)]
    for _ in range(20):
        m = make_measure(rng, 5)
        reports = [energy(m, t, 8) for t in ts]
        assert all(r.finite for r in reports)
        for a, b in zip(reports, reports[1:]):
            assert a.value.lo <= b.value.hi
            assert a.total.lo <= b.total.hi


def test_frostman_measures_obey_the_energy_bound(rng, make_tree):
    for _ in range(200):
        N = rng.randint(3, 6)
        T = make_tree(rng, N)
        s = rng.choice([HALF, Fraction(3, 4), Fraction(1)])
        gamma = rng.choice([Fraction(1), Fraction(3, 2), Fraction(2)])
        t = s * Fraction(rng.randint(0, 3), 4)
        result = build_measure_along_tree(T, zero_semimeasure(), Order.linear(s), gamma, N)
        assert result.ok
        report = energy(result.measure, t, N, bound=(s, gamma))
        assert report.finite
        assert report.total.le(gamma / (1 - pow2(t - s))) is True


# ============================================================================
# CAPACITY AND CAPACITARY DIMENSION
# ============================================================================

def test_full_tree_capacity():
    result = capacity_lower(full_tree(), HALF, 30)
    assert result.candidate == "maxflow"
    assert abs(float(result.lower) - 0.5857864376) < 1e-6


def test_single_path_has_no_capacity():
    assert capacity_lower(single_path_tree(), HALF, 10).lower == 0


@pytest.mark.parametrize("tree,lo,hi", [
    (every_other_tree(), HALF, Fraction(9, 16)),
    (full_tree(), Fraction(1), Fraction(1)),
    (single_path_tree(), Fraction(0), Fraction(1, 16)),
])
def test_capdim_estimate(tree, lo, hi):
    estimate = capdim_estimate(tree, 40, Fraction(1, 10))
    assert (estimate.lo, estimate.hi) == (lo, hi)


def test_capdim_estimate_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        capdim_estimate(full_tree(), 10, Fraction(3, 2))


# ============================================================================
# ENERGY MINIMIZATION
# ============================================================================

def test_uniform_is_optimal_on_full_tree():
    result = minimize_energy(full_tree(), HALF, 10)
    assert result.converged
    assert abs(float(result.report.total.lo) - 1.70710678) < 1e-4


def test_minimizer_never_loses_to_natural_measure():
    T = every_other_tree()
    result = minimize_energy(T, Fraction(1, 4), 10)
    start = energy(natural_measure(T, 10).to_cylinder(), Fraction(1, 4), 10)
    assert result.report.total.hi <= start.total.hi


def test_minimizer_on_random_trees(rng, make_tree):
    checked = 0
    for _ in range(20):
        T = make_tree(rng, 4, p=0.75)
        try:
            result = minimize_energy(T, Fraction(1, 3), 4)
        except DomainError:
            continue
        checked += 1
        start = energy(natural_measure(T, 4).to_cylinder(), Fraction(1, 3), 4)
        if start.finite:
            assert result.report.total.hi <= start.total.hi
        energies = [it.energy for it in result.history]
        assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
    assert checked


def test_minimize_energy_rejects():
    with pytest.raises(DomainError):
        minimize_energy(TreeModel.explicit({"", "0"}), HALF, 3)
    with pytest.raises(DomainError):
        minimize_energy(full_tree(), 1, 4)
