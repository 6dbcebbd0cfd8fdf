from fractions import Fraction

import pytest

from numeric_utils import (
    Interval,
    UndecidedError,
    ceil_log2,
    escalate,
    format_rational,
    interval_from_json,
    interval_min,
    interval_sum,
    parse_rational,
    pow2,
)


@pytest.mark.parametrize("text,expected", [
    ("3/4", Fraction(3, 4)),
    ("0.25", Fraction(1, 4)),
    ("-2", Fraction(-2)),
    (" 5 ", Fraction(5)),
])
def test_parse_rational(text, expected):
    assert parse_rational(text) == expected


@pytest.mark.parametrize("text", ["", "1/0", "abc", "1/2/3"])
def test_parse_rational_rejects(text):
    with pytest.raises(ValueError):
        parse_rational(text)


def test_format_rational():
    assert format_rational(Fraction(4, 2)) == "2"
    assert format_rational(Fraction(1, 3)) == "1/3"
    assert format_rational("6/8") == "3/4"


def test_pow2_exact_for_integer_exponents():
    assert pow2(-3) == Interval.exact(Fraction(1, 8))
    assert pow2(Fraction(4, 2)) == Interval.exact(4)


def test_pow2_encloses_square_root():
    root = pow2(Fraction(1, 2), 128)
    assert root.lo ** 2 <= 2 <= root.hi ** 2
    assert 0 < root.width < Fraction(1, 2 ** 100)


def test_higher_precision_tightens():
    coarse = pow2(Fraction(-1, 3), 64)
    fine = pow2(Fraction(-1, 3), 256)
    assert coarse.contains(fine)
    assert fine.width < coarse.width


def test_comparisons_are_three_valued():
    assert Interval(1, 2).lt(3) is True
    assert Interval(3, 4).lt(3) is False
    assert Interval(1, 3).lt(2) is None
    assert Interval(1, 2).le(2) is True
    assert Interval(2, 3).le(2) is None
    assert Interval(2, 3).ge(1) is True


def test_interval_arithmetic():
    a = Interval(1, 2)
    b = Interval(-1, 3)
    assert a + b == Interval(0, 5)
    assert a - b == Interval(-2, 3)
    assert a * b == Interval(-2, 6)
    assert 1 / a == Interval(Fraction(1, 2), 1)
    with pytest.raises(ZeroDivisionError):
        1 / b


def test_hulls_and_sums():
    assert interval_min(Interval(1, 4), Interval(2, 3)) == Interval(1, 3)
    assert interval_sum([Fraction(1, 2), Interval(1, 2)]) == Interval(Fraction(3, 2), Fraction(5, 2))
    assert interval_sum([]) == Interval.exact(0)


def test_exact_value_and_json():
    assert Interval.exact(Fraction(1, 4)).to_json() == "1/4"
    data = Interval(Fraction(1, 3), Fraction(1, 2)).to_json()
    assert data["lo"] == "1/3" and data["hi"] == "1/2"
    assert interval_from_json(data) == Interval(Fraction(1, 3), Fraction(1, 2))
    with pytest.raises(UndecidedError):
        Interval(0, 1).value


@pytest.mark.parametrize("value,expected", [
    (Fraction(5), 3),
    (Fraction(4), 2),
    (Fraction(1), 0),
    (Fraction(3, 8), -1),
    (Interval(3, 5), None),
])
def test_ceil_log2(value, expected):
    assert ceil_log2(value) == expected


def test_escalate_doubles_until_decided():
    seen = []

    def compute(bits):
        seen.append(bits)
        return bits if bits >= 512 else None

    assert escalate(compute, 128) == 512
    assert seen == [128, 256, 512]


def test_escalate_gives_up_at_ceiling():
    with pytest.raises(UndecidedError):
        escalate(lambda bits: None, 128, what="stubborn")
