"""Exact rationals, outward-rounded intervals and precision escalation.

Every real-valued quantity in measureit is a `Interval` with `Fraction` endpoints.
Exact values are degenerate intervals; irrational powers of two are enclosed by
gmpy2 evaluations under downward and upward rounding.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

import gmpy2 as gmp

from config_manager import DEFAULT_PRECISION, MAX_PRECISION

logger = logging.getLogger("measureit.numeric_utils")


class DomainError(ValueError):
    """A domain operation was called outside its contract."""


class UndecidedError(DomainError):
    """An interval comparison straddles its threshold at the highest precision."""


# ============================================================================
# RATIONALS
# ============================================================================

def parse_rational(text):
    """Parse "p/q", an integer or a finite decimal into a Fraction."""
    text = str(text).strip()
    if not text:
        raise ValueError("empty rational")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ValueError(f"not a rational: {text!r}") from e


def to_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, Interval):
        return value.value
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


def format_rational(value):
    """Serialize as "p/q", or "p" for integers."""
    q = to_fraction(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ============================================================================
# INTERVALS
# ============================================================================

@dataclass(frozen=True)
class Interval:
    """Closed rational interval [lo, hi]; lo == hi for exact values."""
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo = to_fraction(self.lo)
        hi = to_fraction(self.hi)
        if lo > hi:
            raise ValueError(f"interval endpoints out of order: {lo} > {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def exact(cls, value):
        q = to_fraction(value)
        return cls(q, q)

    @property
    def is_exact(self):
        return self.lo == self.hi

    @property
    def value(self):
        """The exact value; raises UndecidedError for proper intervals."""
        if not self.is_exact:
            raise UndecidedError(f"value is only known within [{float(self.lo)}, {float(self.hi)}]")
        return self.lo

    @property
    def midpoint(self):
        return (self.lo + self.hi) / 2

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, x):
        x = as_interval(x)
        return self.lo <= x.lo and x.hi <= self.hi

    # Arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-as_interval(other))

    def __rsub__(self, other):
        return as_interval(other) - self

    def __mul__(self, other):
        other = as_interval(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return Interval(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self):
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return Interval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * as_interval(other).reciprocal()

    def __rtruediv__(self, other):
        return as_interval(other) * self.reciprocal()

    # Comparisons: True / False when certified, None when undecided ---------

    def lt(self, other):
        other = as_interval(other)
        if self.hi < other.lo:
            return True
        if self.lo >= other.hi:
            return False
        return None

    def le(self, other):
        other = as_interval(other)
        if self.hi <= other.lo:
            return True
        if self.lo > other.hi:
            return False
        return None

    def gt(self, other):
        return as_interval(other).lt(self)

    def ge(self, other):
        return as_interval(other).le(self)

    def __float__(self):
        return float(self.midpoint)

    def __str__(self):
        if self.is_exact:
            return format_rational(self.lo)
        return f"[{float(self.lo):.12g}, {float(self.hi):.12g}]"

    def to_json(self):
        if self.is_exact:
            return format_rational(self.lo)
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi), "approx": float(self)}


def as_interval(value):
    if isinstance(value, Interval):
        return value
    return Interval.exact(value)


def interval_min(a, b):
    a, b = as_interval(a), as_interval(b)
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def interval_max(a, b):
    a, b = as_interval(a), as_interval(b)
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))


def interval_sum(values):
    total = Interval.exact(0)
    for v in values:
        total = total + v
    return total


def interval_from_json(data):
    if isinstance(data, dict):
        return Interval(parse_rational(data["lo"]), parse_rational(data["hi"]))
    return Interval.exact(parse_rational(data))


# ============================================================================
# POWERS OF TWO
# ============================================================================

def pow2(exponent, precision=None):
    """Enclose 2**exponent; exact for integer exponents."""
    e = to_fraction(exponent)
    if e.denominator == 1:
        return Interval.exact(Fraction(2) ** e.numerator)
    bits = precision or DEFAULT_PRECISION
    q = gmp.mpq(e.numerator, e.denominator)
    # Rounding the exponent and the power in the same direction keeps the enclosure outward
    with gmp.context(precision=bits, round=gmp.RoundDown):
        lo = gmp.exp2(gmp.mpfr(q))
    with gmp.context(precision=bits, round=gmp.RoundUp):
        hi = gmp.exp2(gmp.mpfr(q))
    return Interval(Fraction(*lo.as_integer_ratio()), Fraction(*hi.as_integer_ratio()))


def ceil_log2(value):
    """Smallest integer k with 2**k >= value, or None if the interval straddles a power of two."""
    x = as_interval(value)
    if x.lo <= 0:
        raise ValueError("ceil_log2 needs a positive value")

    def smallest(q):
        k = q.numerator.bit_length() - q.denominator.bit_length()
        while Fraction(2) ** k < q:
            k += 1
        while Fraction(2) ** (k - 1) >= q:
            k -= 1
        return k

    k_lo, k_hi = smallest(x.lo), smallest(x.hi)
    return k_lo if k_lo == k_hi else None


# ============================================================================
# PRECISION ESCALATION
# ============================================================================

def escalate(compute, precision=None, what="comparison"):
    """Call compute(bits) with doubling precision until it returns something other than None."""
    bits = precision or DEFAULT_PRECISION
    while True:
        result = compute(bits)
        if result is not None:
            return result
        if bits >= MAX_PRECISION:
            raise UndecidedError(f"{what} undecided at {bits} bits")
        logger.info(f"{what} undecided at {bits} bits, retrying at {min(bits * 2, MAX_PRECISION)}")
        bits = min(bits * 2, MAX_PRECISION)
