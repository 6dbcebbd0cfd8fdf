"""Finite-stage randomness tests: correctness checks, prefix-free generators and conversions."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from core_utils import Premeasure, check_bits, hausdorff_premeasure, Order, is_prefix, probability_premeasure
from measure_utils import as_measure, validate_probability
from numeric_utils import (
    DomainError,
    Interval,
    UndecidedError,
    ceil_log2,
    escalate,
    format_rational,
    interval_max,
    interval_sum,
    pow2,
)

logger = logging.getLogger("measureit.randomtest_utils")


@dataclass(frozen=True)
class TestObject:
    """Levels W_1..W_L of finite string sets; list order is enumeration order."""
    __test__ = False

    levels: tuple

    def __post_init__(self):
        levels = tuple(tuple(check_bits(s) for s in level) for level in self.levels)
        object.__setattr__(self, "levels", levels)

    def level(self, n):
        """W_n, 1-based."""
        return self.levels[n - 1]

    def __len__(self):
        return len(self.levels)

    def to_json(self):
        return {"levels": [list(level) for level in self.levels]}

    @classmethod
    def from_json(cls, data):
        return cls(tuple(tuple(str(s) for s in level) for level in data["levels"]))


@dataclass(frozen=True)
class LevelVerdict:
    level: int
    passed: Optional[bool]
    weight: Interval
    bound: Fraction
    witness: Optional[tuple] = None

    def to_json(self):
        data = {
            "level": self.level,
            "passed": "undecided" if self.passed is None else self.passed,
            "weight": self.weight.to_json(),
            "bound": format_rational(self.bound),
        }
        if self.witness is not None:
            data["witness"] = list(self.witness)
        return data


@dataclass(frozen=True)
class TestVerdict:
    __test__ = False

    notion: str
    levels: tuple
    horizon: Optional[int] = None
    reason: Optional[str] = None

    @property
    def passed(self):
        return self.reason is None and all(v.passed is True for v in self.levels)

    def failing_levels(self):
        return [v.level for v in self.levels if v.passed is not True]

    def to_json(self):
        data = {"notion": self.notion, "passed": self.passed, "levels": [v.to_json() for v in self.levels]}
        if self.horizon is not None:
            data["horizon"] = self.horizon
        if self.reason is not None:
            data["reason"] = self.reason
        return data


def _decide_level(n, weigh, precision, witness=None):
    """Certify weight <= 2^-n, escalating; None when still undecided at the ceiling."""
    bound = Fraction(1, 2 ** n)
    state = {}

    def decide(bits):
        weight = weigh(bits)
        state["weight"] = weight
        return weight.le(bound)

    try:
        passed = escalate(decide, precision, what=f"level {n} weight")
    except UndecidedError as e:
        logger.warning(str(e))
        passed = None
    return LevelVerdict(n, passed, state["weight"], bound, witness(passed) if witness else None)


# ============================================================================
# THE FOUR NOTIONS
# ============================================================================

def check_ml(W, rho, precision=None):
    """Level n passes iff the full sum over W_n is at most 2^-n."""
    verdicts = []
    for n in range(1, len(W) + 1):
        strings = W.level(n)
        verdicts.append(_decide_level(n, lambda bits: interval_sum(rho.evaluate(s, bits) for s in strings), precision))
    return TestVerdict("ml", tuple(verdicts))


def check_solovay(W, rho, precision=None):
    """Nested levels with nonempty differences and total level-1 weight at most 1."""
    sets = [set(level) for level in W.levels]
    weight = interval_sum(rho.evaluate(s, precision) for s in W.level(1)) if sets else Interval.exact(0)
    level_one = LevelVerdict(1, None, weight, Fraction(1))
    for n in range(len(sets) - 1):
        if not sets[n + 1] <= sets[n]:
            return TestVerdict("solovay", (level_one,), reason=f"nestedness fails between levels {n + 1} and {n + 2}")
        if not sets[n] - sets[n + 1]:
            return TestVerdict("solovay", (level_one,), reason=f"empty difference between levels {n + 1} and {n + 2}")

    def decide(bits):
        return interval_sum(rho.evaluate(s, bits) for s in W.level(1)).le(1)

    passed = escalate(decide, precision, what="level-1 weight") if sets else True
    verdict = LevelVerdict(1, passed, weight, Fraction(1))
    return TestVerdict("solovay", (verdict,), reason=None if passed else "level-1 weight exceeds 1")


def _trie(strings):
    """Every prefix of the given strings, grouped by length."""
    nodes = {""}
    for s in strings:
        nodes.update(s[:k] for k in range(len(s) + 1))
    return nodes


def max_prefix_free_weight(strings, rho, precision=None):
    """Largest total rho over prefix-free subsets, with a maximizing subset.

    best(sigma) = max(rho(sigma) if sigma listed, best(sigma0) + best(sigma1)); ties keep sigma.
    """
    members = set(strings)
    nodes = _trie(strings)
    best, choice = {}, {}
    for sigma in sorted(nodes, key=len, reverse=True):
        below = interval_sum(best[sigma + b] for b in "01" if sigma + b in nodes)
        if sigma in members:
            own = rho.evaluate(sigma, precision)
            verdict = own.ge(below)
            if verdict is None:
                best[sigma], choice[sigma] = interval_max(own, below), True
            else:
                best[sigma], choice[sigma] = (own, True) if verdict else (below, False)
        else:
            best[sigma], choice[sigma] = below, False
    witness = []
    stack = [""]
    while stack:
        sigma = stack.pop()
        if sigma in members and choice[sigma]:
            witness.append(sigma)
            continue
        stack.extend(sigma + b for b in "10" if sigma + b in nodes)
    return best[""], tuple(witness)


def check_strong(W, rho, precision=None):
    """Level n passes iff every prefix-free subset of W_n weighs at most 2^-n."""
    verdicts = []
    for n in range(1, len(W) + 1):
        strings = W.level(n)
        found = {}

        def weigh(bits, strings=strings):
            weight, witness = max_prefix_free_weight(strings, rho, bits)
            found["witness"] = witness
            return weight

        verdicts.append(_decide_level(n, weigh, precision, witness=lambda passed: found["witness"]))
    return TestVerdict("strong", tuple(verdicts))


def _cheaper(own, below):
    """Prefer the node when it is certified no heavier, or has the lower upper end when undecided."""
    verdict = own.le(below)
    return verdict or (verdict is None and own.hi <= below.hi)


def min_cover_weight(strings, rho, N, precision=None):
    """Cheapest set of strings of length <= N whose cylinders cover every listed cylinder, with the cover."""
    members = set(strings)
    nodes = _trie(strings)
    full_memo = {}

    def full(sigma):
        """Cheapest cover of the whole cylinder sigma: (weight, cover)."""
        own = rho.evaluate(sigma, precision)
        if len(sigma) == N or rho.is_probability:
            # Additive premeasures gain nothing from splitting
            return own, (sigma,)
        key = len(sigma) if rho.length_invariant else sigma
        if key not in full_memo:
            w0, c0 = full(sigma + "0")
            w1, c1 = full(sigma + "1")
            below = w0 + w1
            take_node = _cheaper(own, below)
            full_memo[key] = (own if take_node else below, None if take_node else (c0, c1))
        weight, split = full_memo[key]
        if split is None:
            return weight, (sigma,)
        return weight, full(sigma + "0")[1] + full(sigma + "1")[1]

    def cover(sigma):
        if sigma in members:
            return full(sigma)
        parts = [cover(sigma + b) for b in "01" if sigma + b in nodes]
        below = interval_sum(w for w, _ in parts)
        cut = tuple(s for _, c in parts for s in c)
        if not parts:
            return below, ()
        own = rho.evaluate(sigma, precision)
        if _cheaper(own, below):
            return own, (sigma,)
        return below, cut

    if not members:
        return Interval.exact(0), ()
    return cover("")


def check_vehement(W, rho, N, precision=None):
    """Level n passes iff some cover of open(W_n) by strings of length <= N weighs at most 2^-n."""
    longest = max((len(s) for level in W.levels for s in level), default=0)
    if longest > N:
        raise DomainError(f"test contains a string of length {longest} beyond the horizon {N}")
    verdicts = []
    for n in range(1, len(W) + 1):
        strings = W.level(n)
        found = {}

        def weigh(bits, strings=strings):
            weight, cut = min_cover_weight(strings, rho, N, bits)
            found["cover"] = cut
            return weight

        verdicts.append(_decide_level(n, weigh, precision, witness=lambda passed: found["cover"]))
    return TestVerdict("vehement", tuple(verdicts), horizon=N)


# ============================================================================
# PREFIX-FREE GENERATORS
# ============================================================================

def _complete(sigma, below):
    """Lexicographically least strings that, with `below`, partition the cylinder sigma."""
    if sigma in below:
        return []
    if not any(is_prefix(sigma, u) for u in below):
        return [sigma]
    return _complete(sigma + "0", below) + _complete(sigma + "1", below)


def prefix_free_generators(listed):
    """Prefix-free U with open(U) = open(listed), built in enumeration order.

    A string with an ancestor in U is skipped; one with no relative in U is
    added; one with descendants in U is replaced by the strings completing
    those descendants to its whole cylinder.
    """
    U = []
    for w in listed:
        check_bits(w)
        if any(is_prefix(u, w) for u in U):
            continue
        below = {u for u in U if is_prefix(w, u)}
        if not below:
            U.append(w)
        else:
            U.extend(_complete(w, below))
    return tuple(U)


def covers_cylinder(U, sigma):
    """True iff the cylinders of U cover the cylinder sigma."""
    if any(is_prefix(u, sigma) for u in U):
        return True
    if not any(is_prefix(sigma, u) for u in U):
        return False
    return covers_cylinder(U, sigma + "0") and covers_cylinder(U, sigma + "1")


def same_open_set(A, B):
    return all(covers_cylinder(B, a) for a in A) and all(covers_cylinder(A, b) for b in B)


def prefix_levels(strings):
    """Partition by the number of proper prefixes inside the same set: W^(0), W^(1), ..."""
    members = set(strings)
    parts = {}
    for s in strings:
        k = sum(1 for j in range(len(s)) if s[:j] in members)
        parts.setdefault(k, []).append(s)
    return [tuple(parts.get(k, ())) for k in range(max(parts) + 1)] if parts else []


# ============================================================================
# CONVERSIONS
# ============================================================================

@dataclass(frozen=True)
class ConversionResult:
    test: TestObject
    shift: int
    factor: Interval
    certificates: tuple = field(default=())
    verdict: Optional[TestVerdict] = None

    def to_json(self):
        data = {"test": self.test.to_json(), "shift": self.shift, "factor": self.factor.to_json()}
        if self.certificates:
            data["certificates"] = [dict(c) for c in self.certificates]
        if self.verdict is not None:
            data["verdict"] = self.verdict.to_json()
        return data


def conversion_shift(s, t, precision=None):
    """k = ceil(log2(1 / (1 - 2^-(t-s)))) and the enclosed factor."""
    if t <= s:
        raise DomainError("the conversion factor 1/(1-2^-(t-s)) diverges for t <= s")

    def attempt(bits):
        factor = 1 / (1 - pow2(s - t, bits))
        k = ceil_log2(factor)
        return None if k is None else (k, factor)

    return escalate(attempt, precision, what="conversion shift")


def convert_strong_to_ml(W, s, t, precision=None):
    """V_m = W_(m+k): a strong test for 2^(-s n) becomes an ML test for 2^(-t n)."""
    k, factor = conversion_shift(s, t, precision)
    if len(W) <= k:
        raise DomainError(f"conversion needs more than {k} input levels, got {len(W)}")
    strong = check_strong(W, hausdorff_premeasure(Order.linear(s)), precision)
    used = [v for v in strong.levels if v.level > k]
    bad = next((v.level for v in used if v.passed is not True), None)
    if bad is not None:
        raise DomainError(f"input is not a strong test for 2^(-{format_rational(s)} n) at level {bad}")

    rho_t = hausdorff_premeasure(Order.linear(t))
    certificates = []
    for n in range(k + 1, len(W) + 1):
        parts = prefix_levels(W.level(n))
        # rho_t(W^(j)) <= 2^-(t-s)j rho_s(W^(j)) rests on every member of W^(j) having length >= j
        short = [j for j, part in enumerate(parts) if any(len(x) < j for x in part)]
        if short:
            logger.error(f"prefix levels {short} of W_{n} break the length bound")

        def weigh(bits, parts=parts, n=n):
            total = interval_sum(rho_t.evaluate(x, bits) for part in parts for x in part)
            bound = 1 / (1 - pow2(s - t, bits)) * Fraction(1, 2 ** n)
            verdict = total.le(bound)
            return None if verdict is None else (total, bound, verdict)

        try:
            total, bound, ok = escalate(weigh, precision, what=f"conversion bound at level {n}")
        except UndecidedError as e:
            logger.warning(str(e))
            total = interval_sum(rho_t.evaluate(x, precision) for part in parts for x in part)
            bound, ok = factor * Fraction(1, 2 ** n), None
        certificates.append({
            "level": n,
            "parts": len(parts),
            "sum": total.to_json(),
            "bound": bound.to_json(),
            "lengthBound": not short,
            "ok": None if ok is None else ok and not short,
        })
    V = TestObject(W.levels[k:])
    verdict = check_ml(V, rho_t, precision)
    if not verdict.passed:
        logger.error(f"converted test fails ML correctness at levels {verdict.failing_levels()}")
    return ConversionResult(V, k, factor, tuple(certificates), verdict)


def vehement_to_ml_probability(W, m, N, precision=None):
    """For a probability measure, prefix-free generators of a vehement test form an ML test."""
    if isinstance(m, Premeasure) and not m.is_probability:
        raise DomainError("prefix-free additivity requires a measure")
    measure = as_measure(m)
    ok, site = validate_probability(measure)
    if not ok:
        raise DomainError(f"prefix-free additivity requires a measure: not additive at {site!r}")
    rho = probability_premeasure(measure)
    vehement = check_vehement(W, rho, N, precision)
    if not vehement.passed:
        raise DomainError(f"input is not vehement-correct at levels {vehement.failing_levels()}")
    levels = tuple(prefix_free_generators(level) for level in W.levels)
    for n, (before, after) in enumerate(zip(W.levels, levels), start=1):
        if not same_open_set(before, after):
            raise DomainError(f"generators change the open set of level {n}")
    U = TestObject(levels)
    verdict = check_ml(U, rho, precision)
    if not verdict.passed:
        logger.error(f"prefix-free generators fail ML correctness at levels {verdict.failing_levels()}")
    return ConversionResult(U, 0, Interval.exact(1), verdict=verdict)
