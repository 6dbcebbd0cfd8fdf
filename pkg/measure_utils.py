"""Cylinder measures, split measures along trees, d_meas and dyadic approximants.

Every measure view exposes the same surface: `mass(sigma)`, `level_items(n)`,
`square_mass(n)`, `sibling_products(n)`, `max_mass(n)`, plus `depth` and
`extension` describing how mass continues below the stored table.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional

from core_utils import (
    BITS,
    Premeasure,
    TreeModel,
    check_bits,
    full_tree,
    level_graph,
    live_classes,
    strings_of_length,
    tree_expand,
)
from numeric_utils import (
    DomainError,
    Interval,
    UndecidedError,
    ceil_log2,
    escalate,
    format_rational,
    parse_rational,
    pow2,
    to_fraction,
)

logger = logging.getLogger("measureit.measure_utils")

EXTENSIONS = (None, "uniform", "point")
HALF = Fraction(1, 2)


# ============================================================================
# CYLINDER MEASURES
# ============================================================================

@dataclass(frozen=True)
class CylinderMeasure:
    """Sparse table of cylinder masses to `depth`; missing strings carry mass 0.

    Below depth the mass of each depth-level cylinder is halved forever
    ("uniform"), concentrated on the leftmost point sigma 000... ("point"),
    or undefined (None).
    """
    depth: int
    masses: Mapping[str, Fraction] = field(compare=False)
    extension: Optional[str] = None
    name: Optional[str] = None
    _levels: list = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("measure depth must be nonnegative")
        if self.extension not in EXTENSIONS:
            raise ValueError(f"unknown extension rule {self.extension!r}")
        masses = {}
        for sigma, value in self.masses.items():
            check_bits(sigma)
            if len(sigma) > self.depth:
                raise ValueError(f"mass given for {sigma!r} beyond depth {self.depth}")
            q = to_fraction(value)
            if q < 0:
                raise ValueError(f"negative mass at {sigma!r}")
            if q:
                masses[sigma] = q
        levels = [[] for _ in range(self.depth + 1)]
        for sigma in sorted(masses):
            levels[len(sigma)].append(sigma)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "_levels", levels)

    def mass(self, sigma):
        if len(sigma) <= self.depth:
            return self.masses.get(sigma, Fraction(0))
        if self.extension is None:
            raise DomainError(f"measure is only defined to depth {self.depth}, asked for {sigma!r}")
        base = self.masses.get(sigma[:self.depth], Fraction(0))
        if self.extension == "uniform":
            return base / 2 ** (len(sigma) - self.depth)
        return base if "1" not in sigma[self.depth:] else Fraction(0)

    def _check_defined(self, n):
        if n > self.depth and self.extension is None:
            raise DomainError(f"measure is only defined to depth {self.depth}, asked for level {n}")

    def level_items(self, n):
        """(sigma, mass) for the positive-mass strings of length n, in lexicographic order."""
        self._check_defined(n)
        if n <= self.depth:
            for sigma in self._levels[n]:
                yield sigma, self.masses[sigma]
            return
        extra = n - self.depth
        for sigma in self._levels[self.depth]:
            m = self.masses[sigma]
            if self.extension == "point":
                yield sigma + "0" * extra, m
            else:
                share = m / 2 ** extra
                for suffix in strings_of_length(extra):
                    yield sigma + suffix, share

    def square_mass(self, n):
        self._check_defined(n)
        if n <= self.depth:
            return sum((self.masses[s] ** 2 for s in self._levels[n]), Fraction(0))
        base = self.square_mass(self.depth)
        return base / 2 ** (n - self.depth) if self.extension == "uniform" else base

    def sibling_products(self, n):
        """Sum over |sigma| = n of m(sigma 0) * m(sigma 1)."""
        if n < self.depth:
            return sum((self.mass(s + "0") * self.mass(s + "1") for s in self._levels[n]), Fraction(0))
        self._check_defined(n + 1)
        return self.square_mass(n) / 4 if self.extension == "uniform" else Fraction(0)

    def max_mass(self, n):
        self._check_defined(n)
        if n <= self.depth:
            return max((self.masses[s] for s in self._levels[n]), default=Fraction(0))
        top = self.max_mass(self.depth)
        return top / 2 ** (n - self.depth) if self.extension == "uniform" else top

    def to_json(self):
        data = {
            "depth": self.depth,
            "mass": {s: format_rational(m) for s, m in sorted(self.masses.items(), key=lambda kv: (len(kv[0]), kv[0]))},
        }
        if self.extension is not None:
            data["extension"] = self.extension
        return data

    @classmethod
    def from_json(cls, data):
        masses = {str(s): parse_rational(v) for s, v in data["mass"].items()}
        return cls(int(data["depth"]), masses, extension=data.get("extension"))


def table_from_level(level_masses, depth, extension="uniform", name=None):
    """Build the full additive table from depth-level masses by summing up to the root."""
    masses = {}
    for sigma, m in level_masses.items():
        if not m:
            continue
        for k in range(depth + 1):
            prefix = sigma[:k]
            masses[prefix] = masses.get(prefix, Fraction(0)) + m
    return CylinderMeasure(depth, masses, extension=extension, name=name)


def lebesgue_measure():
    return CylinderMeasure(0, {"": Fraction(1)}, extension="uniform", name="lebesgue")


def dirac_zero():
    """Point mass on 000..."""
    return CylinderMeasure(0, {"": Fraction(1)}, extension="point", name="dirac0")


def dirac_one(depth):
    """Point mass following 1^depth (then 000... below the table)."""
    return CylinderMeasure(depth, {"1" * k: Fraction(1) for k in range(depth + 1)}, extension="point", name="dirac1")


# ============================================================================
# SPLIT MEASURES
# ============================================================================

@dataclass(frozen=True)
class SplitMeasure:
    """Probability measure given by split ratios along a tree.

    With `depth` None the ratios are keyed by automaton state and apply at every
    depth. Otherwise they are keyed by (n, state) for n < depth and mass is
    halved uniformly below depth.
    """
    tree: TreeModel
    ratios: Mapping[Any, tuple] = field(compare=False)
    depth: Optional[int] = None
    name: Optional[str] = None
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.tree.root() is None:
            raise DomainError("split measure needs a nonempty tree")
        ratios = {}
        for key, pair in self.ratios.items():
            r0, r1 = (to_fraction(r) for r in pair)
            if r0 < 0 or r1 < 0 or r0 + r1 != 1:
                raise ValueError(f"split ratios at {key!r} must be nonnegative and sum to 1")
            state = key if self.depth is None else key[1]
            for bit, r in zip(BITS, (r0, r1)):
                if r and self.tree.step(state, bit) is None:
                    raise ValueError(f"split at {key!r} sends mass off the tree through {bit}")
            ratios[key] = (r0, r1)
        object.__setattr__(self, "ratios", ratios)

    @property
    def extension(self):
        return None if self.depth is None else "uniform"

    def ratio(self, n, state):
        key = state if self.depth is None else (n, state)
        try:
            return self.ratios[key]
        except KeyError:
            raise DomainError(f"split measure has no ratio for state {state!r} at depth {n}") from None

    def mass(self, sigma):
        m = Fraction(1)
        state = self.tree.root()
        for n, bit in enumerate(sigma):
            if self.depth is not None and n >= self.depth:
                return m / 2 ** (len(sigma) - n)
            m *= self.ratio(n, state)[int(bit)]
            if not m:
                return m
            state = self.tree.step(state, bit)
        return m

    def level_items(self, n):
        top = n if self.depth is None else min(n, self.depth)
        frontier = [("", self.tree.root(), Fraction(1))]
        for k in range(top):
            nxt = []
            for sigma, state, m in frontier:
                r = self.ratio(k, state)
                for bit, child in self.tree.children(state):
                    share = m * r[int(bit)]
                    if share:
                        nxt.append((sigma + bit, child, share))
            frontier = nxt
        extra = n - top
        for sigma, _, m in frontier:
            if not extra:
                yield sigma, m
                continue
            share = m / 2 ** extra
            for suffix in strings_of_length(extra):
                yield sigma + suffix, share

    def _class_level(self, n):
        """state -> (sum of squared masses, largest mass) over the strings of length n in that state."""
        levels = self._cache.setdefault("levels", [{self.tree.root(): (Fraction(1), Fraction(1))}])
        while len(levels) <= n:
            k = len(levels) - 1
            nxt = {}
            for state, (squares, top) in levels[k].items():
                r = self.ratio(k, state)
                for bit, child in self.tree.children(state):
                    share = r[int(bit)]
                    if not share:
                        continue
                    s, t = nxt.get(child, (Fraction(0), Fraction(0)))
                    nxt[child] = (s + squares * share ** 2, max(t, top * share))
            levels.append(nxt)
        return levels[n]

    def square_mass(self, n):
        if self.depth is not None and n > self.depth:
            return self.square_mass(self.depth) / 2 ** (n - self.depth)
        return sum((s for s, _ in self._class_level(n).values()), Fraction(0))

    def sibling_products(self, n):
        if self.depth is not None and n >= self.depth:
            return self.square_mass(n) / 4
        total = Fraction(0)
        for state, (squares, _) in self._class_level(n).items():
            r0, r1 = self.ratio(n, state)
            total += squares * r0 * r1
        return total

    def max_mass(self, n):
        if self.depth is not None and n > self.depth:
            return self.max_mass(self.depth) / 2 ** (n - self.depth)
        return max((t for _, t in self._class_level(n).values()), default=Fraction(0))

    def to_cylinder(self, N=None):
        """Tabulate to depth N (defaults to the split depth)."""
        N = self.depth if N is None else N
        if N is None:
            raise DomainError("stationary split measure needs an explicit depth to tabulate")
        return table_from_level(dict(self.level_items(N)), N, extension="uniform", name=self.name)

    def to_json(self):
        if self.depth is None:
            ratios = {str(q): [format_rational(r) for r in pair] for q, pair in self.ratios.items()}
        else:
            ratios = {f"{n}:{q}": [format_rational(r) for r in pair] for (n, q), pair in self.ratios.items()}
        data = {"kind": "split", "tree": self.tree.to_json(), "ratios": ratios}
        if self.depth is not None:
            data["depth"] = self.depth
        return data


def natural_measure(T, N=None):
    """Equal split among the live children of every node.

    Without N the tree must be an unbounded automaton and the ratios are stationary.
    """
    if N is None and T.kind == "automaton" and T.max_depth is None:
        live = set(T.accept)
        changed = True
        while changed:
            keep = {q for q in live if any(c in live for _, c in T.children(q))}
            changed = keep != live
            live = keep
        if T.root() not in live:
            raise DomainError("tree has no infinite path")
        ratios = {}
        for q in live:
            kids = [b for b, c in T.children(q) if c in live]
            ratios[q] = tuple(Fraction(1, len(kids)) if b in kids else Fraction(0) for b in BITS)
        return SplitMeasure(T, ratios, name=T.name and f"{T.name}-natural")
    N = T.depth_bound if N is None else N
    levels = level_graph(T, N)
    live = live_classes(levels)
    if not levels or not live[0]:
        raise DomainError(f"tree has no node at depth {N}")
    ratios = {}
    for n in range(N):
        for cls, kids in levels[n].items():
            if cls not in live[n]:
                continue
            alive = [b for b, c in kids if c in live[n + 1]]
            ratios[(n, cls)] = tuple(Fraction(1, len(alive)) if b in alive else Fraction(0) for b in BITS)
    return SplitMeasure(T, ratios, depth=N, name=T.name and f"{T.name}-natural")


def bernoulli_measure(p):
    """Independent bits with P(0) = p."""
    p = to_fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("bernoulli parameter must lie in [0, 1]")
    return SplitMeasure(full_tree(), {"F": (p, 1 - p)}, name=f"bernoulli:{format_rational(p)}")


# ============================================================================
# DYADIC MEASURES
# ============================================================================

@dataclass(frozen=True)
class DyadicMeasure:
    """Finitely many point masses at sigma 000..., positive rational weights summing to 1."""
    support: tuple
    weights: tuple

    def __post_init__(self):
        support = tuple(check_bits(s) for s in self.support)
        weights = tuple(to_fraction(w) for w in self.weights)
        if len(support) != len(weights):
            raise ValueError("support and weights differ in length")
        if len(set(support)) != len(support):
            raise ValueError("support strings must be distinct")
        if any(w <= 0 for w in weights):
            raise ValueError("dyadic weights must be positive")
        if sum(weights) != 1:
            raise ValueError(f"dyadic weights sum to {format_rational(sum(weights))}, not 1")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    def to_cylinder(self):
        depth = max((len(s) for s in self.support), default=0)
        points = {}
        for sigma, w in zip(self.support, self.weights):
            point = sigma + "0" * (depth - len(sigma))
            points[point] = points.get(point, Fraction(0)) + w
        return table_from_level(points, depth, extension="point")

    def to_json(self):
        return {"support": list(self.support), "weights": [format_rational(w) for w in self.weights]}

    @classmethod
    def from_json(cls, data):
        return cls(tuple(data["support"]), tuple(parse_rational(w) for w in data["weights"]))


def dyadic_to_cylinder(nu):
    return nu.to_cylinder()


def as_measure(view):
    """Normalize dyadic measures and probability premeasures to a measure view."""
    if isinstance(view, DyadicMeasure):
        return view.to_cylinder()
    if isinstance(view, Premeasure):
        if not view.is_probability:
            raise DomainError("a measure is required, got a non-probability premeasure")
        return view.measure
    return view


# ============================================================================
# VALIDATION AND DIAGNOSTICS
# ============================================================================

def validate_probability(m):
    """(True, None) if m(root) = 1 and m is additive to its depth, else (False, first violating node)."""
    m = as_measure(m)
    if m.mass("") != 1:
        return False, ""
    if isinstance(m, SplitMeasure):
        # Ratios are checked to sum to 1 on construction
        return True, None
    for n in range(m.depth):
        candidates = {s for s, _ in m.level_items(n)} | {s[:-1] for s, _ in m.level_items(n + 1)}
        for sigma in sorted(candidates):
            if m.mass(sigma) != m.mass(sigma + "0") + m.mass(sigma + "1"):
                return False, sigma
    return True, None


def max_cylinder_mass(m, N):
    return Interval.exact(as_measure(m).max_mass(N))


def measure_support(m, N):
    """Prefix-closed set of positive-mass strings to depth N."""
    m = as_measure(m)
    nodes = set()
    for n in range(N + 1):
        nodes.update(s for s, _ in m.level_items(n))
    return TreeModel.explicit(nodes)


def check_h_bounded(m, h, gamma, N, precision=None):
    """(True, None) if m(sigma) <= gamma * 2^-h(|sigma|) for all |sigma| <= N, else (False, sigma)."""
    m = as_measure(m)
    gamma = to_fraction(gamma)

    def scan(bits):
        for n in range(N + 1):
            top = m.max_mass(n)
            verdict = Interval.exact(top).le(gamma * pow2(-h(n), bits))
            if verdict is None:
                return None
            if not verdict:
                site = next(s for s, v in m.level_items(n) if v == top)
                return False, site
        return True, None

    return escalate(scan, precision, what="h-boundedness check")


# ============================================================================
# RESTRICTION
# ============================================================================

def _restriction_depth(m, T):
    depth = m.depth or 0
    if T.depth_bound is not None:
        return max(depth, T.depth_bound)
    full_at = T.full_depth(depth)
    if full_at is None:
        raise DomainError("tree is not full below any level; give the restriction depth N")
    return full_at


def restrict_normalize(m, T, N=None):
    """Condition m on the depth-N level of T.

    Without N, unbounded automaton trees are restricted at the first level (not
    above m's depth) below which T is full, so the extension of the result stays
    on T. An explicit N conditions on the depth-N approximation of T.
    """
    m = as_measure(m)
    if N is None:
        N = _restriction_depth(m, T)
    level = {s: m.mass(s) for s in tree_expand(T, N) if len(s) == N}
    total = sum(level.values(), Fraction(0))
    if not total:
        raise DomainError("measure gives no mass to closed set approximation")
    logger.debug(f"restricting to {len(level)} depth-{N} nodes carrying mass {format_rational(total)}")
    return table_from_level({s: v / total for s, v in level.items()}, N, extension=m.extension)


# ============================================================================
# THE METRIC d_meas
# ============================================================================

@dataclass(frozen=True)
class MeasureDistance:
    """d_meas split at depth K: `partial` sums levels 1..K, `tail` encloses the rest."""
    partial: Fraction
    tail: Interval
    depth: int

    @property
    def value(self):
        return self.tail + self.partial

    @property
    def exact(self):
        return self.tail.is_exact

    def to_json(self):
        return {
            "value": self.value.to_json(),
            "partial": format_rational(self.partial),
            "tailBound": format_rational(self.tail.hi),
            "exact": self.exact,
            "depth": self.depth,
        }


def _regime(m, sigma, mass):
    """Closed-form behaviour of m inside cylinder sigma, or None while m is still tabulated there."""
    if not mass:
        return "zero"
    if m.depth is not None and len(sigma) >= m.depth and m.extension is not None:
        return m.extension
    return None


def _block(a, b, d, k1, k2):
    """Sum over k in [k1, k2] of 2^-(d+k) * (a + b*2^-k) / 2; k2 None means infinity."""
    if k2 is not None and k2 < k1:
        return Fraction(0)
    halves = Fraction(2) ** (1 - k1) - (Fraction(2) ** -k2 if k2 is not None else 0)
    quarters = (Fraction(4) ** (1 - k1) - (Fraction(4) ** -k2 if k2 is not None else 0)) / 3
    return (a * halves + b * quarters) / 2 ** (d + 1)


def _closed_pair(ra, alpha, rb, beta, d, K):
    """Exact (levels d+1..K, levels > K) contributions of a cylinder where both measures are closed."""
    if ra == "point" and rb == "uniform":
        ra, alpha, rb, beta = rb, beta, ra, alpha
    pieces = []
    if ra == "uniform" and rb == "point":
        # Level d+k: |alpha 2^-k - beta| + alpha (1 - 2^-k)
        k0 = max(1, ceil_log2(alpha / beta))
        pieces.append((alpha - beta, Fraction(0), 1, k0 - 1))
        pieces.append((alpha + beta, -2 * alpha, k0, None))
    else:
        pieces.append((abs(alpha - beta), Fraction(0), 1, None))
    inside = Fraction(0)
    beyond = Fraction(0)
    split = K - d
    for a, b, k1, k2 in pieces:
        inside += _block(a, b, d, k1, split if k2 is None else min(k2, split))
        beyond += _block(a, b, d, max(k1, split + 1), k2)
    return inside, beyond


def dmeas_distance(a, b, K):
    """d_meas(a, b) = sum over n >= 1 of 2^-n * (1/2) sum_{|sigma| = n} |a(sigma) - b(sigma)|.

    Cylinders where both measures follow their extension rule (or vanish) are
    summed in closed form; elsewhere the walk descends to depth K and bounds the
    remaining levels by 2^-K times half the mass there.
    """
    if K < 0:
        raise ValueError("truncation depth must be nonnegative")
    a, b = as_measure(a), as_measure(b)
    partial = Fraction(0)
    exact_tail = Fraction(0)
    open_tail = Fraction(0)
    stack = [("", Fraction(1), Fraction(1))]
    while stack:
        sigma, ma, mb = stack.pop()
        d = len(sigma)
        ra, rb = _regime(a, sigma, ma), _regime(b, sigma, mb)
        if ra is not None and rb is not None:
            if ra == "zero":
                ra, ma = rb, Fraction(0)
            if rb == "zero":
                rb, mb = ra, Fraction(0)
            inside, beyond = _closed_pair(ra, ma, rb, mb, d, K)
            partial += inside
            exact_tail += beyond
            continue
        if d >= K:
            open_tail += Fraction(2) ** -K * (ma + mb) / 2
            continue
        for bit in BITS:
            child = sigma + bit
            ca, cb = a.mass(child), b.mass(child)
            partial += abs(ca - cb) / 2 ** (d + 2)
            if ca or cb:
                stack.append((child, ca, cb))
    tail = Interval(exact_tail, exact_tail + open_tail)
    return MeasureDistance(partial, tail, K)


def dmeas_compare(a, b, q, K):
    """Decide d_meas < q and d_meas <= q; None where the depth-K enclosure straddles q."""
    value = dmeas_distance(a, b, K).value
    return {"lt": value.lt(q), "le": value.le(q)}


# ============================================================================
# APPROXIMANTS AND REPRESENTATIONS
# ============================================================================

def cauchy_approximate(m, n):
    """Dyadic measure placing each depth-n cylinder mass on its leftmost point."""
    if isinstance(m, Premeasure) and not m.is_probability:
        support, weights = [], []
        for sigma in strings_of_length(n):
            value = m.evaluate(sigma)
            if not value.is_exact:
                raise UndecidedError(f"cylinder mass of {sigma!r} is irrational")
            if value.lo:
                support.append(sigma)
                weights.append(value.lo)
        return DyadicMeasure(tuple(support), tuple(weights))
    m = as_measure(m)
    items = list(m.level_items(n))
    return DyadicMeasure(tuple(s for s, _ in items), tuple(v for _, v in items))


def rational_rep_query(rho, sigma, q1, q2, precision=None):
    """True iff q1 < rho(sigma) < q2, refining the enclosure until decided."""
    q1, q2 = to_fraction(q1), to_fraction(q2)
    if not q1 < q2:
        raise ValueError("rational representation query needs q1 < q2")
    check_bits(sigma)

    def decide(bits):
        value = rho.evaluate(sigma, bits)
        above, below = value.gt(q1), value.lt(q2)
        if above is False or below is False:
            return False
        if above is None or below is None:
            return None
        return True

    return escalate(decide, precision, what=f"rational representation of {sigma!r}")


@dataclass(frozen=True)
class RationalRepresentation:
    """Membership oracle for {(sigma, q1, q2) : q1 < rho(sigma) < q2}."""
    premeasure: Premeasure
    precision: Optional[int] = None

    def __call__(self, sigma, q1, q2):
        return rational_rep_query(self.premeasure, sigma, q1, q2, self.precision)
