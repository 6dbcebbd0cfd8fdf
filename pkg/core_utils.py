"""Binary strings, trees, orders and premeasures on Cantor space."""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Optional

from numeric_utils import (
    DomainError,
    Interval,
    escalate,
    format_rational,
    interval_max,
    interval_min,
    parse_rational,
    pow2,
    to_fraction,
)

logger = logging.getLogger("measureit.core_utils")

BITS = "01"


class EmptyTreeError(DomainError):
    """The tree has no root (dead automaton start state or empty node list)."""


# ============================================================================
# BIT STRINGS
# ============================================================================

def check_bits(sigma):
    """Validate a finite binary string and return it."""
    if not isinstance(sigma, str) or any(c not in BITS for c in sigma):
        raise ValueError(f"not a binary string: {sigma!r}")
    return sigma


def is_prefix(sigma, tau):
    """True iff sigma is a (not necessarily proper) prefix of tau."""
    return tau.startswith(sigma)


def common_prefix_length(sigma, tau):
    n = 0
    for a, b in zip(sigma, tau):
        if a != b:
            break
        n += 1
    return n


def strings_of_length(n):
    return ("".join(p) for p in itertools.product(BITS, repeat=n))


def flip(bit):
    return "1" if bit == "0" else "0"


def is_prefix_free(strings):
    ordered = sorted(set(strings))
    # In lexicographic order a prefix sorts immediately before some extension of it
    return not any(is_prefix(a, b) for a, b in zip(ordered, ordered[1:]))


@dataclass(frozen=True)
class Distance:
    value: Interval
    unresolved: bool = False

    def to_json(self):
        return {"value": self.value.to_json(), "unresolved": self.unresolved}


def cantor_distance(sigma, tau):
    """2^-N for the first disagreement N; 0 flagged unresolved when one string prefixes the other."""
    check_bits(sigma)
    check_bits(tau)
    k = common_prefix_length(sigma, tau)
    if k < min(len(sigma), len(tau)):
        return Distance(pow2(-k))
    return Distance(Interval.exact(0), unresolved=True)


# ============================================================================
# ORDERS
# ============================================================================

ORDER_KINDS = ("linear", "table", "staircase")


@dataclass(frozen=True)
class Order:
    """Nondecreasing order h: N -> Q>=0.

    linear:    h(n) = slope * n
    table:     h(n) = values[n], continued by `slope` per step past the table (if given)
    staircase: h(n) = values[n mod p] + slope * (n div p) with p = len(values)
    """
    kind: str
    slope: Optional[Fraction] = None
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ORDER_KINDS:
            raise ValueError(f"unknown order kind {self.kind!r}")
        values = tuple(to_fraction(v) for v in self.values)
        slope = None if self.slope is None else to_fraction(self.slope)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "slope", slope)
        if slope is not None and slope < 0:
            raise ValueError("order slope must be nonnegative")
        if any(v < 0 for v in values):
            raise ValueError("order values must be nonnegative")
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError("order values must be nondecreasing")
        if self.kind == "linear" and slope is None:
            raise ValueError("linear order needs a slope")
        if self.kind in ("table", "staircase") and not values:
            raise ValueError(f"{self.kind} order needs values")
        if self.kind == "staircase":
            if slope is None:
                raise ValueError("staircase order needs a step")
            if values[-1] > values[0] + slope:
                raise ValueError("staircase step too small for a nondecreasing continuation")

    @classmethod
    def linear(cls, s):
        return cls("linear", slope=s)

    @classmethod
    def table(cls, values, tail=None):
        return cls("table", slope=tail, values=tuple(values))

    @classmethod
    def staircase(cls, values, step):
        return cls("staircase", slope=step, values=tuple(values))

    def __call__(self, n):
        if n < 0:
            raise ValueError("orders are defined on n >= 0")
        if self.kind == "linear":
            return self.slope * n
        if self.kind == "staircase":
            period = len(self.values)
            return self.values[n % period] + self.slope * (n // period)
        if n < len(self.values):
            return self.values[n]
        if self.slope is None:
            raise DomainError(f"table order has {len(self.values)} values and no tail; h({n}) undefined")
        return self.values[-1] + self.slope * (n - len(self.values) + 1)

    @property
    def is_unbounded(self):
        return self.slope is not None and self.slope > 0

    def to_json(self):
        if self.kind == "linear":
            return {"kind": "linear", "s": format_rational(self.slope)}
        data = {"kind": self.kind, "values": [format_rational(v) for v in self.values]}
        if self.kind == "staircase":
            data["step"] = format_rational(self.slope)
        elif self.slope is not None:
            data["tailSlope"] = format_rational(self.slope)
        return data

    @classmethod
    def from_json(cls, data):
        kind = data.get("kind")
        if kind == "linear":
            return cls.linear(parse_rational(data["s"]))
        if kind == "table":
            tail = data.get("tailSlope")
            return cls.table([parse_rational(v) for v in data["values"]],
                             None if tail is None else parse_rational(tail))
        if kind == "staircase":
            return cls.staircase([parse_rational(v) for v in data["values"]], parse_rational(data["step"]))
        raise ValueError(f"unknown order kind {kind!r}")

    def __str__(self):
        if self.kind == "linear":
            return f"h(n)={format_rational(self.slope)}*n"
        return f"{self.kind}({', '.join(format_rational(v) for v in self.values)}; {self.slope})"


def order_eval(h, n):
    """Exact h(n)."""
    return Interval.exact(h(n))


def check_convex(h, N):
    """True iff h(n+1) <= h(n) + 1 for all n < N."""
    if N < 1:
        raise ValueError("check_convex needs N >= 1")
    return all(h(n + 1) <= h(n) + 1 for n in range(N))


# ============================================================================
# PREMEASURES
# ============================================================================

PREMEASURE_KINDS = ("hausdorff", "probability", "table")


@dataclass(frozen=True)
class Premeasure:
    """A nonnegative set function on strings.

    hausdorff:   scale * 2^(-h(|sigma|)), length-invariant
    probability: the cylinder masses of a measure view (anything with .mass(sigma))
    table:       explicit values on a finite domain
    """
    kind: str
    order: Optional[Order] = None
    measure: Any = None
    table: Optional[Mapping[str, Fraction]] = field(default=None, compare=False)
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        if self.kind not in PREMEASURE_KINDS:
            raise ValueError(f"unknown premeasure kind {self.kind!r}")
        if self.kind == "hausdorff" and self.order is None:
            raise ValueError("hausdorff premeasure needs an order")
        if self.kind == "probability" and self.measure is None:
            raise ValueError("probability premeasure needs a measure")
        if self.kind == "table":
            if self.table is None:
                raise ValueError("table premeasure needs a table")
            table = {check_bits(k): to_fraction(v) for k, v in self.table.items()}
            if any(v < 0 for v in table.values()):
                raise ValueError("premeasure values must be nonnegative")
            object.__setattr__(self, "table", table)
        object.__setattr__(self, "scale", to_fraction(self.scale))

    @property
    def length_invariant(self):
        return self.kind == "hausdorff"

    @property
    def is_probability(self):
        return self.kind == "probability"

    def evaluate(self, sigma, precision=None):
        if self.kind == "hausdorff":
            return self.scale * pow2(-self.order(len(sigma)), precision)
        if self.kind == "probability":
            return Interval.exact(self.measure.mass(sigma))
        try:
            return Interval.exact(self.table[sigma])
        except KeyError:
            raise DomainError(f"premeasure table has no value for {sigma!r}") from None

    def describe(self):
        if self.kind == "hausdorff":
            prefix = "" if self.scale == 1 else f"{format_rational(self.scale)}*"
            return f"{prefix}2^-h with {self.order}"
        if self.kind == "probability":
            return f"probability({type(self.measure).__name__})"
        return f"table({len(self.table)} strings)"


def hausdorff_premeasure(order, scale=1):
    return Premeasure("hausdorff", order=order, scale=to_fraction(scale))


def lebesgue_premeasure():
    return hausdorff_premeasure(Order.linear(1))


def probability_premeasure(measure):
    return Premeasure("probability", measure=measure)


def table_premeasure(values):
    return Premeasure("table", table=dict(values))


def premeasure_eval(rho, sigma, precision=None):
    check_bits(sigma)
    return rho.evaluate(sigma, precision)


@dataclass(frozen=True)
class GeometricalReport:
    ok: bool
    p: Optional[Interval] = None
    q: Optional[Interval] = None
    node: Optional[str] = None
    clause: Optional[str] = None

    def to_json(self):
        if self.ok:
            return {"ok": True, "p": self.p.to_json(), "q": self.q.to_json()}
        return {"ok": False, "node": self.node, "clause": self.clause}


def check_geometrical(rho, N, precision=None):
    """Tightest (p, q) witnessing (G1)-(G3) on all nodes to depth N, or the first violation."""

    def nodes():
        for n in range(N + 1):
            if rho.length_invariant:
                yield "0" * n
            else:
                yield from strings_of_length(n)

    def scan(bits):
        p_max = None
        q_min = None
        for sigma in nodes():
            r = rho.evaluate(sigma, bits)
            c0 = rho.evaluate(sigma + "0", bits)
            c1 = rho.evaluate(sigma + "1", bits)
            if r.hi == 0:
                if c0.hi > 0 or c1.hi > 0:
                    return GeometricalReport(False, node=sigma, clause="G2")
                continue
            if r.lo == 0:
                return None
            for child in (c0, c1):
                ratio = child / r
                below = ratio.lt(1)
                if below is None:
                    return None
                if not below:
                    return GeometricalReport(False, node=sigma, clause="G2")
                p_max = ratio if p_max is None else interval_max(p_max, ratio)
            split = (c0 + c1) / r
            enough = split.ge(1)
            if enough is None:
                return None
            if not enough:
                return GeometricalReport(False, node=sigma, clause="G3")
            q_min = split if q_min is None else interval_min(q_min, split)
        half = Interval.exact(Fraction(1, 2))
        p = half if p_max is None else interval_max(half, p_max)
        q = Interval.exact(1) if q_min is None else q_min
        return GeometricalReport(True, p=p, q=q)

    return escalate(scan, precision, what="geometrical premeasure check")


# ============================================================================
# TREES
# ============================================================================

@dataclass(frozen=True)
class TreeModel:
    """A prefix-closed set of strings, explicit or generated by an automaton.

    Automaton nodes are the strings whose run from `start` stays inside `accept`.
    Algorithms walk trees through states: for explicit trees the state is the node.
    """
    kind: str
    nodes: frozenset = frozenset()
    transitions: Optional[Mapping[Any, Mapping[str, Any]]] = field(default=None, compare=False)
    start: Any = None
    accept: frozenset = frozenset()
    max_depth: Optional[int] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.kind == "explicit":
            nodes = frozenset(check_bits(s) for s in self.nodes)
            missing = sorted(s for s in nodes if s and s[:-1] not in nodes)
            if missing:
                raise ValueError(f"node list is not prefix-closed: parent of {missing[0]!r} missing")
            object.__setattr__(self, "nodes", nodes)
        elif self.kind == "automaton":
            if self.transitions is None:
                raise ValueError("automaton tree needs transitions")
            for state, edges in self.transitions.items():
                bad = [b for b in edges if b not in BITS]
                if bad:
                    raise ValueError(f"automaton state {state!r} has non-binary edge {bad[0]!r}")
            object.__setattr__(self, "accept", frozenset(self.accept))
        else:
            raise ValueError(f"unknown tree kind {self.kind!r}")

    @classmethod
    def explicit(cls, nodes, max_depth=None, name=None):
        return cls("explicit", nodes=frozenset(nodes), max_depth=max_depth, name=name)

    @classmethod
    def automaton(cls, transitions, start, accept, max_depth=None, name=None):
        return cls("automaton", transitions=transitions, start=start,
                   accept=frozenset(accept), max_depth=max_depth, name=name)

    def root(self):
        if self.kind == "explicit":
            return "" if "" in self.nodes else None
        return self.start if self.start in self.accept else None

    def step(self, state, bit):
        if self.kind == "explicit":
            child = state + bit
            return child if child in self.nodes else None
        nxt = self.transitions.get(state, {}).get(bit)
        return nxt if nxt in self.accept else None

    def children(self, state):
        kids = []
        for bit in BITS:
            nxt = self.step(state, bit)
            if nxt is not None:
                kids.append((bit, nxt))
        return kids

    def state_of(self, sigma):
        state = self.root()
        for bit in sigma:
            if state is None:
                return None
            state = self.step(state, bit)
        return state

    def contains(self, sigma):
        return self.state_of(sigma) is not None

    @property
    def depth_bound(self):
        if self.kind == "explicit":
            return max((len(s) for s in self.nodes), default=0)
        return self.max_depth

    def full_depth(self, start=0):
        """Least n >= start at which every depth-n node roots a full binary subtree.

        None for explicit or depth-bounded trees, and for automata whose level
        state sets cycle without ever becoming full.
        """
        if self.kind != "automaton" or self.max_depth is not None or self.root() is None:
            return None
        full = set(self.accept)
        changed = True
        while changed:
            keep = {q for q in full if all(self.step(q, b) in full for b in BITS)}
            changed = keep != full
            full = keep
        level = frozenset([self.root()])
        seen = set()
        n = 0
        while True:
            if n >= start:
                if level <= full:
                    return n
                if level in seen:
                    return None
                seen.add(level)
            level = frozenset(c for q in level for _, c in self.children(q))
            n += 1

    def to_json(self):
        if self.kind == "explicit":
            return {"kind": "explicit", "nodes": sorted(self.nodes, key=lambda s: (len(s), s))}
        data = {
            "kind": "automaton",
            "transitions": {str(q): {b: str(t) for b, t in edges.items()} for q, edges in self.transitions.items()},
            "start": str(self.start),
            "accept": sorted(str(q) for q in self.accept),
        }
        if self.max_depth is not None:
            data["maxDepth"] = self.max_depth
        return data

    @classmethod
    def from_json(cls, data):
        kind = data.get("kind")
        if kind == "explicit":
            return cls.explicit(data["nodes"], max_depth=data.get("maxDepth"))
        if kind == "automaton":
            transitions = {str(q): {str(b): str(t) for b, t in edges.items()}
                           for q, edges in data["transitions"].items()}
            if "start" in data:
                start = str(data["start"])
            elif transitions:
                start = next(iter(transitions))
            else:
                raise ValueError("automaton tree needs a start state or at least one transition")
            return cls.automaton(transitions, start, [str(q) for q in data["accept"]],
                                 max_depth=data.get("maxDepth"))
        raise ValueError(f"unknown tree kind {kind!r}")


def full_tree():
    return TreeModel.automaton({"F": {"0": "F", "1": "F"}}, "F", ["F"], name="full")


def every_other_tree():
    """Free choice at even depths, forced 0 at odd depths."""
    return TreeModel.automaton({"E": {"0": "O", "1": "O"}, "O": {"0": "E"}}, "E", ["E", "O"], name="every-other")


def single_path_tree():
    return TreeModel.automaton({"P": {"0": "P"}}, "P", ["P"], name="single-path")


def tree_expand(T, N):
    """Explicit node set of T to depth N."""
    if N < 0:
        raise ValueError("depth must be nonnegative")
    root = T.root()
    if root is None:
        raise EmptyTreeError("tree has no root" if T.kind == "explicit" else "automaton start state is dead")
    found = {""}
    frontier = [("", root)]
    for _ in range(N):
        nxt = []
        for sigma, state in frontier:
            for bit, child in T.children(state):
                found.add(sigma + bit)
                nxt.append((sigma + bit, child))
        frontier = nxt
    return frozenset(found)


def level_graph(T, N, per_node=False):
    """Reachable (depth, class) structure of T to depth N.

    Classes are tree states, or (string, state) pairs when `per_node` is set.
    levels[n] maps each class at depth n to its children as (bit, class) pairs;
    classes at depth N have no children. Empty trees give [].
    """
    root = T.root()
    if root is None:
        return []
    frontier = [("", root) if per_node else root]
    levels = []
    for n in range(N + 1):
        level = {}
        nxt = {}
        for cls in frontier:
            state = cls[1] if per_node else cls
            kids = []
            if n < N:
                for bit, child_state in T.children(state):
                    child = (cls[0] + bit, child_state) if per_node else child_state
                    kids.append((bit, child))
                    nxt[child] = None
            level[cls] = kids
        levels.append(level)
        frontier = list(nxt)
    return levels


def live_classes(levels):
    """Per-level sets of classes with at least one descendant at the deepest level."""
    if not levels:
        return []
    live = [set() for _ in levels]
    live[-1] = set(levels[-1])
    for n in range(len(levels) - 2, -1, -1):
        live[n] = {c for c, kids in levels[n].items() if any(k in live[n + 1] for _, k in kids)}
    return live
