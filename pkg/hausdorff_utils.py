"""Method-I values of tree-coded closed sets as min-cuts, and Hausdorff dimension search."""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from config_manager import CERTIFICATE_LIMIT, SEARCH_TOLERANCE
from core_utils import Order, hausdorff_premeasure, is_prefix_free, level_graph, live_classes
from numeric_utils import Interval, escalate, format_rational, interval_min, interval_sum, pow2, to_fraction

logger = logging.getLogger("measureit.hausdorff_utils")

NODE, CHILDREN, DEAD = "node", "children", "dead"


@dataclass(frozen=True)
class CutCertificate:
    """Prefix-free set of tree nodes covering the depth-N level, with its total weight.

    `antichain` is None when the cut is larger than the configured certificate limit.
    """
    antichain: Optional[tuple]
    size: int
    weight: Interval

    @property
    def materialized(self):
        return self.antichain is not None

    def to_json(self):
        data = {"size": self.size, "weight": self.weight.to_json()}
        if self.antichain is not None:
            data["cut"] = list(self.antichain)
        else:
            data["truncated"] = True
        return data


class CutSolver:
    """Bottom-up min-cut over the (depth, class) levels of a tree."""

    def __init__(self, T, rho, N, precision=None):
        self.T = T
        self.rho = rho
        self.N = N
        self.precision = precision
        self.per_node = not rho.length_invariant
        self.levels = level_graph(T, N, per_node=self.per_node)
        self.live = live_classes(self.levels)
        self._level_weight = {}
        self.undecided = 0

    def weight(self, n, cls):
        if self.per_node:
            return self.rho.evaluate(cls[0], self.precision)
        # Length-invariant: one evaluation per level
        if n not in self._level_weight:
            self._level_weight[n] = self.rho.evaluate("0" * n, self.precision)
        return self._level_weight[n]

    def solve(self):
        """Fill best/choice/size tables; returns the root value."""
        N = self.N
        self.best = [dict() for _ in self.levels]
        self.choice = [dict() for _ in self.levels]
        self.size = [dict() for _ in self.levels]
        for n in range(len(self.levels) - 1, -1, -1):
            for cls, kids in self.levels[n].items():
                if cls not in self.live[n]:
                    self.best[n][cls] = Interval.exact(0)
                    self.choice[n][cls] = DEAD
                    self.size[n][cls] = 0
                    continue
                own = self.weight(n, cls)
                if n == N:
                    self._set(n, cls, own, NODE, 1)
                    continue
                below = interval_sum(self.best[n + 1][k] for _, k in kids)
                below_size = sum(self.size[n + 1][k] for _, k in kids)
                verdict = own.le(below)
                if verdict is None:
                    self.undecided += 1
                    # Hull of the two candidates; the node is kept for the certificate
                    self._set(n, cls, interval_min(own, below), NODE, 1)
                elif verdict:
                    self._set(n, cls, own, NODE, 1)
                else:
                    self._set(n, cls, below, CHILDREN, below_size)
        root = next(iter(self.levels[0]))
        return self.best[0][root]

    def _set(self, n, cls, value, choice, size):
        self.best[n][cls] = value
        self.choice[n][cls] = choice
        self.size[n][cls] = size

    def antichain(self):
        root = next(iter(self.levels[0]))
        cut = []
        stack = [(0, "", root)]
        while stack:
            n, sigma, cls = stack.pop()
            choice = self.choice[n][cls]
            if choice == NODE:
                cut.append(sigma)
            elif choice == CHILDREN:
                for bit, kid in reversed(self.levels[n][cls]):
                    stack.append((n + 1, sigma + bit, kid))
        return tuple(cut)

    def certificate(self, limit):
        """Optimal cut after solve(); only its size when larger than limit."""
        root = next(iter(self.levels[0]))
        size = self.size[0][root]
        if size > limit:
            return CutCertificate(None, size, self.best[0][root])
        cut = self.antichain()
        weight = interval_sum(self.rho.evaluate(s, self.precision) for s in cut)
        return CutCertificate(cut, size, weight)


def method1_value(T, rho, N, precision=None, certificate_limit=None):
    """Min over tree-node antichains covering depth N of the summed premeasure, with an optimal cut."""
    if N < 0:
        raise ValueError("depth must be nonnegative")
    limit = CERTIFICATE_LIMIT if certificate_limit is None else certificate_limit
    if T.root() is None:
        return Interval.exact(0), CutCertificate((), 0, Interval.exact(0))
    solver = CutSolver(T, rho, N, precision)
    value = solver.solve()
    if solver.undecided:
        logger.debug(f"{solver.undecided} undecided node/children comparisons at depth {N}")
    return value, solver.certificate(limit)


def check_certificate(T, rho, N, certificate, precision=None):
    """(True, None) if the cut is a prefix-free cover of depth N made of tree nodes, else (False, reason)."""
    if certificate.antichain is None:
        return False, "certificate not materialized"
    cut = certificate.antichain
    if not is_prefix_free(cut):
        return False, "cut is not prefix-free"
    if any(not T.contains(s) or len(s) > N for s in cut):
        return False, "cut leaves the tree"
    levels = level_graph(T, N, per_node=True)
    members = set(cut)
    for sigma, _ in levels[N] if levels else ():
        if not any(sigma[:k] in members for k in range(len(sigma) + 1)):
            return False, f"depth-{N} node {sigma!r} is not covered"
    return True, None


# ============================================================================
# EXHAUSTIVE ORACLE
# ============================================================================

def enumerate_cuts(T, N):
    """Every antichain of tree nodes (depth <= N) that covers the depth-N level."""
    levels = level_graph(T, N, per_node=True)
    if not levels:
        return [()]
    live = live_classes(levels)

    def covers(n, cls):
        if cls not in live[n]:
            return [()]
        own = [(cls[0],)]
        if n == N:
            return own
        options = [covers(n + 1, kid) for _, kid in levels[n][cls]]
        return own + [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*options)]

    return covers(0, next(iter(levels[0])))


def exhaustive_method1_value(T, rho, N, precision=None):
    """Brute-force minimum over enumerate_cuts; exponential, for small trees only."""
    best = None
    for cut in enumerate_cuts(T, N):
        weight = interval_sum(rho.evaluate(s, precision) for s in cut)
        best = weight if best is None else interval_min(best, weight)
    return best


# ============================================================================
# DIMENSION SEARCH
# ============================================================================

@dataclass(frozen=True)
class DimensionEstimate:
    lo: Fraction
    hi: Fraction
    depth: int
    tolerance: Fraction
    trials: tuple = field(default=(), compare=False)

    def contains(self, s):
        return self.lo <= to_fraction(s) <= self.hi

    def overlaps(self, other):
        return self.lo <= other.hi and other.lo <= self.hi

    def to_json(self):
        return {
            "interval": [format_rational(self.lo), format_rational(self.hi)],
            "depth": self.depth,
            "tolerance": format_rational(self.tolerance),
            "trials": [{"s": format_rational(s), "positive": ok} for s, ok in self.trials],
        }


def bisect_dimension(feasible, tol):
    """Largest-feasible bisection on [0, 1]; returns (lo, hi, trials) with hi - lo <= tol."""
    trials = []

    def trial(s):
        ok = feasible(s)
        trials.append((s, ok))
        return ok

    lo, hi = Fraction(0), Fraction(1)
    if trial(hi):
        return hi, hi, trials
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if trial(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi, trials


def hdim_estimate(T, N, tol=None, precision=None):
    """Interval of width <= tol around the s where the depth-N Method-I value collapses.

    s counts as positive when the 2^(-s n) value exceeds 2^(-floor(N tol / 2)).
    The search narrows to tol/2 and reports [s_hi - tol, s_hi], which absorbs the
    threshold bias at finite N.
    """
    tol = SEARCH_TOLERANCE if tol is None else to_fraction(tol)
    if N < 1:
        raise ValueError("hdim_estimate needs N >= 1")
    if not 0 < tol < 1:
        raise ValueError("tolerance must lie in (0, 1)")
    threshold = pow2(-((N * tol) // 2))

    def positive(s):
        rho = hausdorff_premeasure(Order.linear(s))

        def decide(bits):
            value, _ = method1_value(T, rho, N, precision=bits, certificate_limit=0)
            return value.gt(threshold)

        ok = escalate(decide, precision, what=f"Method-I value at s={format_rational(s)}")
        logger.debug(f"hdim trial s={format_rational(s)}: {'positive' if ok else 'collapsed'}")
        return ok

    lo, hi, trials = bisect_dimension(positive, tol / 2)
    if lo == hi == 1:
        return DimensionEstimate(max(Fraction(0), 1 - tol), Fraction(1), N, tol, tuple(trials))
    logger.info(f"hdim over depth {N}: s_hi={format_rational(hi)} after {len(trials)} trials")
    return DimensionEstimate(max(Fraction(0), hi - tol), hi, N, tol, tuple(trials))
