"""h-bounded measures on trees: the inductive construction, max-flow, semimeasures and machines."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Callable, Mapping, Optional

import networkx as nx

from config_manager import CERTIFICATE_LIMIT
from core_utils import (
    BITS,
    Order,
    TreeModel,
    check_bits,
    check_convex,
    hausdorff_premeasure,
    is_prefix,
    strings_of_length,
    tree_expand,
)
from hausdorff_utils import CutCertificate, CutSolver, method1_value
from measure_utils import (
    CylinderMeasure,
    SplitMeasure,
    as_measure,
    check_h_bounded,
    validate_probability,
)
from numeric_utils import (
    DomainError,
    Interval,
    escalate,
    format_rational,
    interval_min,
    parse_rational,
    pow2,
    to_fraction,
)

logger = logging.getLogger("measureit.frostman_utils")


# ============================================================================
# SEMIMEASURES
# ============================================================================

@dataclass(frozen=True)
class Semimeasure:
    """Exact rational function on strings, expected to satisfy eta(s) >= eta(s0) + eta(s1)."""
    evaluate: Callable[[str], Fraction] = field(compare=False)
    name: str = "semimeasure"
    table: Optional[Mapping[str, Fraction]] = field(default=None, compare=False)

    def __call__(self, sigma):
        return self.evaluate(sigma)

    def to_json(self):
        if self.table is None:
            return {"name": self.name}
        return {"name": self.name, "values": {s: format_rational(v) for s, v in sorted(self.table.items())}}


def zero_semimeasure():
    return Semimeasure(lambda sigma: Fraction(0), name="zero")


def table_semimeasure(values, name="table"):
    """Semimeasure from a finite table; unlisted strings get 0."""
    table = {check_bits(s): to_fraction(v) for s, v in values.items()}
    return Semimeasure(lambda sigma: table.get(sigma, Fraction(0)), name=name, table=table)


def length_semimeasure(per_level, name="by-length"):
    """eta(sigma) = per_level(|sigma|)."""
    return Semimeasure(lambda sigma: to_fraction(per_level(len(sigma))), name=name)


def semimeasure_from_json(data):
    return table_semimeasure({str(s): parse_rational(v) for s, v in data["values"].items()}, name=data.get("name", "table"))


def semimeasure_validate(eta, N):
    """(True, None) if eta(root) <= 1 and eta(s) >= eta(s0) + eta(s1) for |s| < N, else (False, s)."""
    if eta("") > 1:
        return False, ""
    if eta.table is not None:
        candidates = set(eta.table) | {s[:-1] for s in eta.table if s}
        nodes = sorted((s for s in candidates if len(s) < N), key=lambda s: (len(s), s))
    else:
        nodes = (s for n in range(N) for s in strings_of_length(n))
    for sigma in nodes:
        value = eta(sigma)
        if value < 0:
            return False, sigma
        if value < eta(sigma + "0") + eta(sigma + "1"):
            return False, sigma
    return True, None


# ============================================================================
# MONOTONE MACHINES
# ============================================================================

@dataclass(frozen=True)
class MonotoneMachine:
    """Finite (input, output) table; longer inputs may only extend the outputs of their prefixes."""
    pairs: tuple
    name: Optional[str] = None

    def __post_init__(self):
        pairs = tuple((check_bits(tau), check_bits(sigma)) for tau, sigma in self.pairs)
        for i, (tau, sigma) in enumerate(pairs):
            for tau2, sigma2 in pairs[i + 1:]:
                if is_prefix(tau, tau2):
                    short, long_ = (tau, sigma), (tau2, sigma2)
                elif is_prefix(tau2, tau):
                    short, long_ = (tau2, sigma2), (tau, sigma)
                else:
                    continue
                if short[0] == long_[0]:
                    if not (is_prefix(short[1], long_[1]) or is_prefix(long_[1], short[1])):
                        raise DomainError(f"inconsistent machine table: {tau!r} has incomparable outputs")
                elif not is_prefix(short[1], long_[1]):
                    raise DomainError(
                        f"inconsistent machine table: output of {long_[0]!r} does not extend output of {short[0]!r}"
                    )
        object.__setattr__(self, "pairs", pairs)

    def preimage(self, sigma):
        """Pre(sigma): minimal inputs whose output extends sigma, in table order."""
        hits = [tau for tau, out in self.pairs if is_prefix(sigma, out)]
        found = set(hits)
        minimal = []
        for tau in hits:
            if tau in minimal:
                continue
            if not any(tau[:k] in found for k in range(len(tau))):
                minimal.append(tau)
        return tuple(minimal)

    def to_json(self):
        return {"pairs": [list(p) for p in self.pairs]}

    @classmethod
    def from_json(cls, data):
        return cls(tuple((str(tau), str(sigma)) for tau, sigma in data["pairs"]))


def identity_machine(depth):
    return MonotoneMachine(tuple((s, s) for n in range(depth + 1) for s in strings_of_length(n)), name="identity")


def doubling_machine(depth):
    """b1 b2 ... -> b1 b1 b2 b2 ..."""
    pairs = tuple((s, "".join(b + b for b in s)) for n in range(depth + 1) for s in strings_of_length(n))
    return MonotoneMachine(pairs, name="doubling")


def empty_machine():
    return MonotoneMachine((), name="empty")


def machine_preimage_semimeasure(M, sigma):
    """lambda(Pre(sigma)) = sum of 2^-|tau| over the minimal inputs."""
    check_bits(sigma)
    return sum((Fraction(1, 2 ** len(tau)) for tau in M.preimage(sigma)), Fraction(0))


def machine_semimeasure(M):
    return Semimeasure(lambda sigma: machine_preimage_semimeasure(M, sigma), name=f"preimage:{M.name or 'machine'}")


def complexity_tree(M, h, c, N, precision=None):
    """{sigma : |sigma| <= N and lambda(Pre(sigma|n)) <= c 2^-h(n) for all n <= |sigma|}."""
    c = to_fraction(c)

    def admitted(sigma):
        mass = Interval.exact(machine_preimage_semimeasure(M, sigma))
        return escalate(lambda bits: mass.le(c * pow2(-h(len(sigma)), bits)), precision,
                        what=f"complexity bound at {sigma!r}")

    nodes = set()
    frontier = [""] if admitted("") else []
    while frontier:
        nodes.update(frontier)
        frontier = [s + b for s in frontier if len(s) < N for b in BITS if admitted(s + b)]
    logger.debug(f"complexity tree to depth {N} has {len(nodes)} nodes")
    return TreeModel.explicit(nodes, name=f"complexity:{M.name or 'machine'}")


# ============================================================================
# THE INDUCTIVE CONSTRUCTION
# ============================================================================

@dataclass(frozen=True)
class FrostmanResult:
    measure: object
    gamma: Fraction
    order: Order
    depth: int
    additive: bool = True
    bounded: bool = True
    dominates: bool = True
    clamped: int = 0
    violation: Optional[str] = None

    @property
    def ok(self):
        return self.additive and self.bounded and self.dominates

    def to_json(self):
        return {
            "measure": self.measure.to_json(),
            "gamma": format_rational(self.gamma),
            "order": self.order.to_json(),
            "depth": self.depth,
            "audit": {
                "additive": self.additive,
                "bounded": self.bounded,
                "dominates": self.dominates,
                "clamped": self.clamped,
                "violation": self.violation,
            },
        }


def certified_caps(h, gamma, N, precision=None):
    """Lower endpoints of gamma 2^-h(n), lowered so that cap(n) <= 2 cap(n+1)."""
    gamma = to_fraction(gamma)
    caps = [(gamma * pow2(-h(n), precision)).lo for n in range(N + 1)]
    for n in range(N - 1, -1, -1):
        caps[n] = min(caps[n], 2 * caps[n + 1])
    return caps


def _convexity_witness(h, N):
    return next(n for n in range(N) if h(n + 1) > h(n) + 1)


def build_measure_along_tree(T, eta, h, gamma, N, precision=None):
    """Measure mu with mu <= gamma 2^-h and eta <= mu on T, constructed top-down along T.

    Both children in T: each takes its eta value plus a share of the slack
    proportional to its headroom under the cap. One child in T: it takes
    min(mu(sigma), cap) and the sibling the rest. Mass leaving T is halved
    uniformly from then on.
    """
    gamma = to_fraction(gamma)
    if not check_convex(h, max(N, 1)):
        n = _convexity_witness(h, max(N, 1))
        raise DomainError(f"order is not convex: h({n + 1}) > h({n}) + 1")
    ok, site = semimeasure_validate(eta, N + 1)
    if not ok:
        raise DomainError(f"not a semimeasure: violation at {site!r}")
    caps = certified_caps(h, gamma, N, precision)
    if caps[0] < 1:
        raise DomainError("gamma 2^-h(0) < 1 leaves no room for a probability measure")
    on_tree = tree_expand(T, N)
    for sigma in sorted(on_tree, key=lambda s: (len(s), s)):
        if eta(sigma) > caps[len(sigma)]:
            raise DomainError(f"eta exceeds gamma 2^-h at tree node {sigma!r}")

    masses = {"": Fraction(1)}
    clamped = 0
    frontier = [("", True)]
    for n in range(N):
        cap = caps[n + 1]
        nxt = []
        for sigma, inside in frontier:
            mu = masses[sigma]
            kids = [sigma + b for b in BITS]
            in_tree = [k for k in kids if inside and k in on_tree]
            if len(in_tree) == 2:
                e0, e1 = eta(kids[0]), eta(kids[1])
                slack = mu - e0 - e1
                room0, room1 = cap - e0, cap - e1
                if room0 + room1:
                    shares = (slack * room0 / (room0 + room1), slack * room1 / (room0 + room1))
                else:
                    shares = (slack / 2, slack / 2)
                split = {kids[0]: e0 + shares[0], kids[1]: e1 + shares[1]}
            elif len(in_tree) == 1:
                keep = in_tree[0]
                take = min(mu, cap)
                if mu < cap:
                    clamped += 1
                    logger.debug(f"clamped in-tree child {keep!r}: parent mass {mu} below cap {cap}")
                other = kids[1] if keep == kids[0] else kids[0]
                split = {keep: take, other: mu - take}
            else:
                split = {k: mu / 2 for k in kids}
            for k, v in split.items():
                if v:
                    masses[k] = v
                    nxt.append((k, k in in_tree))
        frontier = nxt

    measure = CylinderMeasure(N, masses, extension="uniform", name="frostman")
    if clamped:
        logger.info(f"one-child clamping applied at {clamped} nodes")

    additive, site = validate_probability(measure)
    violation = None if additive else f"additivity at {site!r}"
    bad_bound = next((s for s, v in masses.items() if v > caps[len(s)]), None)
    if bad_bound is not None and violation is None:
        violation = f"bound at {bad_bound!r}"
    bad_dom = next((s for s in sorted(on_tree) if eta(s) > measure.mass(s)), None)
    if bad_dom is not None and violation is None:
        violation = f"domination at {bad_dom!r}"
    result = FrostmanResult(measure, gamma, h, N, additive, bad_bound is None, bad_dom is None, clamped, violation)
    if not result.ok:
        logger.error(f"construction audit failed: {violation}")
    return result


# ============================================================================
# MAX-FLOW
# ============================================================================

@dataclass(frozen=True)
class FlowResult:
    value: Interval
    cut_value: Interval
    certificate: CutCertificate
    measure: Optional[SplitMeasure] = None
    bounded: Optional[bool] = None
    crosscheck: Optional[Fraction] = None

    @property
    def feasible(self):
        return self.value.is_exact and self.value.lo == 1

    def to_json(self):
        data = {
            "value": self.value.to_json(),
            "cutValue": self.cut_value.to_json(),
            "cut": self.certificate.to_json(),
            "feasible": self.feasible,
        }
        if self.measure is not None:
            data["measure"] = self.measure.to_json()
            data["bounded"] = self.bounded
        if self.crosscheck is not None:
            data["networkxValue"] = format_rational(self.crosscheck)
        return data


def flow_capacities(h, gamma, N):
    """Exact node capacities gamma 2^-h(n), or None if some h(n) is not an integer."""
    gamma = to_fraction(gamma)
    caps = []
    for n in range(N + 1):
        value = pow2(-h(n))
        if not value.is_exact:
            return None
        caps.append(gamma * value.lo)
    return caps


def networkx_flow_value(T, h, gamma, N):
    """Max unit-source flow through T with node capacities, on the node-split network."""
    caps = flow_capacities(h, gamma, N)
    if caps is None:
        raise DomainError("networkx cross-check needs integer-valued h")
    nodes = tree_expand(T, N)
    scale = lcm(*(c.denominator for c in caps))
    g = nx.DiGraph()
    g.add_edge("s", "in:", capacity=scale)
    for sigma in nodes:
        g.add_edge(f"in:{sigma}", f"out:{sigma}", capacity=int(caps[len(sigma)] * scale))
        if len(sigma) == N:
            g.add_edge(f"out:{sigma}", "t")
        for b in BITS:
            if sigma + b in nodes:
                g.add_edge(f"out:{sigma}", f"in:{sigma + b}")
    if "t" not in g:
        return Fraction(0)
    flow_value, _ = nx.maximum_flow(g, "s", "t", flow_func=nx.algorithms.flow.edmonds_karp)
    return Fraction(flow_value, scale)


def flow_value(T, h, gamma, N, precision=None):
    """min(1, gamma * min-cut) with its certificate, escalating until comparison with 1 is decided."""
    rho = hausdorff_premeasure(h, scale=gamma)

    def attempt(bits):
        cut_value, _ = method1_value(T, rho, N, precision=bits, certificate_limit=0)
        return None if cut_value.ge(1) is None else cut_value

    cut_value = escalate(attempt, precision, what="flow value against 1")
    return interval_min(Interval.exact(1), cut_value), cut_value


def maxflow_measure(T, h, gamma, N, precision=None, certificate_limit=None):
    """Flow value min(1, min-cut of gamma 2^-h over T) and, when it is 1, a measure realizing it.

    The unit flow is routed at every node proportionally to the children's
    min-cut values, which keeps each node under its capacity.
    """
    gamma = to_fraction(gamma)
    if T.root() is None:
        raise DomainError("max-flow needs a nonempty tree")
    rho = hausdorff_premeasure(h, scale=gamma)

    def attempt(bits):
        solver = CutSolver(T, rho, N, bits)
        cut_value = solver.solve()
        if cut_value.ge(1) is None:
            return None
        return solver, cut_value, bits

    solver, cut_value, bits = escalate(attempt, precision, what="flow value against 1")
    certificate = solver.certificate(CERTIFICATE_LIMIT if certificate_limit is None else certificate_limit)
    value = interval_min(Interval.exact(1), cut_value)

    crosscheck = None
    if T.kind == "explicit" and flow_capacities(h, gamma, N) is not None:
        crosscheck = networkx_flow_value(T, h, gamma, N)
        if Interval.exact(crosscheck) != value:
            logger.error(f"networkx flow {crosscheck} disagrees with min-cut value {value}")

    if not cut_value.ge(1):
        logger.info(f"max flow {value} < 1: no {format_rational(gamma)}-bounded measure on the tree at depth {N}")
        return FlowResult(value, cut_value, certificate, crosscheck=crosscheck)

    ratios = {}
    for n in range(N):
        for cls, kids in solver.levels[n].items():
            if cls not in solver.live[n]:
                continue
            weights = {b: solver.best[n + 1][k].lo for b, k in kids if k in solver.live[n + 1]}
            total = sum(weights.values(), Fraction(0))
            if total:
                r0 = weights.get("0", Fraction(0)) / total
            else:
                r0 = Fraction(1, 2) if len(weights) == 2 else Fraction(1 if "0" in weights else 0)
            ratios[(n, cls)] = (r0, 1 - r0)
    measure = SplitMeasure(T, ratios, depth=N, name="maxflow")
    bounded, site = check_h_bounded(measure, h, gamma, N, precision=bits)
    if not bounded:
        logger.warning(f"flow measure exceeds its capacity at {site!r} after rationalizing splits")
    return FlowResult(value, cut_value, certificate, measure, bounded, crosscheck)


# ============================================================================
# MASS DISTRIBUTION PRINCIPLE
# ============================================================================

@dataclass(frozen=True)
class MassDistributionResult:
    bound: Fraction
    value: Interval
    holds: bool

    def to_json(self):
        return {"bound": format_rational(self.bound), "method1Value": self.value.to_json(), "holds": self.holds}


def mass_distribution_bound(m, T, s, c, N, precision=None):
    """1/c as a lower bound on the depth-N Method-I value of T, after auditing m <= c 2^(-s|sigma|) on T."""
    m = as_measure(m)
    s, c = to_fraction(s), to_fraction(c)
    if c <= 0:
        raise ValueError("mass distribution constant must be positive")
    for n in range(N + 1):
        for sigma, _ in m.level_items(n):
            if not T.contains(sigma):
                raise DomainError(f"measure charges {sigma!r} outside the tree")
    order = Order.linear(s)
    ok, site = check_h_bounded(m, order, c, N, precision)
    if not ok:
        raise DomainError(f"mass bound c 2^(-s|sigma|) fails at {site!r}")
    bound = 1 / c
    rho = hausdorff_premeasure(order)

    def recompute(bits):
        value, _ = method1_value(T, rho, N, precision=bits, certificate_limit=0)
        verdict = value.ge(bound)
        return None if verdict is None else (value, verdict)

    value, holds = escalate(recompute, precision, what="mass distribution bound")
    if not holds:
        logger.error(f"Method-I value {value} fell below the certified bound {format_rational(bound)}")
    return MassDistributionResult(bound, value, holds)
