"""Potentials, energies, capacities and capacitary dimension on tree-coded sets.

Energies use the sibling-split identity for the Cantor metric. Two points whose
longest common prefix is sigma are at distance 2^-|sigma|, so

    I_t(mu) = sum over sigma of 2^(t|sigma|) * 2 * mu(sigma0) * mu(sigma1).

Truncating at depth N leaves the pairs inside depth-N cylinders, which are
summed in closed form under the uniform extension or bounded for
(s, gamma)-bounded measures.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from config_manager import OPTIMIZER_ITERATIONS, OPTIMIZER_TOLERANCE, SEARCH_TOLERANCE
from core_utils import Order, common_prefix_length, flip, level_graph, live_classes
from frostman_utils import flow_value, maxflow_measure
from hausdorff_utils import DimensionEstimate, bisect_dimension
from measure_utils import as_measure, natural_measure, table_from_level
from numeric_utils import DomainError, Interval, format_rational, interval_sum, pow2, to_fraction

logger = logging.getLogger("measureit.capacity_utils")


@dataclass(frozen=True)
class EnergyReport:
    """Partial sum to `depth` plus an enclosure of the remainder.

    `tail` is None when the remainder is unbounded (divergent) or unknown.
    """
    value: Interval
    tail: Optional[Interval]
    t: Fraction
    depth: int
    divergent: bool = False

    @property
    def total(self):
        return None if self.tail is None else self.value + self.tail

    @property
    def finite(self):
        return self.tail is not None and not self.divergent

    def to_json(self):
        data = {
            "value": self.value.to_json(),
            "tailBound": "divergent" if self.divergent else (None if self.tail is None else self.tail.to_json()),
            "divergent": self.divergent,
            "t": format_rational(self.t),
            "depth": self.depth,
        }
        if self.total is not None:
            data["total"] = self.total.to_json()
        return data


def _check_t(t):
    t = to_fraction(t)
    if t < 0:
        raise DomainError("t must be nonnegative")
    return t


def _bounded_tail(t, bound, N, precision):
    """gamma 2^((t-s)N) / (1 - 2^(t-s)) for an (s, gamma)-bounded measure and t < s."""
    if bound is None:
        return None
    s, gamma = (to_fraction(v) for v in bound)
    if t >= s:
        return None
    return gamma * pow2((t - s) * N, precision) / (1 - pow2(t - s, precision))


def _uniform_tail(m, t, N, terms, precision):
    """Exact remainder of a uniformly extended measure beyond depth N (t < 1)."""
    M = max(N, m.depth)
    extra = interval_sum(terms(n) for n in range(N, M))
    closed = m.square_mass(M) * pow2(t * M - 1, precision) / (1 - pow2(t - 1, precision))
    return extra + closed


def energy(m, t, N, bound=None, precision=None):
    """t-energy partial sum over |sigma| < N with a tail enclosure.

    `bound` = (s, gamma) declares m(sigma) <= gamma 2^(-s|sigma|) and enables the
    geometric tail for t < s when no closed form applies.
    """
    t = _check_t(t)
    m = as_measure(m)

    def term(n):
        return pow2(t * n, precision) * (2 * m.sibling_products(n))

    value = interval_sum(term(n) for n in range(N))
    atomic = m.extension == "point" or m.max_mass(N) == 1
    if t == 0:
        # Every pair, diagonal included, has weight 1
        return EnergyReport(value, Interval.exact(m.square_mass(N)), t, N)
    if atomic:
        logger.info(f"measure has an atom at depth {N}: t-energy diverges for t={format_rational(t)}")
        return EnergyReport(value, None, t, N, divergent=True)
    if m.extension == "uniform" and m.depth is not None:
        if t >= 1:
            return EnergyReport(value, None, t, N, divergent=True)
        return EnergyReport(value, _uniform_tail(m, t, N, term, precision), t, N)
    return EnergyReport(value, _bounded_tail(t, bound, N, precision), t, N)


def potential(m, x, t, N, bound=None, precision=None):
    """t-potential at the point with prefix x: sum over n < N of 2^(tn) m(x|n + flipped x(n))."""
    t = _check_t(t)
    if len(x) < N:
        raise ValueError("potential needs a prefix of length at least N")
    m = as_measure(m)

    def term(n):
        return pow2(t * n, precision) * m.mass(x[:n] + flip(x[n]))

    value = interval_sum(term(n) for n in range(N))
    inside = m.mass(x[:N])
    if not inside:
        return EnergyReport(value, Interval.exact(0), t, N)
    if t == 0:
        return EnergyReport(value, Interval.exact(inside), t, N)
    if m.extension == "uniform" and m.depth is not None and t < 1:
        M = max(N, m.depth)
        if len(x) >= M:
            extra = interval_sum(term(n) for n in range(N, M))
            closed = m.mass(x[:M]) * pow2(t * M - 1, precision) / (1 - pow2(t - 1, precision))
            return EnergyReport(value, extra + closed, t, N)
    return EnergyReport(value, _bounded_tail(t, bound, N, precision), t, N)


# ============================================================================
# CAPACITY
# ============================================================================

@dataclass(frozen=True)
class CapacityResult:
    lower: Fraction
    energy: Optional[EnergyReport]
    candidate: str
    gamma: Fraction = Fraction(1)

    def to_json(self):
        return {
            "lower": format_rational(self.lower),
            "approx": float(self.lower),
            "candidate": self.candidate,
            "gamma": format_rational(self.gamma),
            "energy": None if self.energy is None else self.energy.to_json(),
        }


def capacity_lower(T, s, N, precision=None):
    """1 / I_s(mu) for the max-flow mass distribution mu on T; 0 when its energy is not finite."""
    s = to_fraction(s)
    order = Order.linear(s)
    flow = maxflow_measure(T, order, 1, N, precision=precision, certificate_limit=0)
    gamma = Fraction(1)
    candidate = "maxflow"
    if flow.measure is None:
        if not flow.cut_value.lo:
            return CapacityResult(Fraction(0), None, "none")
        # Rescaled capacities admit the normalized flow
        gamma = 1 / flow.cut_value.lo
        flow = maxflow_measure(T, order, gamma, N, precision=precision, certificate_limit=0)
        candidate = "normalized-flow"
        if flow.measure is None:
            return CapacityResult(Fraction(0), None, "none")
    report = energy(flow.measure, s, N, bound=(s, gamma), precision=precision)
    if not report.finite:
        return CapacityResult(Fraction(0), report, candidate, gamma)
    lower = 1 / report.total.hi
    logger.info(f"capacity over depth {N} at s={format_rational(s)}: >= {float(lower):.6f} ({candidate})")
    return CapacityResult(lower, report, candidate, gamma)


def capdim_estimate(T, N, tol=None, precision=None):
    """Bisection on s for the largest s admitting a unit flow under capacities 2^(-s n)."""
    tol = SEARCH_TOLERANCE if tol is None else to_fraction(tol)
    if N < 1:
        raise ValueError("capdim_estimate needs N >= 1")
    if not 0 < tol < 1:
        raise ValueError("tolerance must lie in (0, 1)")

    def feasible(s):
        _, cut_value = flow_value(T, Order.linear(s), 1, N, precision)
        ok = bool(cut_value.ge(1))
        logger.debug(f"capdim trial s={format_rational(s)}: {'feasible' if ok else 'infeasible'}")
        return ok

    lo, hi, trials = bisect_dimension(feasible, tol)
    return DimensionEstimate(lo, hi, N, tol, tuple(trials))


# ============================================================================
# ENERGY MINIMIZATION
# ============================================================================

@dataclass
class Iterate:
    iteration: int
    energy: float
    gap: float
    step: float


@dataclass(frozen=True)
class MinimizeResult:
    measure: object
    report: EnergyReport
    history: tuple = field(compare=False)
    converged: bool = True

    def to_json(self):
        return {
            "measure": self.measure.to_json(),
            "energy": self.report.to_json(),
            "iterations": len(self.history),
            "converged": self.converged,
        }


class EnergyFrankWolfe:
    """Conditional gradient for x^T C x over the simplex of depth-N leaf masses.

    C[i, j] = 2^(s lcp(i, j)) off the diagonal and the closed-form
    within-cylinder energy 2^(sN-1) / (1 - 2^(s-1)) on it.
    """

    def __init__(self, leaves, s, N, tol, iteration_limit):
        s_float = float(s)
        size = len(leaves)
        C = np.empty((size, size))
        for i, a in enumerate(leaves):
            for j in range(i, size):
                C[i, j] = C[j, i] = 2.0 ** (s_float * common_prefix_length(a, leaves[j]))
        np.fill_diagonal(C, 2.0 ** (s_float * N - 1) / (1 - 2.0 ** (s_float - 1)))
        self.C = C
        self.tol = float(tol)
        self.iteration_limit = iteration_limit

    def objective(self, x):
        return float(x.dot(self.C).dot(x))

    def gradient(self, x):
        return 2.0 * self.C.dot(x)

    def run(self, x):
        history = []
        f = self.objective(x)
        for k in range(self.iteration_limit):
            g = self.gradient(x)
            vertex = int(np.argmin(g))
            d = -x.copy()
            d[vertex] += 1.0
            gap = float(-g.dot(d))
            if gap <= 0:
                history.append(Iterate(k, f, gap, 0.0))
                return x, history, True
            curvature = float(d.dot(self.C).dot(d))
            line = gap / (2 * curvature) if curvature > 0 else 1.0
            step = min(2.0 / (k + 2), line, 1.0)
            x_next = x + step * d
            f_next = self.objective(x_next)
            history.append(Iterate(k, f_next, gap, step))
            improvement = (f - f_next) / f if f else 0.0
            x, f = x_next, f_next
            if improvement < self.tol:
                return x, history, True
        return x, history, False


def minimize_energy(T, s, N, iters=None, tol=None, precision=None):
    """Minimize the s-energy over probability distributions on T's depth-N nodes (uniform below)."""
    s = to_fraction(s)
    if not 0 <= s < 1:
        raise DomainError("energy minimization needs 0 <= s < 1 (uniformly extended energies diverge otherwise)")
    iters = OPTIMIZER_ITERATIONS if iters is None else iters
    tol = OPTIMIZER_TOLERANCE if tol is None else to_fraction(tol)
    levels = level_graph(T, N, per_node=True)
    live = live_classes(levels)
    leaves = sorted(sigma for sigma, _ in live[N]) if levels else []
    if not leaves:
        raise DomainError(f"infeasible tree: no node at depth {N} carries a unit flow")

    start = natural_measure(T, N)
    x0 = np.array([float(start.mass(sigma)) for sigma in leaves])
    solver = EnergyFrankWolfe(leaves, s, N, tol, iters)
    x, history, converged = solver.run(x0)
    if not converged:
        logger.warning(f"energy minimization stopped after {iters} iterations without meeting tolerance {float(tol):g}")
    logger.info(f"energy minimization: {len(history)} iterations, final energy {history[-1].energy if history else solver.objective(x):.9f}")

    start_measure = start.to_cylinder()
    start_report = energy(start_measure, s, N, precision=precision)
    weights = [Fraction(float(v)).limit_denominator(2 ** 48) if v > 0 else Fraction(0) for v in x]
    total = sum(weights, Fraction(0))
    measure = table_from_level({sigma: w / total for sigma, w in zip(leaves, weights)}, N,
                               extension="uniform", name="energy-minimizer")
    report = energy(measure, s, N, precision=precision)
    if not report.finite or (start_report.finite and report.total.hi > start_report.total.hi):
        # rounded iterate never reported above the start
        measure, report = start_measure, start_report
    return MinimizeResult(measure, report, tuple(history), converged)
