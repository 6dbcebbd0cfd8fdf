"""energy, potential, capacity, capdim and minimize-energy."""

import logging

from capacity_utils import capacity_lower, capdim_estimate, energy, minimize_energy, potential
from inputs_utils import load_measure, load_tree, parse_bound
from report_utils import write_iterates_csv

from commands.common import add_depth, natural, rational, require

logger = logging.getLogger("measureit.commands.capacity")


def register(subparsers, parent):
    p = subparsers.add_parser("energy", parents=[parent], help="t-energy partial sum with tail bound")
    p.add_argument("--measure", required=True)
    p.add_argument("--t", type=rational, default=None)
    add_depth(p)
    p.add_argument("--bound", default=None, help="declared (s, gamma) bound as s,gamma for the tail estimate")
    p.set_defaults(handler=run_energy, sweepable=("t",))

    p = subparsers.add_parser("potential", parents=[parent], help="t-potential at a point prefix")
    p.add_argument("--measure", required=True)
    p.add_argument("--x", required=True, help="prefix of the point, length >= depth")
    p.add_argument("--t", type=rational, default=None)
    add_depth(p)
    p.add_argument("--bound", default=None)
    p.set_defaults(handler=run_potential, sweepable=("t",))

    p = subparsers.add_parser("capacity", parents=[parent], help="certified lower bound on the s-capacity")
    p.add_argument("--tree", required=True)
    p.add_argument("--s", type=rational, default=None)
    add_depth(p)
    p.set_defaults(handler=run_capacity, sweepable=("s",))

    p = subparsers.add_parser("capdim", parents=[parent], help="capacitary dimension interval by flow feasibility")
    p.add_argument("--tree", required=True)
    add_depth(p)
    p.add_argument("--tol", type=rational, default=None)
    p.set_defaults(handler=run_capdim, sweepable=("tol",))

    p = subparsers.add_parser("minimize-energy", parents=[parent], help="conditional-gradient s-energy minimization")
    p.add_argument("--tree", required=True)
    p.add_argument("--s", type=rational, default=None)
    add_depth(p)
    p.add_argument("--iters", type=natural, default=None)
    p.add_argument("--tol", type=rational, default=None)
    p.add_argument("--iterates", default=None, help="write the iterate log as CSV here")
    p.set_defaults(handler=run_minimize_energy, sweepable=("s",))


def _bound(args):
    return None if args.bound is None else parse_bound(args.bound)


def run_energy(args):
    m = load_measure(args.measure)
    return energy(m, require(args, "t"), args.depth, bound=_bound(args), precision=args.precision).to_json()


def run_potential(args):
    m = load_measure(args.measure)
    report = potential(m, args.x, require(args, "t"), args.depth, bound=_bound(args), precision=args.precision)
    data = report.to_json()
    data["x"] = args.x
    return data


def run_capacity(args):
    T = load_tree(args.tree)
    return capacity_lower(T, require(args, "s"), args.depth, args.precision).to_json()


def run_capdim(args):
    T = load_tree(args.tree)
    return capdim_estimate(T, args.depth, args.tol, args.precision).to_json()


def run_minimize_energy(args):
    T = load_tree(args.tree)
    result = minimize_energy(T, require(args, "s"), args.depth, args.iters, args.tol, args.precision)
    if args.iterates:
        write_iterates_csv(result.history, args.iterates)
    return result.to_json()
