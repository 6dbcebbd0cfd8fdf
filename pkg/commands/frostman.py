"""frostman-build, maxflow, preimage, complexity-tree and massdist."""

import logging

from frostman_utils import (
    build_measure_along_tree,
    complexity_tree,
    machine_preimage_semimeasure,
    mass_distribution_bound,
    maxflow_measure,
)
from inputs_utils import load_machine, load_measure, load_semimeasure, load_tree, parse_strings
from numeric_utils import format_rational

from commands.common import add_depth, add_order, order_from_args, rational, require

logger = logging.getLogger("measureit.commands.frostman")


def register(subparsers, parent):
    p = subparsers.add_parser("frostman-build", parents=[parent],
                              help="h-bounded measure dominating a semimeasure on a tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--semimeasure", default="zero", help='"zero", "machine:<machine>" or JSON {"values": ...}')
    add_order(p)
    p.add_argument("--gamma", type=rational, default=1)
    add_depth(p)
    p.set_defaults(handler=run_frostman_build, sweepable=("s", "gamma"))

    p = subparsers.add_parser("maxflow", parents=[parent], help="unit flow under capacities gamma 2^-h(n)")
    p.add_argument("--tree", required=True)
    add_order(p)
    p.add_argument("--gamma", type=rational, default=1)
    add_depth(p)
    p.set_defaults(handler=run_maxflow, sweepable=("s", "gamma"))

    p = subparsers.add_parser("preimage", parents=[parent], help="minimal machine inputs producing a prefix")
    p.add_argument("--machine", required=True, help='"identity[:D]", "doubling[:D]", "empty" or JSON')
    p.add_argument("--string", required=True, help='output prefix ("e" for the empty string)')
    p.set_defaults(handler=run_preimage, sweepable=())

    p = subparsers.add_parser("complexity-tree", parents=[parent],
                              help="strings whose prefixes all have small preimage mass")
    p.add_argument("--machine", required=True)
    add_order(p)
    p.add_argument("--c", type=rational, default=1)
    add_depth(p)
    p.set_defaults(handler=run_complexity_tree, sweepable=("s", "c"))

    p = subparsers.add_parser("massdist", parents=[parent], help="mass distribution lower bound 1/c")
    p.add_argument("--measure", required=True)
    p.add_argument("--tree", required=True)
    p.add_argument("--s", type=rational, default=None)
    p.add_argument("--c", type=rational, default=1)
    add_depth(p)
    p.set_defaults(handler=run_massdist, sweepable=("s", "c"))


def run_frostman_build(args):
    T = load_tree(args.tree)
    eta = load_semimeasure(args.semimeasure, args.depth)
    result = build_measure_along_tree(T, eta, order_from_args(args), args.gamma, args.depth, args.precision)
    data = result.to_json()
    data["semimeasure"] = eta.name
    data["ok"] = result.ok
    return data


def run_maxflow(args):
    T = load_tree(args.tree)
    result = maxflow_measure(T, order_from_args(args), args.gamma, args.depth, precision=args.precision)
    data = result.to_json()
    data["gamma"] = format_rational(args.gamma)
    return data


def run_preimage(args):
    M = load_machine(args.machine)
    sigma = parse_strings(args.string)[0]
    return {
        "string": sigma,
        "preimage": list(M.preimage(sigma)),
        "mass": format_rational(machine_preimage_semimeasure(M, sigma)),
    }


def run_complexity_tree(args):
    M = load_machine(args.machine, args.depth)
    T = complexity_tree(M, order_from_args(args), args.c, args.depth, args.precision)
    return {"tree": T.to_json(), "count": len(T.nodes), "c": format_rational(args.c)}


def run_massdist(args):
    m = load_measure(args.measure)
    T = load_tree(args.tree)
    s = require(args, "s")
    return mass_distribution_bound(m, T, s, args.c, args.depth, args.precision).to_json()
