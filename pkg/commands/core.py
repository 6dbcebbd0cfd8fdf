"""tree-expand and validate-premeasure."""

import logging

from config_manager import CERTIFICATE_LIMIT
from core_utils import check_convex, check_geometrical, tree_expand
from inputs_utils import load_premeasure, load_tree, parse_strings
from measure_utils import rational_rep_query, validate_probability
from numeric_utils import parse_rational

from commands.common import add_depth, natural

logger = logging.getLogger("measureit.commands.core")


def register(subparsers, parent):
    p = subparsers.add_parser("tree-expand", parents=[parent], help="explicit node set of a tree to depth N")
    p.add_argument("--tree", required=True, help="built-in name, JSON file or inline JSON")
    add_depth(p)
    p.set_defaults(handler=run_tree_expand, sweepable=())

    p = subparsers.add_parser("validate-premeasure", parents=[parent],
                              help="geometrical (p, q) witness and order convexity of a premeasure")
    p.add_argument("--premeasure", required=True, help='"lebesgue", an order flag, "measure:<m>" or JSON')
    add_depth(p)
    p.add_argument("--query", default=None, help="rational representation query sigma,q1,q2")
    p.set_defaults(handler=run_validate_premeasure, sweepable=())


def run_tree_expand(args):
    T = load_tree(args.tree)
    nodes = sorted(tree_expand(T, args.depth), key=lambda s: (len(s), s))
    counts = [0] * (args.depth + 1)
    for sigma in nodes:
        counts[len(sigma)] += 1
    result = {"count": len(nodes), "levelCounts": counts}
    if len(nodes) <= CERTIFICATE_LIMIT:
        result["nodes"] = nodes
    else:
        result["truncated"] = True
    return result


def run_validate_premeasure(args):
    rho = load_premeasure(args.premeasure)
    result = {
        "premeasure": rho.describe(),
        "geometrical": check_geometrical(rho, args.depth, args.precision).to_json(),
    }
    if rho.kind == "hausdorff" and args.depth >= 1:
        result["convex"] = check_convex(rho.order, args.depth)
    if rho.is_probability:
        ok, site = validate_probability(rho.measure)
        result["probability"] = {"ok": ok, "site": site}
    if args.query:
        sigma, q1, q2 = args.query.split(",")
        sigma = parse_strings(sigma)[0]
        result["query"] = {
            "string": sigma,
            "q1": q1.strip(),
            "q2": q2.strip(),
            "member": rational_rep_query(rho, sigma, parse_rational(q1), parse_rational(q2), args.precision),
        }
    return result
