"""hmeasure and hdim."""

import logging

from core_utils import hausdorff_premeasure
from hausdorff_utils import check_certificate, exhaustive_method1_value, hdim_estimate, method1_value
from inputs_utils import load_tree
from numeric_utils import format_rational

from commands.common import add_depth, add_order, order_from_args, rational

logger = logging.getLogger("measureit.commands.hausdorff")

EXHAUSTIVE_DEPTH_LIMIT = 5


def register(subparsers, parent):
    p = subparsers.add_parser("hmeasure", parents=[parent], help="depth-N Method-I value and an optimal cut")
    p.add_argument("--tree", required=True)
    add_order(p)
    p.add_argument("--scale", type=rational, default=1, help="constant factor gamma in gamma 2^-h")
    add_depth(p)
    p.add_argument("--exhaustive", action="store_true", help=f"also enumerate all cuts (depth <= {EXHAUSTIVE_DEPTH_LIMIT})")
    p.set_defaults(handler=run_hmeasure, sweepable=("s", "scale"))

    p = subparsers.add_parser("hdim", parents=[parent], help="Hausdorff dimension interval by bisection")
    p.add_argument("--tree", required=True)
    add_depth(p)
    p.add_argument("--tol", type=rational, default=None, help="interval width (default from config)")
    p.set_defaults(handler=run_hdim, sweepable=("tol",))


def run_hmeasure(args):
    T = load_tree(args.tree)
    order = order_from_args(args)
    rho = hausdorff_premeasure(order, args.scale)
    value, certificate = method1_value(T, rho, args.depth, precision=args.precision)
    result = {"value": value.to_json(), "order": order.to_json(), "scale": format_rational(args.scale),
              "certificate": certificate.to_json()}
    if certificate.materialized:
        result["cut"] = list(certificate.antichain)
        ok, reason = check_certificate(T, rho, args.depth, certificate, args.precision)
        result["certificateCheck"] = {"ok": ok, "reason": reason}
    if args.exhaustive:
        if args.depth > EXHAUSTIVE_DEPTH_LIMIT:
            logger.warning(f"--exhaustive ignored above depth {EXHAUSTIVE_DEPTH_LIMIT}")
        else:
            result["exhaustiveValue"] = exhaustive_method1_value(T, rho, args.depth, args.precision).to_json()
    return result


def run_hdim(args):
    T = load_tree(args.tree)
    return hdim_estimate(T, args.depth, args.tol, args.precision).to_json()
