"""dmeas and cauchy."""

import logging
from fractions import Fraction

from inputs_utils import load_measure
from measure_utils import cauchy_approximate, dmeas_compare, dmeas_distance
from numeric_utils import format_rational

from commands.common import add_depth, natural, rational

logger = logging.getLogger("measureit.commands.measures")


def register(subparsers, parent):
    p = subparsers.add_parser("dmeas", parents=[parent], help="distance between two measures")
    p.add_argument("--a", required=True, help="first measure")
    p.add_argument("--b", required=True, help="second measure")
    add_depth(p, help="walk depth K before bounding the remainder")
    p.add_argument("--q", type=rational, default=None, help="also decide d_meas < q and d_meas <= q")
    p.set_defaults(handler=run_dmeas, sweepable=("q",))

    p = subparsers.add_parser("cauchy", parents=[parent], help="dyadic approximant within 2^-n")
    p.add_argument("--measure", required=True)
    p.add_argument("--n", type=natural, required=True)
    p.set_defaults(handler=run_cauchy, sweepable=())


def run_dmeas(args):
    a, b = load_measure(args.a), load_measure(args.b)
    result = dmeas_distance(a, b, args.depth).to_json()
    if args.q is not None:
        verdict = dmeas_compare(a, b, args.q, args.depth)
        result["compare"] = {"q": format_rational(args.q), **{k: ("undecided" if v is None else v) for k, v in verdict.items()}}
    return result


def run_cauchy(args):
    m = load_measure(args.measure)
    approx = cauchy_approximate(m, args.n)
    bound = Fraction(1, 2 ** args.n)
    distance = dmeas_distance(m, approx, args.n + 1)
    return {
        "approximant": approx.to_json(),
        "errorBound": format_rational(bound),
        "distance": distance.to_json(),
        # null when the enclosure straddles the bound
        "withinBound": distance.value.le(bound),
    }
