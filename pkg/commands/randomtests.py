"""check-test, convert-test and prefixfree."""

import logging

from inputs_utils import InputError, load_measure, load_premeasure, load_test, parse_strings
from randomtest_utils import (
    check_ml,
    check_solovay,
    check_strong,
    check_vehement,
    convert_strong_to_ml,
    prefix_free_generators,
    prefix_levels,
    same_open_set,
    vehement_to_ml_probability,
)

from commands.common import natural, rational, require

logger = logging.getLogger("measureit.commands.randomtests")

NOTIONS = ("ml", "solovay", "strong", "vehement")


def register(subparsers, parent):
    p = subparsers.add_parser("check-test", parents=[parent], help="correctness of a test object")
    p.add_argument("--test", required=True, help='JSON {"levels": [[...], ...]}')
    p.add_argument("--premeasure", required=True)
    p.add_argument("--notion", choices=NOTIONS + ("all",), default="all")
    p.add_argument("--depth", type=natural, default=None, help="cover horizon for the vehement check")
    p.set_defaults(handler=run_check_test, sweepable=())

    p = subparsers.add_parser("convert-test", parents=[parent], help="convert a test between notions")
    p.add_argument("--test", required=True)
    p.add_argument("--kind", choices=("strong-ml", "vehement-ml"), required=True)
    p.add_argument("--s", type=rational, default=None, help="strong-ml: input order slope")
    p.add_argument("--t", type=rational, default=None, help="strong-ml: output order slope")
    p.add_argument("--measure", default=None, help="vehement-ml: probability measure")
    p.add_argument("--depth", type=natural, default=None, help="vehement-ml: cover horizon")
    p.set_defaults(handler=run_convert_test, sweepable=("t",))

    p = subparsers.add_parser("prefixfree", parents=[parent], help="prefix-free generators of a listed set")
    p.add_argument("--strings", required=True, help='comma separated, in enumeration order ("e" is empty)')
    p.set_defaults(handler=run_prefixfree, sweepable=())


def _horizon(args, W):
    if args.depth is not None:
        return args.depth
    return max((len(s) for level in W.levels for s in level), default=0)


def run_check_test(args):
    W = load_test(args.test)
    rho = load_premeasure(args.premeasure)
    notions = NOTIONS if args.notion == "all" else (args.notion,)
    result = {}
    for notion in notions:
        if notion == "ml":
            verdict = check_ml(W, rho, args.precision)
        elif notion == "solovay":
            verdict = check_solovay(W, rho, args.precision)
        elif notion == "strong":
            verdict = check_strong(W, rho, args.precision)
        else:
            verdict = check_vehement(W, rho, _horizon(args, W), args.precision)
        result[notion] = verdict.to_json()
    return result


def run_convert_test(args):
    W = load_test(args.test)
    if args.kind == "strong-ml":
        return convert_strong_to_ml(W, require(args, "s"), require(args, "t"), args.precision).to_json()
    if args.measure is None:
        raise InputError("vehement-ml conversion needs --measure")
    m = load_measure(args.measure)
    return vehement_to_ml_probability(W, m, _horizon(args, W), args.precision).to_json()


def run_prefixfree(args):
    listed = parse_strings(args.strings)
    generators = prefix_free_generators(listed)
    return {
        "generators": list(generators),
        "sameOpenSet": same_open_set(listed, generators),
        "prefixLevels": [list(part) for part in prefix_levels(listed)],
    }
