"""Argument types and flags shared by every subcommand."""

import argparse

from core_utils import Order
from inputs_utils import InputError, parse_order_flag
from numeric_utils import parse_rational


def natural(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a natural number, got {value}")
    return value


def rational(text):
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def precision_bits(text):
    bits = natural(text)
    if bits < 64:
        raise argparse.ArgumentTypeError("precision must be at least 64 bits")
    return bits


def output_flags():
    """Parent parser carrying the flags every subcommand accepts."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    parent.add_argument("--output", default=None, help="write the document here instead of stdout")
    parent.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    parent.add_argument("--precision", type=precision_bits, default=None, help="interval precision in bits")
    parent.add_argument("--sweep", default=None, help="parameter sweep name=lo:hi:step")
    parent.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parent


def add_depth(parser, help="truncation depth N"):
    parser.add_argument("--depth", type=natural, required=True, help=help)


def add_order(parser):
    parser.add_argument("--order", default=None, help='order h: "s=1/2", "table:0,1;tail=1", "stair:0,1;step=1" or JSON')
    parser.add_argument("--s", type=rational, default=None, help="shortcut for the linear order h(n) = s n")


def order_from_args(args):
    """--s wins over --order so that sweeps over s replace the order."""
    if args.s is not None:
        return Order.linear(args.s)
    if args.order is None:
        raise InputError("an order is required: pass --order or --s")
    return parse_order_flag(args.order)


def require(args, name):
    value = getattr(args, name)
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    return value
