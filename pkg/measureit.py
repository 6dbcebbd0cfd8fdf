"""measureit command line: one subcommand per toolkit operation, JSON or CSV documents out.

Exit status: 0 on success, 1 on a domain error, 2 on a usage error.
"""

import argparse
import copy
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

# Initialize logging configuration (must be done first!)
import logging_config
logger = logging.getLogger("measureit.measureit")

from config_manager import OUTPUT_FORMAT
from commands import register_all
from commands.common import output_flags
from inputs_utils import InputError, parse_order_flag
from numeric_utils import DomainError, format_rational
from report_utils import build_document, error_document, render, write_output
from sweep_queue import parse_sweep, run_sweep

__all__ = ["build_parser", "run", "main", "parse_order_flag"]

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2
INTERNAL_KEYS = {"handler", "sweepable", "command", "format", "output", "no_timestamp", "sweep", "verbose"}


class UsageError(InputError):
    """Command line could not be parsed."""


class CommandParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser():
    parser = CommandParser(prog="measureit", description="Cantor-space measures, dimensions, capacities and tests")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    register_all(subparsers, output_flags())
    return parser


def echo_inputs(args):
    """Request flags as they went in, rationals as "p/q"."""
    echoed = {}
    for key, value in sorted(vars(args).items()):
        if key in INTERNAL_KEYS or value is None or value is False:
            continue
        echoed[key] = format_rational(value) if isinstance(value, Fraction) else value
    return echoed


def _sweep(args):
    name, values = parse_sweep(args.sweep)
    if name not in args.sweepable:
        allowed = ", ".join(args.sweepable) or "nothing"
        raise UsageError(f"{args.command} cannot sweep {name!r} (sweepable: {allowed})")

    def evaluate(value):
        point = copy.copy(args)
        setattr(point, name, value)
        return args.handler(point)

    rows = []
    for job in run_sweep(evaluate, values):
        row = {name: format_rational(job.value)}
        if job.status == "completed":
            row.update(job.result)
        else:
            row["error"] = job.error
        rows.append(row)
    return {"sweep": name, "rows": rows}


@dataclass
class CommandRequest:
    """A parsed invocation: subcommand arguments plus output settings."""
    args: argparse.Namespace
    fmt: str = OUTPUT_FORMAT
    output: Optional[str] = None
    timestamp: Optional[bool] = None

    @property
    def command(self):
        return self.args.command


def parse_request(argv):
    args = build_parser().parse_args(argv)
    return CommandRequest(
        args,
        fmt=args.format or OUTPUT_FORMAT,
        output=args.output,
        timestamp=False if args.no_timestamp else None,
    )


def run(request):
    """Execute one request (or argv list); returns (exit status, output document or None)."""
    if not isinstance(request, CommandRequest):
        try:
            request = parse_request(request)
        except UsageError as e:
            logger.error(str(e))
            return EXIT_USAGE, None
    args = request.args
    if args.verbose:
        logging_config.set_console_level("INFO")
    inputs = echo_inputs(args)
    try:
        result = _sweep(args) if args.sweep else args.handler(args)
    except DomainError as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_DOMAIN, error_document(args.command, inputs, "domain", str(e), request.timestamp)
    except ValueError as e:
        # InputError, UsageError and malformed values from constructors
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE, error_document(args.command, inputs, "usage", str(e), request.timestamp)
    return EXIT_OK, build_document(args.command, inputs, result, request.timestamp)


def main(argv=None):
    try:
        request = parse_request(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    status, document = run(request)
    text = write_output(render(document, request.fmt), request.output)
    if text is not None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
