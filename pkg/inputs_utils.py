"""Input loading: JSON documents, inline flag texts and built-in named inputs.

Every loader accepts a built-in name, a path to a JSON file, or inline JSON
(anything starting with "{" or "["). Schema problems surface as InputError.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path

from core_utils import (
    Order,
    TreeModel,
    every_other_tree,
    full_tree,
    hausdorff_premeasure,
    lebesgue_premeasure,
    probability_premeasure,
    single_path_tree,
    table_premeasure,
)
from frostman_utils import (
    MonotoneMachine,
    doubling_machine,
    empty_machine,
    identity_machine,
    machine_semimeasure,
    semimeasure_from_json,
    zero_semimeasure,
)
from measure_utils import (
    CylinderMeasure,
    DyadicMeasure,
    SplitMeasure,
    bernoulli_measure,
    dirac_one,
    dirac_zero,
    lebesgue_measure,
    natural_measure,
)
from numeric_utils import parse_rational
from randomtest_utils import TestObject

logger = logging.getLogger("measureit.inputs_utils")

DEFAULT_MACHINE_DEPTH = 8


class InputError(ValueError):
    """An input file or flag text does not match its schema."""


BUILTIN_TREES = {
    "full": full_tree,
    "every-other": every_other_tree,
    "single-path": single_path_tree,
}

BUILTIN_MEASURES = {
    "lebesgue": lebesgue_measure,
    "dirac0": dirac_zero,
    "dirac1": lambda: dirac_one(1),
    "every-other-natural": lambda: natural_measure(every_other_tree()),
}

BUILTIN_MACHINES = {
    "identity": identity_machine,
    "doubling": doubling_machine,
    "empty": lambda depth: empty_machine(),
}


# ============================================================================
# DOCUMENT READING
# ============================================================================

def read_json(text):
    """Inline JSON or the contents of a JSON file."""
    text = text.strip()
    try:
        if text.startswith(("{", "[")):
            return json.loads(text)
        path = Path(text)
        if not path.is_file():
            raise InputError(f"no such input file: {text}")
        with open(path, "r") as f:
            data = json.load(f)
        logger.debug(f"Loaded input document {path}")
        return data
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON in {text[:40]!r}: {e}") from e


def _decode(kind, text, build):
    """Run a from_json style builder, turning schema problems into InputError."""
    data = read_json(text)
    try:
        return build(data)
    except InputError:
        raise
    except (KeyError, TypeError, AttributeError) as e:
        raise InputError(f"{kind} document is missing or mistypes a field: {e}") from e
    except ValueError as e:
        raise InputError(f"invalid {kind}: {e}") from e


def _split_named(text):
    """"name:arg" -> ("name", "arg"); plain names give ("name", None)."""
    name, _, arg = text.partition(":")
    return name.strip(), (arg.strip() or None)


# ============================================================================
# TREES, ORDERS AND PREMEASURES
# ============================================================================

def load_tree(text):
    if text in BUILTIN_TREES:
        return BUILTIN_TREES[text]()
    return _decode("tree", text, TreeModel.from_json)


def _parse_values(body):
    values = [v for v in body.split(",") if v.strip()]
    if not values:
        raise InputError("order table needs at least one value")
    return [parse_rational(v) for v in values]


def parse_order_flag(text):
    """Order from flag text.

    "s=p/q"                     linear, h(n) = s n
    "table:v0,v1,...[;tail=x]"  table with an optional linear tail
    "stair:v0,...;step=x"       periodic block raised by x per period
    Anything else is read as an Order JSON document.
    """
    text = text.strip()
    try:
        if text.startswith("s="):
            return Order.linear(parse_rational(text[2:]))
        if text.startswith(("table:", "stair:")):
            kind, _, rest = text.partition(":")
            body, *options = rest.split(";")
            extras = {}
            for option in options:
                key, sep, value = option.partition("=")
                if not sep:
                    raise InputError(f"malformed order option {option!r}")
                extras[key.strip()] = parse_rational(value)
            values = _parse_values(body)
            if kind == "table":
                unknown = set(extras) - {"tail"}
                if unknown:
                    raise InputError(f"unknown table order option {sorted(unknown)[0]!r}")
                return Order.table(values, extras.get("tail"))
            if set(extras) != {"step"}:
                raise InputError("stair order needs exactly one step=... option")
            return Order.staircase(values, extras["step"])
    except InputError:
        raise
    except ValueError as e:
        raise InputError(f"malformed order {text!r}: {e}") from e
    return _decode("order", text, Order.from_json)


def load_premeasure(text):
    """Premeasure from "lebesgue", an order flag, "measure:<measure>" or a {"table": ...} document."""
    text = text.strip()
    if text == "lebesgue":
        return lebesgue_premeasure()
    if text.startswith("measure:"):
        return probability_premeasure(load_measure(text[len("measure:"):]))
    if text.startswith(("s=", "table:", "stair:")):
        return hausdorff_premeasure(parse_order_flag(text))

    def build(data):
        if "table" in data:
            return table_premeasure({str(s): parse_rational(v) for s, v in data["table"].items()})
        if "order" in data:
            return hausdorff_premeasure(Order.from_json(data["order"]), parse_rational(data.get("scale", "1")))
        return hausdorff_premeasure(Order.from_json(data))

    return _decode("premeasure", text, build)


# ============================================================================
# MEASURES
# ============================================================================

def _split_from_json(data):
    tree = TreeModel.from_json(data["tree"])
    depth = data.get("depth")
    ratios = {}
    for key, pair in data["ratios"].items():
        if depth is None:
            ratios[str(key)] = tuple(parse_rational(r) for r in pair)
        else:
            n, _, state = str(key).partition(":")
            ratios[(int(n), state)] = tuple(parse_rational(r) for r in pair)
    return SplitMeasure(tree, ratios, depth=depth)


def measure_from_json(data):
    if data.get("kind") == "split":
        return _split_from_json(data)
    if "support" in data:
        return DyadicMeasure.from_json(data)
    return CylinderMeasure.from_json(data)


def load_measure(text):
    name, arg = _split_named(text.strip())
    if name == "bernoulli":
        if arg is None:
            raise InputError("bernoulli measure needs a parameter, e.g. bernoulli:1/3")
        try:
            return bernoulli_measure(parse_rational(arg))
        except ValueError as e:
            raise InputError(str(e)) from e
    if name == "dirac1" and arg is not None:
        return dirac_one(int(arg))
    if name in BUILTIN_MEASURES and arg is None:
        return BUILTIN_MEASURES[name]()
    return _decode("measure", text, measure_from_json)


# ============================================================================
# MACHINES, SEMIMEASURES AND TESTS
# ============================================================================

def load_machine(text, depth=None):
    """Built-ins take an optional table depth: "identity:6"."""
    name, arg = _split_named(text.strip())
    if name in BUILTIN_MACHINES:
        try:
            table_depth = int(arg) if arg is not None else (depth or DEFAULT_MACHINE_DEPTH)
        except ValueError as e:
            raise InputError(f"machine depth must be an integer, got {arg!r}") from e
        return BUILTIN_MACHINES[name](table_depth)
    return _decode("machine", text, MonotoneMachine.from_json)


def load_semimeasure(text, depth=None):
    """"zero", "machine:<machine>" or a {"values": ...} document."""
    text = text.strip()
    if text == "zero":
        return zero_semimeasure()
    if text.startswith("machine:"):
        return machine_semimeasure(load_machine(text[len("machine:"):], depth))
    return _decode("semimeasure", text, semimeasure_from_json)


def load_test(text):
    return _decode("test", text, TestObject.from_json)


def parse_strings(text):
    """Comma separated bit strings; "e" or an empty item stands for the empty string."""
    items = [s.strip() for s in text.split(",")]
    return [("" if s in ("e", "") else s) for s in items]


def parse_bound(text):
    """"s,gamma" for a declared (s, gamma)-bounded measure."""
    try:
        s, gamma = (parse_rational(v) for v in text.split(","))
    except ValueError as e:
        raise InputError(f"bound must look like s,gamma: {text!r}") from e
    if gamma <= 0:
        raise InputError("bound constant gamma must be positive")
    return s, Fraction(gamma)
