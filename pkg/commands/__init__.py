"""Subcommand groups; each module registers its parsers and a handler per subcommand."""

from commands import capacity, core, frostman, hausdorff, measures, randomtests

COMMAND_MODULES = (core, measures, hausdorff, frostman, capacity, randomtests)


def register_all(subparsers, parent):
    for module in COMMAND_MODULES:
        module.register(subparsers, parent)
