import random
from fractions import Fraction

import pytest

from core_utils import TreeModel
from measure_utils import table_from_level


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def make_tree():
    """Random explicit prefix-closed tree to depth N; each child kept with probability p."""

    def build(rng, N, p=0.6):
        nodes = {""}
        frontier = [""]
        for _ in range(N):
            frontier = [s + b for s in frontier for b in "01" if rng.random() < p]
            nodes.update(frontier)
        return TreeModel.explicit(nodes)

    return build


@pytest.fixture
def make_measure():
    """Random probability table on all depth-D strings, uniformly extended."""

    def build(rng, depth, zero_rate=0.0):
        leaves = {}
        for i in range(2 ** depth):
            sigma = format(i, f"0{depth}b") if depth else ""
            leaves[sigma] = 0 if rng.random() < zero_rate else rng.randint(1, 10)
        if not any(leaves.values()):
            leaves[next(iter(leaves))] = 1
        total = sum(leaves.values())
        return table_from_level({s: Fraction(w, total) for s, w in leaves.items()}, depth)

    return build
