import random
from fractions import Fraction

import pytest

from treeharmonics import (
    LevelFunction,
    TreeSpec,
    Value,
    build_tree,
)


@pytest.fixture(scope="session")
def binary4():
    return build_tree(TreeSpec(depth=4, branching={"kind": "uniform", "arity": 2}))


@pytest.fixture(scope="session")
def binary6():
    return build_tree(TreeSpec(depth=6, branching={"kind": "uniform", "arity": 2}))


@pytest.fixture(scope="session")
def ternary3():
    return build_tree(TreeSpec(depth=3, branching={"kind": "uniform", "arity": 3}))


@pytest.fixture(scope="session")
def lopsided3():
    # depth 3, mixed arities, non-uniform rows: exercises per-vertex bookkeeping
    return build_tree(
        TreeSpec(
            depth=3,
            branching={"kind": "random", "max_arity": 3},
            q_rule={"kind": "random", "max_weight": 7},
            w_rule={"kind": "random", "max_weight": 5},
            seed=11,
        )
    )


@pytest.fixture(scope="session")
def deep_binary():
    return build_tree(TreeSpec(depth=60, branching={"kind": "uniform", "arity": 2}))


def random_value(rng: random.Random, dim: int) -> Value:
    return Value(tuple(Fraction(rng.randint(-4, 4), rng.choice([1, 2, 4])) for _ in range(dim)))


def random_level_function(tree, rng: random.Random, level: int, dim: int) -> LevelFunction:
    vals = [random_value(rng, dim) for _ in range(tree.level_size(level))]
    return LevelFunction.from_values(tree, level, vals)
