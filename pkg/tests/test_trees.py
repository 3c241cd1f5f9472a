import random
from fractions import Fraction

import pytest

from treeharmonics import (
    TreeSpec,
    UniformTree,
    ValidationError,
    VertexId,
    build_tree,
    level_measures,
    min_child_probability,
    sector_measure,
    tree_from_doc,
    tree_to_doc,
)


def test_uniform_binary_leaf_count():
    tree = build_tree(TreeSpec(depth=3, branching={"kind": "uniform", "arity": 2}))
    assert tree.level_size(3) == 8


def test_per_level_arities():
    tree = build_tree(TreeSpec(depth=2, branching={"kind": "per_level", "arities": [2, 3]}))
    assert tree.level_size(2) == 6


def test_q_row_not_summing_rejected():
    with pytest.raises(ValidationError):
        build_tree(
            TreeSpec(
                depth=1,
                branching={"kind": "uniform", "arity": 3},
                q_rule={"kind": "per_level", "rows": [["1/3", "1/3", "1/4"]]},
            )
        )


def test_arity_below_two_rejected():
    with pytest.raises(ValidationError):
        build_tree(TreeSpec(depth=1, branching={"kind": "uniform", "arity": 1}))


def test_zero_weight_rejected():
    with pytest.raises(ValidationError):
        build_tree(
            TreeSpec(
                depth=1,
                branching={"kind": "uniform", "arity": 2},
                w_rule={"kind": "per_level", "rows": [["0", "1"]]},
            )
        )


def test_incomplete_explicit_table_rejected():
    with pytest.raises(ValidationError):
        build_tree(
            TreeSpec(
                depth=2,
                branching={"kind": "explicit", "counts": [[2]]},  # level 1 missing
            )
        )


def test_sector_measure_root_is_one(binary4):
    assert sector_measure(binary4, VertexId(0, 0)) == 1


def test_sector_measure_uniform_binary(binary4):
    for o in range(4):
        assert sector_measure(binary4, VertexId(2, o)) == Fraction(1, 4)


def test_sector_measure_unknown_vertex(binary4):
    with pytest.raises(ValidationError):
        sector_measure(binary4, VertexId(2, 99))


def custom_two_level_tree():
    return build_tree(
        TreeSpec(
            depth=2,
            branching={"kind": "uniform", "arity": 2},
            q_rule={
                "kind": "explicit",
                "rows": [
                    [["1/3", "2/3"]],
                    [["1/4", "3/4"], ["1/2", "1/2"]],
                ],
            },
        )
    )


def test_sector_measure_path_product_oracle():
    tree = custom_two_level_tree()
    # oracle: enumerate all root-to-leaf index paths and sum the products that
    # land in the sector of c = (2, 0); the sector holds exactly one leaf here
    rows = {
        (0, 0): [Fraction(1, 3), Fraction(2, 3)],
        (1, 0): [Fraction(1, 4), Fraction(3, 4)],
        (1, 1): [Fraction(1, 2), Fraction(1, 2)],
    }
    total = Fraction(0)
    for i in range(2):
        for j in range(2):
            leaf_offset = 2 * i + j
            if leaf_offset == 0:
                total += rows[(0, 0)][i] * rows[(1, i)][j]
    assert total == Fraction(1, 12)
    assert sector_measure(tree, VertexId(2, 0)) == total


def test_level_measures_uniform(binary4):
    assert level_measures(binary4, 3) == [Fraction(1, 8)] * 8
    assert level_measures(binary4, 0) == [Fraction(1)]
    with pytest.raises(ValidationError):
        level_measures(binary4, 5)


def test_level_measure_consistency_oracle():
    # summing children's measures reproduces the parent's, level by level
    tree = custom_two_level_tree()
    lvl1 = level_measures(tree, 1)
    lvl2 = level_measures(tree, 2)
    assert sum(lvl1) == 1 and sum(lvl2) == 1
    for o in range(2):
        assert lvl2[2 * o] + lvl2[2 * o + 1] == lvl1[o]


def test_min_child_tie_break(binary4):
    child, prob = min_child_probability(binary4, VertexId(0, 0))
    assert child == VertexId(1, 0) and prob == Fraction(1, 2)


def test_min_child_argmin():
    tree = build_tree(
        TreeSpec(
            depth=1,
            branching={"kind": "uniform", "arity": 2},
            q_rule={"kind": "per_level", "rows": [["99/100", "1/100"]]},
        )
    )
    child, prob = min_child_probability(tree, VertexId(0, 0))
    assert child == VertexId(1, 1) and prob == Fraction(1, 100)


def test_min_child_leaf_rejected(binary4):
    with pytest.raises(ValidationError):
        min_child_probability(binary4, VertexId(4, 0))


def test_min_child_pigeonhole(lopsided3):
    for lvl in range(lopsided3.depth):
        for x in lopsided3.vertices(lvl):
            _, prob = min_child_probability(lopsided3, x)
            assert prob <= Fraction(1, 2)


def test_random_tree_children_sum_to_parent():
    rng = random.Random(5)
    for seed in range(8):
        tree = build_tree(
            TreeSpec(
                depth=rng.randint(1, 5),
                branching={"kind": "random", "max_arity": 3},
                q_rule={"kind": "random", "max_weight": 9},
                w_rule={"kind": "random", "max_weight": 5},
                seed=seed,
            )
        )
        for lvl in range(tree.depth):
            for x in tree.vertices(lvl):
                kids = tree.children(x)
                assert sum(sector_measure(tree, y) for y in kids) == sector_measure(tree, x)
        for lvl in range(tree.depth + 1):
            assert sum(level_measures(tree, lvl)) == 1


def test_build_is_deterministic():
    spec = TreeSpec(
        depth=4,
        branching={"kind": "random", "max_arity": 3},
        q_rule={"kind": "random", "max_weight": 9},
        w_rule={"kind": "random", "max_weight": 5},
        seed=42,
    )
    doc_a = tree_to_doc(build_tree(spec))
    doc_b = tree_to_doc(build_tree(spec))
    assert doc_a == doc_b
    other = TreeSpec(
        depth=4,
        branching={"kind": "random", "max_arity": 3},
        q_rule={"kind": "random", "max_weight": 9},
        w_rule={"kind": "random", "max_weight": 5},
        seed=43,
    )
    assert tree_to_doc(build_tree(other)) != doc_a


def test_serialization_roundtrip(lopsided3, binary4):
    for tree in (lopsided3, binary4):
        doc = tree_to_doc(tree)
        again = tree_from_doc(doc)
        assert tree_to_doc(again) == doc


def test_deep_uniform_tree_is_implicit(deep_binary):
    assert isinstance(deep_binary, UniformTree)
    assert deep_binary.level_size(60) == 2**60
    assert sector_measure(deep_binary, VertexId(60, 12345)) == Fraction(1, 2**60)
    assert sector_measure(deep_binary, VertexId(60, 2**60 - 1)) == Fraction(1, 2**60)
    # parent/child arithmetic agrees at depth
    x = VertexId(59, 7)
    assert deep_binary.parent(deep_binary.child(x, 1)) == x


def test_w_rows_independent_of_q():
    tree = build_tree(
        TreeSpec(
            depth=1,
            branching={"kind": "uniform", "arity": 2},
            q_rule={"kind": "per_level", "rows": [["2/3", "1/3"]]},
            w_rule={"kind": "per_level", "rows": [["1/3", "2/3"]]},
        )
    )
    root = VertexId(0, 0)
    assert tree.q_row(root) == (Fraction(2, 3), Fraction(1, 3))
    assert tree.w_row(root) == (Fraction(1, 3), Fraction(2, 3))


def test_negative_weights_allowed():
    tree = build_tree(
        TreeSpec(
            depth=1,
            branching={"kind": "uniform", "arity": 2},
            w_rule={"kind": "per_level", "rows": [["-1", "2"]]},
        )
    )
    assert tree.w_row(VertexId(0, 0)) == (Fraction(-1), Fraction(2))


def test_float_mode_tree():
    tree = build_tree(TreeSpec(depth=3, branching={"kind": "uniform", "arity": 2}, mode="float"))
    assert tree.mode == "float"
    assert abs(sector_measure(tree, VertexId(2, 0)) - 0.25) < 1e-12
