import math
import re

import numpy as np
import pytest

from ncdtree.core.exceptions import InvalidInput
from ncdtree.core.rng import make_rng
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.tree import QuartetTopology, TreeScore
from ncdtree.services.experiment_service import gen_random_tree_metric
from ncdtree.services.quartet_service import (
    QuartetScorer,
    consistent_topology,
    count_quartets,
    export,
    pairing_sums,
    parse_dot,
    quartet_agreement,
    quartet_cost,
    quartet_index,
    quartet_topologies,
    score,
)
from ncdtree.services.search_service import random_tree
from tests.oracles import all_trees, brute_force_score, double_factorial, path_crossing_pairing

LABELS4 = ["a", "b", "c", "d"]


def random_matrix(rng, n):
    values = rng.random((n, n))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix([f"o{i}" for i in range(n)], values)


@pytest.fixture
def ab_cd():
    return ClusterTree(LABELS4, [(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)])


@pytest.fixture
def ac_bd():
    return ClusterTree(LABELS4, [(0, 4), (2, 4), (4, 5), (1, 5), (3, 5)])


@pytest.fixture
def four_objects():
    return DistanceMatrix(
        LABELS4,
        [[0, 0.1, 1, 1], [0.1, 0, 1, 1], [1, 1, 0, 0.1], [1, 1, 0.1, 0]],
    )


def test_count_quartets():
    assert count_quartets(4) == 1
    assert count_quartets(18) == 3060
    with pytest.raises(InvalidInput):
        count_quartets(3)


def test_quartet_index_is_lexicographic_and_read_only():
    quads = quartet_index(6)
    assert quads.shape == (15, 4)
    assert quads[0].tolist() == [0, 1, 2, 3]
    assert quads[-1].tolist() == [2, 3, 4, 5]
    with pytest.raises(ValueError):
        quads[0, 0] = 9


def test_four_leaves_perfect_and_worst(four_objects, ab_cd, ac_bd):
    """Test the only quartet scores 1 when resolved as in the data and 0 otherwise."""
    good = score(ab_cd, four_objects)
    bad = score(ac_bd, four_objects)

    assert good.S == 1.0
    assert good.C_T == pytest.approx(0.2)
    assert bad.S == 0.0
    assert bad.m == pytest.approx(0.2)
    assert bad.M == pytest.approx(2.0)


def test_consistent_topology(ab_cd, four_objects):
    top = consistent_topology(ab_cd, ["a", "c", "b", "d"])

    assert top.same_as(QuartetTopology(pair1=("d", "c"), pair2=("b", "a")))
    assert str(top) == "a b | c d"
    assert quartet_cost(four_objects, top) == pytest.approx(0.2)
    with pytest.raises(InvalidInput):
        consistent_topology(ab_cd, ["a", "a", "b", "c"])


def test_generating_tree_scores_one():
    tree, matrix = gen_random_tree_metric(18, seed=11)
    result = score(tree, matrix)
    assert result.S == 1.0
    assert result.C_T == result.m
    assert result.is_perfect(0.0)


def test_constant_matrix_scores_one(ab_cd):
    matrix = DistanceMatrix(LABELS4, np.ones((4, 4)) - np.eye(4))
    result = score(ab_cd, matrix)
    assert result.m == result.M
    assert result.S == 1.0


@pytest.mark.parametrize("n", [5, 6])
def test_every_small_tree_matches_brute_force(n):
    """Test every tree on 5 and 6 leaves against the path-crossing oracle, 20 matrices each."""
    trees = all_trees([f"o{i}" for i in range(n)])
    assert len(trees) == len(set(trees)) == double_factorial(2 * n - 5)

    for seed in range(20):
        matrix = random_matrix(make_rng(seed), n)
        scorer = QuartetScorer(matrix)
        for tree in trees:
            expected = brute_force_score(tree, matrix)
            actual = scorer.score(tree)
            assert (actual.C_T, actual.m, actual.M, actual.S) == (expected.C_T, expected.m, expected.M, expected.S)


@pytest.mark.parametrize("n, count", [(5, 20), pytest.param(12, 200, marks=pytest.mark.slow)])
def test_consistent_pairings_match_path_crossing(rng, n, count):
    matrix = random_matrix(rng, n)
    scorer = QuartetScorer(matrix)
    labels = matrix.labels
    for _ in range(count):
        tree = random_tree(labels, rng)
        chosen = scorer.consistent_pairings(tree)
        expected = [path_crossing_pairing(tree, [labels[i] for i in quad]) for quad in scorer.quads]
        assert chosen.tolist() == expected


def test_consistent_pairing_wins_by_two(rng):
    """Test the non-crossing pairing's path sum is 2 below the other two, which tie."""
    tree = random_tree([f"l{i}" for i in range(9)], rng)
    sums = np.sort(pairing_sums(tree.leaf_distances(), quartet_index(9)), axis=0)
    assert np.all(sums[0] + 2 <= sums[1])
    assert np.array_equal(sums[1], sums[2])


def test_each_tree_is_consistent_with_a_third_of_all_topologies(rng):
    """Test 100 random trees on 4 to 20 leaves have exactly one consistent topology per quartet."""
    for trial in range(100):
        n = 4 + trial % 17
        tree = random_tree([f"l{i}" for i in range(n)], rng)
        sums = pairing_sums(tree.leaf_distances(), quartet_index(n))
        consistent = np.count_nonzero(sums == sums.min(axis=0))
        assert consistent == count_quartets(n) == sums.size // 3


@pytest.mark.parametrize("n", [5, 6])
def test_mean_cost_over_all_trees_is_a_third(rng, n):
    """Test each topology of a quartet is consistent with exactly a third of all trees."""
    matrix = random_matrix(rng, n)
    scorer = QuartetScorer(matrix)
    costs = [scorer.score(tree).C_T for tree in all_trees(matrix.labels)]

    assert len(costs) == double_factorial(2 * n - 5)
    assert math.fsum(costs) / len(costs) == pytest.approx(math.fsum(scorer.costs.sum(axis=0)) / 3, rel=1e-12)


def test_scores_are_bounded(rng):
    matrix = random_matrix(rng, 10)
    scorer = QuartetScorer(matrix)
    for _ in range(30):
        result = scorer.score(random_tree(matrix.labels, rng))
        assert scorer.m <= result.C_T <= scorer.M
        assert 0.0 <= result.S <= 1.0


def test_score_is_invariant_under_affine_rescaling(rng):
    matrix = random_matrix(rng, 8)
    rescaled = DistanceMatrix(matrix.labels, 3.5 * matrix.values + 0.25)
    for _ in range(10):
        tree = random_tree(matrix.labels, rng)
        assert score(tree, rescaled).S == pytest.approx(score(tree, matrix).S, rel=1e-9)


def test_score_is_invariant_under_renumbering(rng):
    matrix = random_matrix(rng, 8)
    order = rng.permutation(8)
    permuted = DistanceMatrix([matrix.labels[i] for i in order], matrix.values[np.ix_(order, order)])
    tree = random_tree(matrix.labels, rng)
    assert score(tree, permuted).S == pytest.approx(score(tree, matrix).S, rel=1e-12)
    assert score(tree, permuted).C_T == pytest.approx(score(tree, matrix).C_T, rel=1e-12)


def test_mismatched_leaves_rejected(ab_cd):
    matrix = DistanceMatrix(["a", "b", "c", "e"], np.ones((4, 4)))
    with pytest.raises(InvalidInput):
        score(ab_cd, matrix)


def test_tree_score_from_costs():
    assert TreeScore.from_costs(3.0, 2.0, 6.0).S == 0.75
    assert TreeScore.from_costs(5.0, 5.0, 5.0).S == 1.0
    assert TreeScore.from_costs(2.0 + 1e-13, 2.0, 6.0).is_perfect(1e-12)


def test_quartet_agreement(rng, ab_cd, ac_bd):
    assert quartet_agreement(ab_cd, ab_cd.copy()) == 1.0
    assert quartet_agreement(ab_cd, ac_bd) == 0.0

    first = random_tree([f"l{i}" for i in range(7)], rng)
    second = random_tree([f"l{i}" for i in range(7)], rng)
    agreement = quartet_agreement(first, second)
    assert 0.0 <= agreement <= 1.0
    assert agreement == quartet_agreement(second, first)


def test_quartet_topologies_use_sorted_labels(ab_cd):
    shuffled = ClusterTree(["d", "c", "b", "a"], [(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)])
    assert quartet_topologies(ab_cd).tolist() == [0]
    assert quartet_topologies(shuffled).tolist() == [0]


def newick_splits(text, labels):
    """Leaf bipartitions read off the parenthesis structure of a Newick line."""
    body = text.splitlines()[-1].rstrip(";")
    anchor, everything = min(labels), frozenset(labels)
    stack, found, closed = [], set(), False
    for token in re.findall(r"[(),]|[^(),]+", body):
        if token == "(":
            stack.append(set())
        elif token == ")":
            group = frozenset(stack.pop())
            if stack:
                stack[-1].update(group)
                found.add(group)
        elif token != "," and not closed:
            stack[-1].add(token)
            found.add(frozenset((token,)))
        closed = token == ")"
    return {everything - side if anchor in side else side for side in found}


def test_export_and_parse(ab_cd, rng):
    """Test DOT round-trips and Newick keeps sibling pairs and every split."""
    assert parse_dot(export(ab_cd, "dot")) == ab_cd
    assert parse_dot(export(ab_cd, "dot")).splits() == ab_cd.splits()
    newick = export(ab_cd, "newick")
    assert newick.endswith(";\n")
    assert "(a,b," in newick
    assert "(c,d)" in newick
    assert newick_splits(newick, LABELS4) == ab_cd.splits()

    tree = random_tree([f"l{i}" for i in range(9)], rng)
    assert parse_dot(export(tree, "dot")).splits() == tree.splits()
    assert newick_splits(export(tree, "newick"), tree.labels) == tree.splits()
    with pytest.raises(InvalidInput):
        export(ab_cd, "nexus")
