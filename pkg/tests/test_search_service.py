import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from ncdtree.core.exceptions import InvalidInput
from ncdtree.core.rng import make_rng
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.search import HaltReason, SearchConfig
from ncdtree.services.experiment_service import gen_random_tree_metric
from ncdtree.services.quartet_service import QuartetScorer
from ncdtree.services.search_service import (
    MutationStats,
    full_mutation,
    hill_climb,
    hill_climb_restarts,
    mutate_leaf_swap,
    mutate_subtree_swap,
    mutate_subtree_transfer,
    random_tree,
    restart_seeds,
    sample_burst_size,
)
from tests.oracles import all_trees

LEAVES = [f"l{i}" for i in range(10)]


def random_matrix(seed, n):
    values = make_rng(seed).random((n, n))
    values = (values + values.T) / 2
    np.fill_diagonal(values, 0.0)
    return DistanceMatrix([f"o{i}" for i in range(n)], values)


class TestRandomTree:
    def test_shape(self, rng):
        tree = random_tree(LEAVES, rng)
        tree.validate()
        assert tree.node_count == 18
        assert len(tree.edges()) == 17
        assert tree.labels == LEAVES

    def test_needs_four_leaves(self, rng):
        with pytest.raises(InvalidInput):
            random_tree(["a", "b", "c"], rng)

    def test_uniform_over_five_leaf_trees(self, rng):
        """Test all 15 five-leaf topologies appear with equal frequency."""
        labels = list("abcde")
        index = {tree: i for i, tree in enumerate(all_trees(labels))}
        counts = np.zeros(len(index))
        for _ in range(10_000):
            counts[index[random_tree(labels, rng)]] += 1

        assert np.all(counts > 0)
        assert chisquare(counts).pvalue > 1e-3

    def test_seeded(self):
        assert random_tree(LEAVES, make_rng(5)) == random_tree(LEAVES, make_rng(5))


class TestMutations:
    def test_leaf_swap_exchanges_two_labels(self, rng):
        tree = random_tree(LEAVES, rng)
        stats = MutationStats()

        mutated = mutate_leaf_swap(tree, rng, stats)

        changed = [i for i, (a, b) in enumerate(zip(tree.labels, mutated.labels)) if a != b]
        assert len(changed) == 2
        assert mutated.adjacency == tree.adjacency
        assert stats.applied["leaf_swap"] == 1

    def test_leaf_swap_twice_on_same_pair_restores(self, rng):
        tree = random_tree(LEAVES, rng)
        twice = tree.copy()
        twice.swap_labels(2, 7)
        twice.swap_labels(2, 7)
        assert twice.labels == tree.labels

    def test_subtree_swap_keeps_invariants(self, rng):
        tree = random_tree(LEAVES, rng)
        stats = MutationStats()
        for _ in range(200):
            tree = mutate_subtree_swap(tree, rng, stats)
            tree.validate()
            assert sorted(tree.labels) == LEAVES
        assert stats.applied["subtree_swap"] + stats.noops == 200
        assert stats.applied["subtree_swap"] > 0

    def test_subtree_swap_on_four_leaves_is_a_noop(self, rng):
        """Test with one non-root internal node there is no pair to swap."""
        tree = random_tree(list("abcd"), rng)
        stats = MutationStats()

        mutated = mutate_subtree_swap(tree, rng, stats)

        assert mutated == tree
        assert mutated is not tree
        assert stats.noops == 1
        assert stats.applied["subtree_swap"] == 0

    def test_subtree_transfer_keeps_invariants(self, rng):
        tree = random_tree(LEAVES, rng)
        for _ in range(200):
            previous = tree
            tree = mutate_subtree_transfer(tree, rng)
            tree.validate()
            assert tree.labels == previous.labels

    def test_subtree_transfer_reaches_every_five_leaf_tree(self, rng):
        labels = list("abcde")
        tree = random_tree(labels, rng)
        seen = {tree}
        for _ in range(3000):
            tree = mutate_subtree_transfer(tree, rng)
            seen.add(tree)
        assert len(seen) == 15

    def test_mutations_leave_input_untouched(self, rng):
        tree = random_tree(LEAVES, rng)
        snapshot = tree.copy()
        for mutation in (mutate_leaf_swap, mutate_subtree_swap, mutate_subtree_transfer):
            mutation(tree, rng)
            assert tree.adjacency == snapshot.adjacency
            assert tree.labels == snapshot.labels

    @pytest.mark.parametrize("n, rounds", [(10, 100), pytest.param(20, 10_000, marks=pytest.mark.slow)])
    def test_full_mutation_with_invariant_checks(self, rng, n, rounds):
        """Test repeated full mutations keep 2n-2 nodes, the degree profile, connectivity and the leaf set."""
        labels = [f"l{i}" for i in range(n)]
        tree = random_tree(labels, rng)
        stats = MutationStats()
        for _ in range(rounds):
            tree = full_mutation(tree, rng, stats=stats, check_invariants=True)
            assert tree.node_count == 2 * n - 2
            assert len(tree.edges()) == 2 * n - 3
            degrees = sorted(len(tree.adjacency[node]) for node in range(tree.node_count))
            assert degrees == [1] * n + [3] * (n - 2)
            assert len(tree.side_nodes(0, away_from=-1)) == tree.node_count
            assert sorted(tree.labels) == sorted(labels)
        assert sum(stats.applied.values()) + stats.noops >= rounds

    def test_burst_size_distribution(self):
        """Test P(k) = 2^-k: mean 2 and half the bursts are single mutations."""
        rng = make_rng(99)
        sizes = np.array([sample_burst_size(rng) for _ in range(100_000)])

        assert sizes.min() == 1
        assert abs(sizes.mean() - 2.0) <= 0.02
        assert abs(np.mean(sizes == 1) - 0.5) <= 0.01

    def test_burst_cap(self, rng):
        assert max(sample_burst_size(rng, cap=2) for _ in range(1000)) == 2


class TestHillClimb:
    @pytest.fixture
    def tree_metric(self):
        return gen_random_tree_metric(8, seed=4)

    def test_seeded_search_is_reproducible(self, tree_metric):
        _, matrix = tree_metric
        config = SearchConfig(seed=17, max_stale=300)

        first = hill_climb(matrix, config)
        second = hill_climb(matrix, config)

        assert first[0] == second[0]
        assert first[1] == second[1]
        assert first[2].to_csv() == second[2].to_csv()

    def test_recovers_generating_tree(self, tree_metric):
        generator, matrix = tree_metric

        tree, tree_score, trace = hill_climb(matrix, SearchConfig(seed=0))

        assert tree == generator
        assert tree_score.S == 1.0
        assert trace.halt_reason == HaltReason.PERFECT
        assert trace.best_tree is tree

    def test_trace_improves_strictly(self):
        """Test every accepted candidate strictly raises S(T) and the trace never falls."""
        matrix = random_matrix(3, 9)

        _, tree_score, trace = hill_climb(matrix, SearchConfig(seed=1, max_stale=500))

        candidates = [row.candidates for row in trace.records]
        scores = [row.best_S for row in trace.records]
        assert candidates[0] == 1
        assert np.all(np.diff(candidates) > 0)
        assert np.all(np.diff(scores[:-1]) > 0)
        assert scores == sorted(scores)
        assert scores[-1] == tree_score.S
        assert candidates[-1] == trace.total_candidates
        assert trace.halt_reason == HaltReason.STALE
        assert trace.to_csv().splitlines()[0] == "candidates,best_S"

    def test_trace_every_adds_rows(self):
        matrix = random_matrix(3, 9)
        sparse_trace = hill_climb(matrix, SearchConfig(seed=1, max_stale=300))[2]
        dense_trace = hill_climb(matrix, SearchConfig(seed=1, max_stale=300, trace_every=10))[2]
        assert len(dense_trace.records) > len(sparse_trace.records)

    def test_time_budget_halts(self):
        matrix = random_matrix(8, 30)
        _, _, trace = hill_climb(matrix, SearchConfig(max_stale=10**9, time_budget=0.2))
        assert trace.halt_reason == HaltReason.TIME

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(5))
    def test_ten_leaf_tree_metrics_are_solved(self, seed):
        generator, matrix = gen_random_tree_metric(10, seed=seed)

        tree, tree_score, trace = hill_climb(matrix, SearchConfig(seed=seed))

        assert trace.halt_reason == HaltReason.PERFECT
        assert tree_score.S == 1.0
        assert tree == generator

    @pytest.mark.slow
    def test_eighteen_leaf_tree_metric_is_solved(self):
        generator, matrix = gen_random_tree_metric(18, seed=0)

        tree, tree_score, trace = hill_climb(matrix, SearchConfig(seed=0, time_budget=600))

        assert trace.halt_reason == HaltReason.PERFECT
        assert tree_score.S == 1.0
        assert tree.splits() == generator.splits()

    @pytest.mark.slow
    @pytest.mark.parametrize("n, max_stale", [(5, 5000), (6, 20000)])
    def test_finds_exhaustive_optimum(self, n, max_stale):
        """Test the search reaches the best S(T) over all trees on small random matrices."""
        for seed in range(20):
            matrix = random_matrix(1000 + seed, n)
            scorer = QuartetScorer(matrix)
            optimum = max(scorer.score(tree).S for tree in all_trees(matrix.labels))

            _, tree_score, _ = hill_climb(matrix, SearchConfig(seed=seed, max_stale=max_stale))

            assert tree_score.S == optimum

    def test_parallel_climbers(self, tree_metric):
        generator, matrix = tree_metric

        tree, tree_score, trace = hill_climb(matrix, SearchConfig(seed=2, workers=3))

        tree.validate()
        assert tree == generator
        assert tree_score.S == 1.0
        assert trace.halt_reason == HaltReason.PERFECT

    def test_rejects_small_or_asymmetric_matrices(self):
        with pytest.raises(InvalidInput):
            hill_climb(DistanceMatrix(list("abc"), np.zeros((3, 3))))
        asymmetric = random_matrix(1, 5)
        asymmetric.values[0, 1] += 0.1
        with pytest.raises(InvalidInput):
            hill_climb(asymmetric)

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            SearchConfig(seed=-1)
        with pytest.raises(ValidationError):
            SearchConfig(workers=0)
        with pytest.raises(ValidationError):
            SearchConfig(time_budget=0)


class TestRestarts:
    def test_restart_seeds_are_distinct_and_stable(self):
        seeds = restart_seeds(0, 4)
        assert len(set(seeds)) == 4
        assert seeds == restart_seeds(0, 4)
        assert restart_seeds(1, 4) != seeds

    def test_summary(self):
        matrix = random_matrix(5, 8)

        tree, tree_score, trace, summary = hill_climb_restarts(matrix, SearchConfig(max_stale=200), restarts=3)

        assert len(summary.runs) == 3
        assert [run.seed for run in summary.runs] == restart_seeds(0, 3)
        assert tree_score.S == max(run.S for run in summary.runs)
        assert summary.runs[summary.best_run].S == tree_score.S
        assert isinstance(tree, ClusterTree)
        agreement = np.array(summary.agreement)
        assert np.array_equal(agreement, agreement.T)
        assert np.all(np.diag(agreement) == 1.0)
        assert "3 runs" in summary.to_text()
        assert trace.total_candidates == summary.runs[summary.best_run].total_candidates

    def test_needs_one_restart(self):
        with pytest.raises(InvalidInput):
            hill_climb_restarts(random_matrix(5, 6), restarts=0)
