"""Randomized hill climbing over unrooted ternary trees.

A candidate is produced from the best tree so far by a full mutation: k simple
mutations with P(k) = 2^-k, each a leaf swap, subtree swap or subtree
transfer picked with equal probability. Candidates are kept only when they
score strictly higher.
"""
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ncdtree.core.config import settings
from ncdtree.core.exceptions import InvalidInput
from ncdtree.core.rng import make_rng, spawn_rngs
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.search import HaltReason, RestartRun, RestartSummary, SearchConfig, SearchTrace
from ncdtree.schemas.tree import TreeScore
from ncdtree.services.quartet_service import QuartetScorer, quartet_agreement

logger = logging.getLogger(__name__)


class MutationStats:
    """Counters kept by one climber."""

    def __init__(self):
        self.applied: Dict[str, int] = {"leaf_swap": 0, "subtree_swap": 0, "subtree_transfer": 0}
        self.noops = 0


def random_tree(labels: Sequence[str], rng: np.random.Generator) -> ClusterTree:
    """Uniformly random labeled tree by sequential leaf insertion."""
    labels = list(labels)
    n = len(labels)
    if n < 4:
        raise InvalidInput(f"a cluster tree needs at least 4 leaves, got {n}", details={"n": n})
    order = [int(leaf) for leaf in rng.permutation(n)]
    a, b = n, n + 1
    edges = [(order[0], a), (order[1], a), (a, b), (order[2], b), (order[3], b)]
    for step in range(4, n):
        fresh = n + step - 2
        chosen = int(rng.integers(len(edges)))
        u, v = edges[chosen]
        edges[chosen] = (u, fresh)
        edges.append((fresh, v))
        edges.append((fresh, order[step]))
    return ClusterTree(labels, edges)


def _reference_root(tree: ClusterTree) -> int:
    # neighbor of the leaf with the smallest label
    return tree.adjacency[tree.leaf_node(min(tree.labels))][0]


def _is_ancestor(parent: List[int], ancestor: int, node: int) -> bool:
    while node != -1:
        if node == ancestor:
            return True
        node = parent[node]
    return False


def mutate_leaf_swap(tree: ClusterTree, rng: np.random.Generator, stats: Optional[MutationStats] = None) -> ClusterTree:
    """Exchange the labels of two random leaves; the input tree is not modified."""
    mutated = tree.copy()
    a, b = rng.choice(tree.n_leaves, size=2, replace=False)
    mutated.swap_labels(int(a), int(b))
    if stats is not None:
        stats.applied["leaf_swap"] += 1
    return mutated


def mutate_subtree_swap(
    tree: ClusterTree,
    rng: np.random.Generator,
    stats: Optional[MutationStats] = None,
    attempts: Optional[int] = None,
) -> ClusterTree:
    """Exchange the subtrees below two internal nodes, neither an ancestor of the other."""
    attempts = attempts or settings.SUBTREE_SWAP_ATTEMPTS
    mutated = tree.copy()
    root = _reference_root(tree)
    parent, _ = tree.rooted_order(root)
    candidates = [node for node in tree.internal_nodes if node != root]
    if len(candidates) >= 2:
        for _ in range(attempts):
            i, j = rng.choice(len(candidates), size=2, replace=False)
            u, v = candidates[int(i)], candidates[int(j)]
            if _is_ancestor(parent, u, v) or _is_ancestor(parent, v, u):
                continue
            pu, pv = parent[u], parent[v]
            mutated.disconnect(pu, u)
            mutated.disconnect(pv, v)
            mutated.connect(pu, v)
            mutated.connect(pv, u)
            if stats is not None:
                stats.applied["subtree_swap"] += 1
            return mutated
    logger.debug("Subtree swap found no disjoint pair; tree left unchanged")
    if stats is not None:
        stats.noops += 1
    return mutated


def mutate_subtree_transfer(
    tree: ClusterTree, rng: np.random.Generator, stats: Optional[MutationStats] = None
) -> ClusterTree:
    """Detach a subtree, splice out its attachment node, and regraft it on a random edge."""
    mutated = tree.copy()
    root = _reference_root(tree)
    parent, _ = tree.rooted_order(root)
    movable = [node for node in range(tree.node_count) if node != root]
    subtree = movable[int(rng.integers(len(movable)))]
    joint = parent[subtree]
    detached = tree.side_nodes(subtree, away_from=joint)

    left, right = [nb for nb in mutated.adjacency[joint] if nb != subtree]
    mutated.disconnect(joint, left)
    mutated.disconnect(joint, right)
    mutated.connect(left, right)

    remainder = [
        (u, v) for u, v in mutated.edges()
        if u != joint and v != joint and u not in detached and v not in detached
    ]
    u, v = remainder[int(rng.integers(len(remainder)))]
    mutated.disconnect(u, v)
    mutated.connect(u, joint)
    mutated.connect(joint, v)
    if stats is not None:
        stats.applied["subtree_transfer"] += 1
    return mutated


SIMPLE_MUTATIONS: Tuple[Callable[..., ClusterTree], ...] = (
    mutate_leaf_swap,
    mutate_subtree_swap,
    mutate_subtree_transfer,
)


def sample_burst_size(rng: np.random.Generator, cap: Optional[int] = None) -> int:
    """k >= 1 with P(k) = 2^-k, capped."""
    cap = cap or settings.BURST_CAP
    return min(int(rng.geometric(0.5)), cap)


def full_mutation(
    tree: ClusterTree,
    rng: np.random.Generator,
    burst_cap: Optional[int] = None,
    stats: Optional[MutationStats] = None,
    check_invariants: bool = False,
) -> ClusterTree:
    current = tree
    for _ in range(sample_burst_size(rng, burst_cap)):
        mutation = SIMPLE_MUTATIONS[int(rng.integers(len(SIMPLE_MUTATIONS)))]
        current = mutation(current, rng, stats)
        if check_invariants:
            current.validate()
    return current


class _SharedBest:
    """Best (tree, score) seen by any climber; replaced only by a strictly better score."""

    def __init__(self, epsilon: float):
        self.epsilon = epsilon
        self.tree: Optional[ClusterTree] = None
        self.score: Optional[TreeScore] = None
        self._lock = threading.Lock()

    def publish(self, tree: ClusterTree, score: TreeScore) -> None:
        with self._lock:
            if self.score is None or score.S > self.score.S:
                self.tree = tree.copy()
                self.score = score

    def better_than(self, s: float) -> Optional[Tuple[ClusterTree, TreeScore]]:
        with self._lock:
            if self.score is not None and self.score.S > s:
                return self.tree.copy(), self.score
            return None

    def perfect(self) -> bool:
        with self._lock:
            return self.score is not None and self.score.is_perfect(self.epsilon)


def _climb(
    scorer: QuartetScorer,
    config: SearchConfig,
    rng: np.random.Generator,
    shared: Optional[_SharedBest] = None,
    name: str = "climber",
) -> Tuple[ClusterTree, TreeScore, SearchTrace]:
    started = time.monotonic()
    stats = MutationStats()
    trace = SearchTrace()
    best = random_tree(scorer.labels, rng)
    best_score = scorer.score(best)
    candidates = 1
    stale = 0
    trace.record(candidates, best_score.S)
    if shared is not None:
        shared.publish(best, best_score)

    while True:
        if shared is not None:
            adopted = shared.better_than(best_score.S)
            if adopted is not None:
                best, best_score = adopted
                stale = 0
                trace.record(candidates, best_score.S)
        if best_score.is_perfect(config.s_one_epsilon):
            halt = HaltReason.PERFECT
            break
        if stale >= config.max_stale:
            halt = HaltReason.STALE
            break
        if config.time_budget is not None and time.monotonic() - started >= config.time_budget:
            halt = HaltReason.TIME
            break

        candidate = full_mutation(best, rng, config.burst_cap, stats, config.check_invariants)
        candidates += 1
        candidate_score = scorer.score(candidate)
        if candidate_score.S > best_score.S:
            best, best_score = candidate, candidate_score
            stale = 0
            trace.record(candidates, best_score.S)
            logger.info(f"{name}: S(T)={best_score.S:.6f} after {candidates} candidates")
            if shared is not None:
                shared.publish(best, best_score)
        else:
            stale += 1
            if config.trace_every and candidates % config.trace_every == 0:
                trace.record(candidates, best_score.S)

    if trace.records[-1].candidates != candidates:
        trace.record(candidates, best_score.S)
    trace.best_tree = best
    trace.total_candidates = candidates
    trace.halt_reason = halt
    trace.noop_mutations = stats.noops
    logger.info(f"{name} halted ({halt.value}) at S(T)={best_score.S:.6f} after {candidates} candidates")
    return best, best_score, trace


def hill_climb(matrix: DistanceMatrix, config: Optional[SearchConfig] = None) -> Tuple[ClusterTree, TreeScore, SearchTrace]:
    config = config or SearchConfig()
    if matrix.size < 4:
        raise InvalidInput(f"tree search needs at least 4 objects, got {matrix.size}", details={"n": matrix.size})
    if not matrix.is_symmetric():
        raise InvalidInput(
            "tree search needs a symmetric matrix",
            details={"max_asymmetry": matrix.max_asymmetry()},
        )
    scorer = QuartetScorer(matrix)
    logger.info(f"Searching trees over {matrix.size} leaves (seed {config.seed}, {config.workers} workers)")
    if config.workers == 1:
        return _climb(scorer, config, make_rng(config.seed))

    shared = _SharedBest(config.s_one_epsilon)
    rngs = spawn_rngs(config.seed, config.workers)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        futures = [
            pool.submit(_climb, scorer, config, rng, shared, f"climber {i}")
            for i, rng in enumerate(rngs)
        ]
        results = [future.result() for future in futures]
    # first climber wins ties
    return max(results, key=lambda result: result[1].S)


def restart_seeds(seed: int, restarts: int) -> List[int]:
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(restarts, dtype=np.uint64)]


def hill_climb_restarts(
    matrix: DistanceMatrix, config: Optional[SearchConfig] = None, restarts: int = 2
) -> Tuple[ClusterTree, TreeScore, SearchTrace, RestartSummary]:
    """Independent searches on one matrix; returns the best run plus a stability summary."""
    config = config or SearchConfig()
    if restarts < 1:
        raise InvalidInput(f"restarts must be at least 1, got {restarts}")
    results = []
    summary = RestartSummary()
    for seed in restart_seeds(config.seed, restarts):
        tree, tree_score, trace = hill_climb(matrix, config.model_copy(update={"seed": seed}))
        results.append((tree, tree_score, trace))
        summary.runs.append(
            RestartRun(seed=seed, S=tree_score.S, halt_reason=trace.halt_reason, total_candidates=trace.total_candidates)
        )
    trees = [result[0] for result in results]
    summary.agreement = [
        [1.0 if i == j else quartet_agreement(trees[i], trees[j]) for j in range(restarts)]
        for i in range(restarts)
    ]
    summary.best_run = max(range(restarts), key=lambda i: results[i][1].S)
    tree, tree_score, trace = results[summary.best_run]
    return tree, tree_score, trace, summary
