"""Quartet topologies, quartet costs and the normalized tree benefit score S(T).

A quartet's consistent pairing is read off the unit-edge leaf distances of the
tree: the pairing with the smallest summed path length is the one whose two
paths do not cross, and it beats both alternatives by at least 2.
"""
import itertools
import logging
import math
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from ncdtree.core.exceptions import InvalidInput
from ncdtree.models.cluster_tree import ClusterTree
from ncdtree.models.distance_matrix import DistanceMatrix
from ncdtree.schemas.tree import PAIRINGS, QuartetTopology, TreeScore

logger = logging.getLogger(__name__)


def count_quartets(n: int) -> int:
    if n < 4:
        raise InvalidInput(f"quartets need at least 4 objects, got {n}", details={"n": n})
    return math.comb(n, 4)


@lru_cache(maxsize=8)
def quartet_index(n: int) -> np.ndarray:
    """(C(n,4), 4) array of index quadruples i < j < k < l in lexicographic order."""
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), 4)),
        dtype=np.int64,
        count=4 * count_quartets(n),
    )
    quads = flat.reshape(-1, 4)
    quads.setflags(write=False)
    return quads


def pairing_sums(d: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """(3, Q) array: for each quartet, d(pair1) + d(pair2) of the three pairings."""
    columns = [quads[:, i] for i in range(4)]
    return np.stack([
        d[columns[a], columns[b]] + d[columns[c], columns[e]]
        for (a, b), (c, e) in PAIRINGS
    ])


def consistent_topology(tree: ClusterTree, labels: Sequence[str]) -> QuartetTopology:
    labels = tuple(labels)
    if len(labels) != 4 or len(set(labels)) != 4:
        raise InvalidInput(f"a quartet needs four distinct labels, got {labels}")
    paths = tree.leaf_distances(order=labels)
    sums = [paths[a, b] + paths[c, d] for (a, b), (c, d) in PAIRINGS]
    return QuartetTopology.from_pairing(labels, int(np.argmin(sums)))


def quartet_cost(matrix: DistanceMatrix, top: QuartetTopology) -> float:
    """C_{uv|wx} = d(u, v) + d(w, x)."""
    return matrix.distance(*top.pair1) + matrix.distance(*top.pair2)


class QuartetScorer:
    """Scores trees against one matrix; the per-quartet costs are computed once."""

    def __init__(self, matrix: DistanceMatrix):
        count_quartets(matrix.size)
        self.matrix = matrix
        self.labels = list(matrix.labels)
        self.quads = quartet_index(matrix.size)
        self.costs = pairing_sums(matrix.values, self.quads)
        self.m = math.fsum(self.costs.min(axis=0))
        self.M = math.fsum(self.costs.max(axis=0))
        self._columns = np.arange(self.costs.shape[1])

    def consistent_pairings(self, tree: ClusterTree) -> np.ndarray:
        """Index into PAIRINGS of the consistent topology of every quartet."""
        if tree.n_leaves != len(self.labels) or set(tree.labels) != set(self.labels):
            raise InvalidInput(
                "tree leaves do not match the matrix labels",
                details={"tree": sorted(tree.labels), "matrix": sorted(self.labels)},
            )
        paths = tree.leaf_distances(order=self.labels)
        return np.argmin(pairing_sums(paths, self.quads), axis=0)

    def score(self, tree: ClusterTree) -> TreeScore:
        choice = self.consistent_pairings(tree)
        c_t = math.fsum(self.costs[choice, self._columns])
        return TreeScore.from_costs(c_t, self.m, self.M)


def score(tree: ClusterTree, matrix: DistanceMatrix) -> TreeScore:
    return QuartetScorer(matrix).score(tree)


def quartet_topologies(tree: ClusterTree, labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """Consistent pairing per quartet, quartets taken over ``labels`` (sorted by default)."""
    order = sorted(tree.labels) if labels is None else list(labels)
    paths = tree.leaf_distances(order=order)
    return np.argmin(pairing_sums(paths, quartet_index(len(order))), axis=0).astype(np.int8)


def quartet_agreement(first: ClusterTree, second: ClusterTree) -> float:
    """Fraction of quartets whose consistent topology is the same in both trees."""
    if set(first.labels) != set(second.labels):
        raise InvalidInput("trees must have the same leaf labels to be compared")
    order = sorted(first.labels)
    same = quartet_topologies(first, order) == quartet_topologies(second, order)
    return float(np.mean(same))


def export(tree: ClusterTree, format: str = "dot") -> str:
    """Serialize ``tree`` as Graphviz DOT or Newick text."""
    if format == "dot":
        return tree.to_dot()
    if format == "newick":
        return tree.to_newick()
    raise InvalidInput(f"unknown tree format {format!r}; choose dot or newick")


def parse_dot(text: str) -> ClusterTree:
    return ClusterTree.from_dot(text)

