"""Unrooted ternary cluster tree.

Nodes are integers 0 .. 2n-3. Nodes 0 .. n-1 are leaves, node ``i`` carrying
``labels[i]``; nodes n .. 2n-3 are internal and are named ``n0``, ``n1``, ...
Every leaf has degree 1 and every internal node degree 3.
"""
import re
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ncdtree.core.exceptions import InvalidInput, TreeInvariantError

Edge = Tuple[int, int]


class ClusterTree:
    """Unrooted tree with n labeled leaves and n-2 internal nodes of degree 3."""

    def __init__(self, labels: Sequence[str], edges: Iterable[Edge]):
        if len(labels) < 4:
            raise InvalidInput(f"a cluster tree needs at least 4 leaves, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise InvalidInput("leaf labels must be unique")
        self.labels: List[str] = list(labels)
        self.adjacency: List[List[int]] = [[] for _ in range(2 * len(labels) - 2)]
        for u, v in edges:
            self.connect(u, v)

    # Shape

    @property
    def n_leaves(self) -> int:
        return len(self.labels)

    @property
    def node_count(self) -> int:
        return len(self.adjacency)

    @property
    def internal_nodes(self) -> range:
        return range(self.n_leaves, self.node_count)

    def is_leaf(self, node: int) -> bool:
        return node < self.n_leaves

    def node_name(self, node: int) -> str:
        if self.is_leaf(node):
            return self.labels[node]
        return f"n{node - self.n_leaves}"

    def leaf_index(self) -> Dict[str, int]:
        return {label: node for node, label in enumerate(self.labels)}

    def leaf_node(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidInput(f"unknown leaf label {label!r}", details={"label": label})

    def edges(self) -> List[Edge]:
        return sorted((u, v) for u in range(self.node_count) for v in self.adjacency[u] if u < v)

    # Mutation primitives

    def connect(self, u: int, v: int) -> None:
        self.adjacency[u].append(v)
        self.adjacency[v].append(u)

    def disconnect(self, u: int, v: int) -> None:
        self.adjacency[u].remove(v)
        self.adjacency[v].remove(u)

    def swap_labels(self, a: int, b: int) -> None:
        self.labels[a], self.labels[b] = self.labels[b], self.labels[a]

    def copy(self) -> "ClusterTree":
        clone = ClusterTree.__new__(ClusterTree)
        clone.labels = list(self.labels)
        clone.adjacency = [list(neighbors) for neighbors in self.adjacency]
        return clone

    def validate(self) -> None:
        """Raise TreeInvariantError unless the tree is a valid ternary tree."""
        n = self.n_leaves
        if self.node_count != 2 * n - 2:
            raise TreeInvariantError(f"expected {2 * n - 2} nodes, found {self.node_count}")
        for node, neighbors in enumerate(self.adjacency):
            expected = 1 if self.is_leaf(node) else 3
            if len(neighbors) != expected:
                raise TreeInvariantError(
                    f"node {self.node_name(node)} has degree {len(neighbors)}, expected {expected}"
                )
            if len(set(neighbors)) != len(neighbors) or node in neighbors:
                raise TreeInvariantError(f"node {self.node_name(node)} has a repeated or self edge")
        edge_count = sum(len(neighbors) for neighbors in self.adjacency) // 2
        if edge_count != self.node_count - 1:
            raise TreeInvariantError(f"expected {self.node_count - 1} edges, found {edge_count}")
        if len(self.rooted_order(0)[1]) != self.node_count:
            raise TreeInvariantError("tree is not connected")

    # Traversal

    def rooted_order(self, root: int) -> Tuple[List[int], List[int]]:
        """Parent array (-1 at the root) and breadth-first order from ``root``."""
        parent = [-1] * self.node_count
        seen = [False] * self.node_count
        seen[root] = True
        order = [root]
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nxt in self.adjacency[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    parent[nxt] = node
                    order.append(nxt)
                    queue.append(nxt)
        return parent, order

    def path(self, u: int, v: int) -> List[int]:
        """Node sequence of the unique path from ``u`` to ``v``."""
        parent, _ = self.rooted_order(u)
        nodes = [v]
        while nodes[-1] != u:
            nodes.append(parent[nodes[-1]])
        return nodes[::-1]

    def side_nodes(self, node: int, away_from: int) -> Set[int]:
        """Nodes reachable from ``node`` without crossing the edge to ``away_from``."""
        seen = {node, away_from}
        stack = [node]
        while stack:
            current = stack.pop()
            for nxt in self.adjacency[current]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        seen.discard(away_from)
        return seen

    def leaf_distances(self, order: Optional[Sequence[str]] = None) -> np.ndarray:
        """Edge-count path lengths between leaves, rows/columns in ``order``."""
        if order is None:
            nodes = list(range(self.n_leaves))
        else:
            index = self.leaf_index()
            try:
                nodes = [index[label] for label in order]
            except KeyError as exc:
                raise InvalidInput(f"unknown leaf label {exc.args[0]!r}")
        rows, cols = zip(*self.edges())
        graph = csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.node_count, self.node_count)
        )
        dist = shortest_path(graph, directed=False, unweighted=True, indices=nodes)
        return dist[:, nodes].astype(np.int64)

    # Bipartitions

    def splits(self) -> Set[FrozenSet[str]]:
        """Leaf bipartitions induced by every edge, each as the side without the smallest label."""
        anchor = min(self.labels)
        everything = frozenset(self.labels)
        parent, order = self.rooted_order(0)
        below: List[FrozenSet[str]] = [frozenset()] * self.node_count
        for node in reversed(order):
            if self.is_leaf(node):
                below[node] = frozenset((self.labels[node],))
            else:
                below[node] = frozenset().union(
                    *(below[child] for child in self.adjacency[node] if child != parent[node])
                )
        result = set()
        for node in order[1:]:
            side = below[node]
            result.add(everything - side if anchor in side else side)
        return result

    def forms_clade(self, labels: Iterable[str]) -> bool:
        """True if some edge separates exactly ``labels`` from the other leaves."""
        group = frozenset(labels)
        anchor = min(self.labels)
        if anchor in group:
            group = frozenset(self.labels) - group
        return group in self.splits()

    def topology_key(self) -> FrozenSet[FrozenSet[str]]:
        return frozenset(self.splits())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterTree):
            return NotImplemented
        return set(self.labels) == set(other.labels) and self.topology_key() == other.topology_key()

    def __hash__(self) -> int:
        return hash(self.topology_key())

    def __repr__(self) -> str:
        return f"ClusterTree(leaves={self.n_leaves}, nodes={self.node_count})"

    # Text formats

    def to_dot(self) -> str:
        lines = ["graph tree {"]
        for node in range(self.node_count):
            name = _dot_escape(self.node_name(node))
            shape = "box" if self.is_leaf(node) else "ellipse"
            lines.append(f'  v{node} [label="{name}", shape={shape}];')
        for u, v in self.edges():
            lines.append(f"  v{u} -- v{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_newick(self) -> str:
        root = self.n_leaves
        parent, order = self.rooted_order(root)
        text: Dict[int, str] = {}
        for node in reversed(order):
            if self.is_leaf(node):
                text[node] = _newick_quote(self.labels[node])
            else:
                children = sorted(c for c in self.adjacency[node] if c != parent[node])
                text[node] = "(" + ",".join(text[c] for c in children) + ")" + self.node_name(node)
        return "[rooted at n0 for presentation only; the tree is unrooted]\n" + text[root] + ";\n"

    @classmethod
    def from_dot(cls, text: str) -> "ClusterTree":
        names: Dict[int, str] = {}
        edges: List[Edge] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("graph") or line == "}":
                continue
            node_match = _DOT_NODE.match(line)
            edge_match = _DOT_EDGE.match(line)
            if node_match:
                names[int(node_match.group(1))] = _dot_unescape(node_match.group(2))
            elif edge_match:
                edges.append((int(edge_match.group(1)), int(edge_match.group(2))))
            else:
                raise InvalidInput(f"unrecognised DOT line {lineno}: {raw!r}", details={"line": lineno})
        n = (len(names) + 2) // 2
        if sorted(names) != list(range(len(names))) or len(names) != 2 * n - 2:
            raise InvalidInput("DOT graph does not describe a ternary tree's node set")
        if any(u not in names or v not in names for u, v in edges):
            raise InvalidInput("DOT edge refers to an undeclared node")
        tree = cls([names[i] for i in range(n)], edges)
        try:
            tree.validate()
        except TreeInvariantError as e:
            raise InvalidInput(f"DOT graph is not a ternary tree: {e.message}")
        return tree


_DOT_NODE = re.compile(r'^v(\d+) \[label="((?:[^"\\]|\\.)*)", shape=\w+\];$')
_DOT_EDGE = re.compile(r"^v(\d+) -- v(\d+);$")
_NEWICK_SPECIAL = set("()[]:;,'")


def _dot_escape(name: str) -> str:
    return name.replace("\\", "\\\\").replace('"', '\\"')


def _dot_unescape(name: str) -> str:
    return re.sub(r"\\(.)", r"\1", name)


def _newick_quote(label: str) -> str:
    if any(ch in _NEWICK_SPECIAL for ch in label):
        return "'" + label.replace("'", "''") + "'"
    return label
