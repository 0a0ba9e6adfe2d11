"""Weighted graph distances, subdominant ultrametric, and the dendrogram index.

The subdominant ultrametric of a metric d is the largest ultrametric below
it; on a finite set it equals the minimax path distance (minimise over
paths the maximum step) and the single-linkage merge heights.  Its balls
are nested or disjoint and form a rooted tree, the dendrogram, which is
the index structure used everywhere else in this package.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DisconnectedGraph
from .multitopo import WeightedMultiGraph


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative matrix with zero diagonal over labelled points."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        vals = np.asarray(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        return self.labels.index(label)

    def of(self, u, v) -> float:
        return float(self.values[self.index(u), self.index(v)])

    def check_metric(self, tol: float = 0.0) -> bool:
        v = self.values
        if v.shape != (self.n, self.n):
            return False
        if not np.allclose(v, v.T, rtol=0, atol=tol):
            return False
        if np.any(np.abs(np.diag(v)) > tol):
            return False
        for k in range(self.n):
            if np.any(v > np.add.outer(v[:, k], v[k, :]) + tol):
                return False
        return True


class UltrametricMatrix(DistanceMatrix):
    """A DistanceMatrix satisfying the strong triangle inequality."""

    def check_ultrametric(self, tol: float = 0.0) -> bool:
        v = self.values
        for k in range(self.n):
            if np.any(v > np.maximum.outer(v[:, k], v[k, :]) + tol):
                return False
        return True


def default_distance_weights(g: WeightedMultiGraph) -> dict:
    """Distance weight 1/log(w(e)+1): edges shared by more topologies are
    shorter, so strongly co-connected vertices cluster together."""
    return {e: 1.0 / math.log(g.w[e] + 1.0) for e in g.edges}


def graph_distances(graph, weights: Mapping | None = None) -> DistanceMatrix:
    """All-pairs shortest-path distances of an undirected weighted graph.

    ``graph`` is either a WeightedMultiGraph (weights default to the
    1/log(w+1) map unless given) or an iterable of vertex labels with an
    explicit ``weights`` mapping frozenset({u,v}) -> positive float.
    Raises DisconnectedGraph if any pair is unreachable.
    """
    if isinstance(graph, WeightedMultiGraph):
        vertices = graph.vertices
        if weights is None:
            weights = default_distance_weights(graph)
    else:
        vertices = tuple(graph)
        if weights is None:
            raise ValueError("explicit weights required for a plain vertex list")
    labels = tuple(sorted(vertices, key=str))
    pos = {v: i for i, v in enumerate(labels)}
    adj: list[list[tuple[int, float]]] = [[] for _ in labels]
    for e, wt in weights.items():
        u, v = tuple(e)
        if wt <= 0:
            raise ValueError(f"edge weight must be positive, got {wt} on {set(e)}")
        adj[pos[u]].append((pos[v], float(wt)))
        adj[pos[v]].append((pos[u], float(wt)))
    n = len(labels)
    out = np.full((n, n), np.inf)
    for s in range(n):
        dist = out[s]
        dist[s] = 0.0
        heap = [(0.0, s)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u]:
                continue
            for v, wt in adj[u]:
                alt = du + wt
                if alt < dist[v]:
                    dist[v] = alt
                    heapq.heappush(heap, (alt, v))
    if np.any(np.isinf(out)):
        raise DisconnectedGraph("graph is not connected")
    out = np.minimum(out, out.T)  # symmetrise against fp asymmetry
    return DistanceMatrix(labels, out)


def subdominant_ultrametric(d: DistanceMatrix) -> UltrametricMatrix:
    """Largest ultrametric pointwise below d.

    Single-linkage agglomeration: scanning pairs by increasing distance,
    two clusters merge at height d(i,j), and the merge height becomes the
    ultrametric value for every cross pair.  Equivalently the minimax
    path distance in the complete graph weighted by d.
    """
    n = d.n
    vals = d.values
    delta = np.zeros((n, n))
    parent = list(range(n))
    members: list[list[int]] = [[i] for i in range(n)]

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    pairs = sorted(
        ((vals[i, j], i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    for val, i, j in pairs:
        ri, rj = find(i), find(j)
        if ri == rj:
            continue
        if len(members[ri]) < len(members[rj]):
            ri, rj = rj, ri
        for a in members[ri]:
            for b in members[rj]:
                delta[a, b] = delta[b, a] = val
        members[ri].extend(members[rj])
        members[rj] = []
        parent[rj] = ri
    return UltrametricMatrix(d.labels, delta)


# --- dendrogram ---------------------------------------------------------------


@dataclass(eq=False)
class DendrogramNode:
    members: frozenset
    radius: float
    children: tuple = ()
    level: int = 0
    parent: "DendrogramNode | None" = field(default=None, repr=False)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def label(self):
        if not self.is_leaf:
            raise ValueError("only leaves carry a single label")
        return next(iter(self.members))

    def sort_key(self):
        return min(map(str, self.members))


class Dendrogram:
    """Rooted tree of the balls of an ultrametric.

    Leaves are singletons at radius 0; every internal node merges its
    children at its radius, and radii strictly decrease towards the
    leaves.  The root is at level 0.  Children are kept sorted by their
    smallest member label so that traversals are reproducible.
    """

    def __init__(self, root: DendrogramNode):
        self.root = root
        self._normalise(root)
        self.leaves: dict = {}
        self.nodes: tuple = tuple(self._walk(root))
        for node in self.nodes:
            if node.is_leaf:
                self.leaves[node.label] = node
        self.labels = tuple(sorted(self.leaves, key=str))
        self._validate()

    def _normalise(self, node: DendrogramNode, level: int = 0, parent=None):
        node.level = level
        node.parent = parent
        node.children = tuple(sorted(node.children, key=DendrogramNode.sort_key))
        for ch in node.children:
            self._normalise(ch, level + 1, node)

    def _walk(self, node):
        yield node
        for ch in node.children:
            yield from self._walk(ch)

    def _validate(self):
        for node in self.nodes:
            if node.is_leaf:
                if len(node.members) != 1:
                    raise ValueError("leaves must be singletons")
                continue
            if len(node.children) < 2:
                raise ValueError("internal nodes need at least two children")
            union = frozenset().union(*(c.members for c in node.children))
            if union != node.members:
                raise ValueError("children must partition the member set")
            total = sum(len(c.members) for c in node.children)
            if total != len(node.members):
                raise ValueError("children overlap")
            for c in node.children:
                if c.radius >= node.radius:
                    raise ValueError("radii must strictly decrease towards the leaves")

    # -- queries ---------------------------------------------------------

    def internal_nodes(self) -> tuple:
        return tuple(n for n in self.nodes if not n.is_leaf)

    @property
    def max_level(self) -> int:
        return max(n.level for n in self.nodes)

    def lca(self, u, v) -> DendrogramNode:
        a, b = self.leaves[u], self.leaves[v]
        while a.level > b.level:
            a = a.parent
        while b.level > a.level:
            b = b.parent
        while a is not b:
            a, b = a.parent, b.parent
        return a

    def delta(self, u, v) -> float:
        if u == v:
            return 0.0
        return self.lca(u, v).radius

    def delta_matrix(self) -> UltrametricMatrix:
        n = len(self.labels)
        pos = {l: i for i, l in enumerate(self.labels)}
        vals = np.zeros((n, n))
        for node in self.internal_nodes():
            kids = [sorted(pos[l] for l in c.members) for c in node.children]
            for i in range(len(kids)):
                for j in range(i + 1, len(kids)):
                    for a in kids[i]:
                        for b in kids[j]:
                            vals[a, b] = vals[b, a] = node.radius
        return UltrametricMatrix(self.labels, vals)

    def branching(self) -> int:
        internal = self.internal_nodes()
        return max((len(n.children) for n in internal), default=1)


def build_dendrogram(delta: UltrametricMatrix) -> Dendrogram:
    """Tree of the distinct balls of an ultrametric.

    Clusters merging at equal heights join a single polytomous node, so
    the nodes are exactly the distinct balls and merge radii strictly
    decrease root-to-leaf.
    """
    labels = delta.labels
    n = len(labels)
    vals = delta.values
    cluster: dict[int, DendrogramNode] = {
        i: DendrogramNode(frozenset([labels[i]]), 0.0) for i in range(n)
    }
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    levels = sorted({float(vals[i, j]) for i in range(n) for j in range(i + 1, n)})
    for r in levels:
        if r <= 0:
            raise ValueError("distinct points at ultrametric distance 0")
        merged: dict[int, list[DendrogramNode]] = {}
        for i in range(n):
            for j in range(i + 1, n):
                if float(vals[i, j]) != r:
                    continue
                ri, rj = find(i), find(j)
                if ri == rj:
                    continue
                group = merged.pop(ri, [cluster[ri]]) + merged.pop(rj, [cluster[rj]])
                parent[rj] = ri
                merged[ri] = group
        for root, group in merged.items():
            node = DendrogramNode(
                members=frozenset().union(*(g.members for g in group)),
                radius=r,
                children=tuple(group),
            )
            cluster[root] = node
    roots = {find(i) for i in range(n)}
    if len(roots) != 1:
        raise ValueError("ultrametric matrix did not merge into a single root")
    return Dendrogram(cluster[roots.pop()])


def minimal_cluster(dend: Dendrogram, x) -> frozenset:
    """Smallest non-singleton ball containing leaf x: the member set of its
    parent node.  A single-vertex tree degenerately returns {x}."""
    leaf = dend.leaves[x]
    if leaf.parent is None:
        return leaf.members
    return leaf.parent.members
