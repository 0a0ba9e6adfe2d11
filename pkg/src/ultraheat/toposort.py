"""Cluster-parallel topological sorting over a dendrogram index.

Minimal clusters (the smallest non-singleton balls of the index) are
sorted independently, then merged pairwise: the merged order is a Kahn
sort of the union's original edges plus the chain of each cluster's
order.  A deterministic binary reduction over clusters ordered by their
smallest member makes the result independent of physical parallelism.

Locally valid cluster orders can still be globally incompatible (the
chains may close a cycle against edges through outside vertices); the
pairwise merge surfaces that as CycleDetected, while the full pipeline
falls back to re-sorting the union from scratch so that its output is
always a linear extension of an acyclic input.
"""

from __future__ import annotations

import heapq
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import CycleDetected
from .ultraindex import Dendrogram, minimal_cluster


@dataclass(frozen=True)
class Dag:
    vertices: tuple
    edges: frozenset
    adj: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        succ: dict = {v: [] for v in self.vertices}
        for u, v in self.edges:
            if u not in succ or v not in succ:
                raise ValueError(f"edge ({u!r},{v!r}) leaves the vertex set")
            succ[u].append(v)
        object.__setattr__(self, "adj", {u: tuple(sorted(vs, key=str)) for u, vs in succ.items()})

    def restricted_edges(self, members) -> list[tuple]:
        mset = members if isinstance(members, (set, frozenset)) else set(members)
        out = []
        for u in mset:
            for v in self.adj.get(u, ()):
                if v in mset:
                    out.append((u, v))
        return out


@dataclass(frozen=True)
class SortedCluster:
    members: frozenset
    order: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        object.__setattr__(self, "order", tuple(self.order))


class ClusterRelation(Enum):
    DISJOINT = "disjoint"
    LEFT_INSIDE_RIGHT = "left_inside_right"
    RIGHT_INSIDE_LEFT = "right_inside_left"
    EQUAL = "equal"


def _kahn(vertices: Iterable, edges: Iterable[tuple]) -> tuple:
    """Kahn's algorithm with the smallest-label tie break."""
    verts = list(vertices)
    indeg = {v: 0 for v in verts}
    succ: dict = {v: [] for v in verts}
    for u, v in edges:
        succ[u].append(v)
        indeg[v] += 1
    heap = [v for v in verts if indeg[v] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        u = heapq.heappop(heap)
        out.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    if len(out) != len(verts):
        raise CycleDetected(f"{len(verts) - len(out)} vertices stuck on a cycle")
    return tuple(out)


def kahn_sort(dag: Dag, members=None) -> tuple:
    """Linear extension of the DAG (restricted to ``members`` if given)."""
    if members is None:
        return _kahn(dag.vertices, dag.edges)
    mset = frozenset(members)
    return _kahn(mset, dag.restricted_edges(mset))


def transitive_reduction(vertices: Iterable, edges: Iterable[tuple]) -> set:
    """Drop edges implied by longer paths.  Input must be acyclic."""
    verts = list(vertices)
    succ: dict = {v: set() for v in verts}
    for u, v in edges:
        succ[u].add(v)

    def reachable(src, banned_direct: set) -> set:
        seen = set()
        stack = [w for w in succ[src] if w not in banned_direct]
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            stack.extend(succ[w])
        return seen

    kept = set()
    for u in verts:
        direct = succ[u]
        if not direct:
            continue
        via = set()
        for w in direct:
            via |= reachable(w, set())
        for v in direct:
            if v not in via:
                kept.add((u, v))
    return kept


def cluster_sort(dend: Dendrogram, dag: Dag, x) -> SortedCluster:
    """Sort the minimal cluster of x under the DAG's restriction."""
    members = minimal_cluster(dend, x)
    return SortedCluster(members, kahn_sort(dag, members))


def compare_clusters(dend: Dendrogram, x, y) -> ClusterRelation:
    """Relate the minimal clusters of two vertices by two membership tests.

    Balls are nested or disjoint, so x in U(y) already implies
    U(x) <= U(y); the four outcomes are exhaustive and exclusive.
    """
    if x == y:
        raise ValueError("compare_clusters needs two distinct vertices")
    ux = minimal_cluster(dend, x)
    uy = minimal_cluster(dend, y)
    x_in_uy = x in uy
    y_in_ux = y in ux
    if x_in_uy and y_in_ux:
        return ClusterRelation.EQUAL
    if x_in_uy:
        return ClusterRelation.LEFT_INSIDE_RIGHT
    if y_in_ux:
        return ClusterRelation.RIGHT_INSIDE_LEFT
    return ClusterRelation.DISJOINT


def merge_sorted_clusters(
    dag: Dag, left: SortedCluster, right: SortedCluster, *, reduce: bool = True
) -> SortedCluster:
    """Kahn sort of the union under original edges plus both order chains.

    Chains are the successive-pair edges of each cluster's order.  When
    the chains conflict with original edges across the clusters the
    combined relation is cyclic and CycleDetected is raised; the local
    orders were incompatible and the caller decides how to recover.

    The transitive reduction requested by ``reduce`` never changes the
    Kahn output (availability of a vertex depends only on which
    predecessors are done, which redundant edges cannot alter); bulk
    callers disable it for speed.
    """
    if left.members == right.members:
        raise ValueError("merge requires two distinct clusters")
    union = left.members | right.members
    combined = set(dag.restricted_edges(union))
    for cluster in (left, right):
        combined.update(zip(cluster.order, cluster.order[1:]))
    order = _kahn(union, combined)  # raises CycleDetected on conflict
    if reduce:
        order = _kahn(union, transitive_reduction(union, combined))
    return SortedCluster(union, order)


def _resort(dag: Dag, members: frozenset) -> SortedCluster:
    return SortedCluster(members, kahn_sort(dag, members))


def _merge_or_resort(dag: Dag, left: SortedCluster, right: SortedCluster) -> SortedCluster:
    try:
        return merge_sorted_clusters(dag, left, right, reduce=False)
    except CycleDetected:
        # Incompatible local orders on an acyclic restriction: discard the
        # chains and sort the union directly.  A genuine input cycle makes
        # this re-sort raise again, so cyclic inputs still surface.
        return _resort(dag, left.members | right.members)


def parallel_toposort(dag: Dag, dend: Dendrogram, seeds: Sequence, parallelism: int = 1) -> tuple:
    """Sort minimal clusters of all seeds concurrently, then merge them by a
    deterministic binary reduction until one cluster covers the vertex set.

    The output is a linear extension of the DAG, identical for any
    parallelism level.  With a trivial index (the only non-singleton ball
    is the whole set) this degenerates to a plain Kahn sort.
    """
    if not seeds:
        raise ValueError("at least one seed vertex required")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    root = dend.root
    if root.is_leaf or all(c.is_leaf for c in root.children):
        return kahn_sort(dag)

    pool = ThreadPoolExecutor(max_workers=parallelism) if parallelism > 1 else None
    try:

        def run_all(fn, jobs):
            if pool is None or len(jobs) <= 1:
                return [fn(*job) for job in jobs]
            return [f.result() for f in [pool.submit(fn, *job) for job in jobs]]

        sorted_clusters = run_all(lambda x: cluster_sort(dend, dag, x), [(x,) for x in seeds])

        clusters: list[SortedCluster] = []
        seen: set[frozenset] = set()
        for sc in sorted_clusters:
            if sc.members not in seen:
                seen.add(sc.members)
                clusters.append(sc)
        covered = frozenset().union(*(c.members for c in clusters))
        for v in sorted((set(dag.vertices) - covered), key=str):
            clusters.append(SortedCluster(frozenset([v]), (v,)))

        while len(clusters) > 1:
            clusters.sort(key=lambda c: min(map(str, c.members)))
            jobs = []
            for i in range(0, len(clusters) - 1, 2):
                jobs.append((dag, clusters[i], clusters[i + 1]))
            merged = run_all(_merge_or_resort, jobs)
            if len(clusters) % 2 == 1:
                merged.append(clusters[-1])
            # merging nested clusters can produce coinciding unions
            seen = set()
            clusters = []
            for sc in merged:
                if sc.members not in seen:
                    seen.add(sc.members)
                    clusters.append(sc)
        return clusters[0].order
    finally:
        if pool is not None:
            pool.shutdown(wait=False)
