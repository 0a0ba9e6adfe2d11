"""Lossless encoding of families of finite T0-topologies in one weighted graph.

A finite T0-topology on a point set is the same thing as a partial order,
and the partial order is determined by any DAG whose transitive closure it
is (for Hasse diagrams, the covering relation).  A family of N such DAGs
over one shared vertex set is packed into a single simple undirected graph:

* each undirected edge carries the product of the primes assigned to the
  topologies containing it (a squarefree positive integer), and
* each vertex carries its dimension vector, where coordinate i is the
  length in edges of a longest directed chain starting at the vertex in
  DAG i.

Factoring an edge weight recovers which topologies the edge belongs to,
and comparing endpoint dimensions recovers its orientation in each one:
along any directed edge the origin's chain length strictly exceeds the
target's.  Hence ``decode(encode(family)) == family`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    AmbiguousOrientation,
    CyclicInput,
    DuplicatePrime,
    NotPrime,
    UnknownPrimeFactor,
)

Edge = tuple  # ordered pair (origin, target)


def is_prime(k: int) -> bool:
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


def first_primes(n: int) -> tuple[int, ...]:
    """The first n primes 2, 3, 5, ... (used for default assignments)."""
    out: list[int] = []
    k = 2
    while len(out) < n:
        if is_prime(k):
            out.append(k)
        k += 1
    return tuple(out)


def chain_lengths(vertices: Iterable, edges: Iterable[Edge]) -> dict:
    """Longest directed chain length (edge count) starting at each vertex.

    Raises CyclicInput if the edge set has a directed cycle.  Iterative
    three-colour DFS with memoisation.
    """
    succ: dict = {v: [] for v in vertices}
    for u, v in edges:
        succ[u].append(v)
    WHITE, GRAY, BLACK = 0, 1, 2
    colour = {v: WHITE for v in succ}
    length = {v: 0 for v in succ}
    for start in succ:
        if colour[start] != WHITE:
            continue
        stack = [(start, iter(succ[start]))]
        colour[start] = GRAY
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if colour[nxt] == GRAY:
                    raise CyclicInput(f"directed cycle through {nxt!r}")
                if colour[nxt] == WHITE:
                    colour[nxt] = GRAY
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
                length[node] = max(length[node], 1 + length[nxt])
            if not advanced and stack and stack[-1][0] == node:
                # all successors done
                stack.pop()
                colour[node] = BLACK
                if stack:
                    parent = stack[-1][0]
                    length[parent] = max(length[parent], 1 + length[node])
    return length


@dataclass(frozen=True)
class TopologyFamily:
    """N DAGs on one finite vertex set, with one distinct prime per DAG."""

    vertex_ids: tuple
    dags: tuple[frozenset, ...]
    primes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertex_ids", tuple(self.vertex_ids))
        object.__setattr__(self, "dags", tuple(frozenset(d) for d in self.dags))
        object.__setattr__(self, "primes", tuple(self.primes))

    def validate(self) -> None:
        if len(self.primes) != len(self.dags):
            raise ValueError("one prime per topology required")
        if len(set(self.primes)) != len(self.primes):
            raise DuplicatePrime(f"primes collide: {self.primes}")
        for p in self.primes:
            if not is_prime(p):
                raise NotPrime(f"{p} is not prime")
        vset = set(self.vertex_ids)
        for i, dag in enumerate(self.dags):
            for u, v in dag:
                if u not in vset or v not in vset:
                    raise ValueError(f"edge ({u!r},{v!r}) of topology {i} leaves the vertex set")
            chain_lengths(self.vertex_ids, dag)  # raises CyclicInput


@dataclass(frozen=True)
class WeightedMultiGraph:
    """The lossless encoding: simple undirected graph with prime-product edge
    weights and per-vertex dimension vectors."""

    vertices: tuple
    edges: frozenset  # of frozenset({u, v})
    w: Mapping  # frozenset({u, v}) -> positive squarefree int
    d: Mapping  # vertex -> tuple of N ints

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))

    def dimension(self, v, i: int) -> int:
        return self.d[v][i]


def encode(family: TopologyFamily) -> WeightedMultiGraph:
    """Pack a validated family into a single weighted graph.

    Edge weights are products of the primes of the topologies containing
    the edge (undirected).  Dimensions are longest-chain edge counts, so
    minimal elements get 0, and vertices untouched by a DAG get 0 too.
    """
    family.validate()
    weights: dict = {}
    for prime, dag in zip(family.primes, family.dags):
        for u, v in dag:
            e = frozenset((u, v))
            weights[e] = weights.get(e, 1) * prime
    dims = {v: [] for v in family.vertex_ids}
    for dag in family.dags:
        lengths = chain_lengths(family.vertex_ids, dag)
        for v in family.vertex_ids:
            dims[v].append(lengths[v])
    return WeightedMultiGraph(
        vertices=family.vertex_ids,
        edges=frozenset(weights),
        w=weights,
        d={v: tuple(ds) for v, ds in dims.items()},
    )


def decode(g: WeightedMultiGraph, primes: Sequence[int]) -> TopologyFamily:
    """Recover the exact original family from its weighted-graph encoding.

    Each edge weight is divided once by every listed prime; any residue
    signals a factor outside the alphabet.  Orientation of edge e in
    topology i points from the endpoint with the larger dimension d_i to
    the smaller; equal dimensions cannot arise from a valid encoding.
    """
    primes = tuple(primes)
    if len(set(primes)) != len(primes):
        raise DuplicatePrime(f"primes collide: {primes}")
    dags: list[set] = [set() for _ in primes]
    for e in sorted(g.edges, key=lambda e: tuple(sorted(map(str, e)))):
        u, v = sorted(e, key=str)
        weight = g.w[e]
        residue = weight
        members = []
        for i, p in enumerate(primes):
            if residue % p == 0:
                members.append(i)
                residue //= p
        if residue != 1:
            raise UnknownPrimeFactor(
                f"edge {{{u!r},{v!r}}} has weight {weight} with factor {residue} outside {primes}"
            )
        for i in members:
            du, dv = g.d[u][i], g.d[v][i]
            if du == dv:
                raise AmbiguousOrientation(
                    f"edge {{{u!r},{v!r}}} in topology {i}: both endpoints have dimension {du}"
                )
            dags[i].add((u, v) if du > dv else (v, u))
    return TopologyFamily(
        vertex_ids=g.vertices,
        dags=tuple(frozenset(d) for d in dags),
        primes=primes,
    )
