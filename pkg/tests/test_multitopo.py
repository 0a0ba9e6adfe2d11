"""Encoding/decoding of topology families.

Oracle for dimensions: exhaustive enumeration of all directed paths.
"""

import numpy as np
import pytest

from ultraheat import TopologyFamily, WeightedMultiGraph, decode, encode
from ultraheat.errors import (
    AmbiguousOrientation,
    CyclicInput,
    DuplicatePrime,
    NotPrime,
    UnknownPrimeFactor,
)
from ultraheat.multitopo import chain_lengths, first_primes

from conftest import random_family


def longest_path_by_enumeration(vertices, edges, start):
    """Walk every directed path from start; exponential, oracle-only."""
    succ = {v: [] for v in vertices}
    for u, v in edges:
        succ[u].append(v)
    best = 0
    stack = [(start, 0)]
    while stack:
        node, depth = stack.pop()
        best = max(best, depth)
        for nxt in succ[node]:
            stack.append((nxt, depth + 1))
    return best


def worked_family():
    return TopologyFamily(
        ("a", "b", "c"),
        (frozenset({("a", "b")}), frozenset({("a", "b"), ("b", "c")})),
        (2, 3),
    )


def test_encode_worked_example():
    g = encode(worked_family())
    assert g.w[frozenset(("a", "b"))] == 6
    assert g.w[frozenset(("b", "c"))] == 3
    assert g.d["a"] == (1, 2)
    assert g.d["b"] == (0, 1)
    assert g.d["c"] == (0, 0)


def test_encode_empty_dag():
    fam = TopologyFamily(("a",), (frozenset(),), (2,))
    g = encode(fam)
    assert g.edges == frozenset()
    assert g.d["a"] == (0,)


def test_encode_rejects_two_cycle():
    fam = TopologyFamily(("a", "b"), (frozenset({("a", "b"), ("b", "a")}),), (2,))
    with pytest.raises(CyclicInput):
        encode(fam)


def test_encode_rejects_duplicate_primes():
    fam = TopologyFamily(("a", "b"), (frozenset(), frozenset()), (3, 3))
    with pytest.raises(DuplicatePrime):
        encode(fam)


def test_encode_rejects_composite_label():
    fam = TopologyFamily(("a",), (frozenset(),), (4,))
    with pytest.raises(NotPrime):
        encode(fam)


def test_decode_worked_example_roundtrip():
    fam = worked_family()
    recovered = decode(encode(fam), fam.primes)
    assert recovered.dags == fam.dags
    assert recovered.vertex_ids == fam.vertex_ids


def test_decode_unknown_prime_factor():
    g = WeightedMultiGraph(
        ("a", "b"),
        frozenset({frozenset(("a", "b"))}),
        {frozenset(("a", "b")): 5},
        {"a": (0,), "b": (0,)},
    )
    with pytest.raises(UnknownPrimeFactor):
        decode(g, (2, 3))


def test_decode_ambiguous_orientation():
    g = WeightedMultiGraph(
        ("a", "b"),
        frozenset({frozenset(("a", "b"))}),
        {frozenset(("a", "b")): 2},
        {"a": (1,), "b": (1,)},
    )
    with pytest.raises(AmbiguousOrientation):
        decode(g, (2,))


def test_roundtrip_property_random_families():
    rng = np.random.default_rng(101)
    for _ in range(100):
        fam = random_family(rng)
        recovered = decode(encode(fam), fam.primes)
        assert recovered.dags == fam.dags
        assert recovered.vertex_ids == fam.vertex_ids
        assert recovered.primes == fam.primes


def test_weights_are_squarefree_products_of_assigned_primes():
    rng = np.random.default_rng(17)
    for _ in range(30):
        fam = random_family(rng, max_vertices=15)
        g = encode(fam)
        for e in g.edges:
            w = g.w[e]
            for p in fam.primes:
                assert w % (p * p) != 0
                while w % p == 0:
                    w //= p
            assert w == 1


def test_dimension_matches_path_enumeration():
    rng = np.random.default_rng(23)
    for _ in range(40):
        n = int(rng.integers(2, 13))
        labels = tuple(f"v{i}" for i in range(n))
        order = list(labels)
        rng.shuffle(order)
        edges = set()
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.25:
                    edges.add((order[i], order[j]))
        lengths = chain_lengths(labels, edges)
        for v in labels:
            assert lengths[v] == longest_path_by_enumeration(labels, edges, v)


def test_first_primes():
    assert first_primes(6) == (2, 3, 5, 7, 11, 13)
