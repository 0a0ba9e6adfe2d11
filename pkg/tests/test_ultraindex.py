"""Distances, subdominant ultrametric, dendrogram.

Oracles: minimax path distance by the all-intermediates dynamic program
and, on tiny instances, by enumerating every simple path.
"""

import itertools

import numpy as np
import pytest

from ultraheat import (
    DistanceMatrix,
    UltrametricMatrix,
    build_dendrogram,
    graph_distances,
    minimal_cluster,
    subdominant_ultrametric,
)
from ultraheat.errors import DisconnectedGraph
from ultraheat.serialize import dendrogram_from_obj, dendrogram_to_obj

from conftest import random_connected_weights, random_dendrogram, random_metric


def minimax_dp(values: np.ndarray) -> np.ndarray:
    """Floyd-Warshall over intermediate vertices with (max, min) algebra."""
    out = values.copy()
    n = out.shape[0]
    for k in range(n):
        through = np.maximum.outer(out[:, k], out[k, :])
        out = np.minimum(out, through)
    return out


def minimax_paths_brute(values: np.ndarray) -> np.ndarray:
    """Enumerate all simple paths; only feasible for tiny n."""
    n = values.shape[0]
    out = np.full_like(values, np.inf)
    np.fill_diagonal(out, 0.0)
    for s in range(n):
        stack = [(s, frozenset([s]), 0.0)]
        while stack:
            node, seen, peak = stack.pop()
            for nxt in range(n):
                if nxt in seen:
                    continue
                new_peak = max(peak, values[node, nxt])
                if new_peak < out[s, nxt]:
                    out[s, nxt] = new_peak
                stack.append((nxt, seen | {nxt}, new_peak))
    return out


def test_graph_distances_path():
    d = graph_distances(
        ("a", "b", "c"), {frozenset(("a", "b")): 1.0, frozenset(("b", "c")): 2.0}
    )
    assert d.of("a", "b") == 1.0
    assert d.of("b", "c") == 2.0
    assert d.of("a", "c") == 3.0


def test_graph_distances_single_vertex():
    d = graph_distances(("a",), {})
    assert d.values.shape == (1, 1)
    assert d.values[0, 0] == 0.0


def test_graph_distances_triangle():
    w = {frozenset(p): 1.0 for p in itertools.combinations("abc", 2)}
    d = graph_distances(("a", "b", "c"), w)
    off = d.values[~np.eye(3, dtype=bool)]
    assert np.all(off == 1.0)


def test_graph_distances_disconnected():
    with pytest.raises(DisconnectedGraph):
        graph_distances(("a", "b"), {})


def test_subdominant_path_example():
    d = graph_distances(
        ("a", "b", "c"), {frozenset(("a", "b")): 1.0, frozenset(("b", "c")): 2.0}
    )
    delta = subdominant_ultrametric(d)
    assert delta.of("a", "b") == 1.0
    assert delta.of("b", "c") == 2.0
    assert delta.of("a", "c") == 2.0


def test_subdominant_fixed_point_on_ultrametric():
    rng = np.random.default_rng(7)
    dend = random_dendrogram(rng, 12)
    delta = dend.delta_matrix()
    again = subdominant_ultrametric(delta)
    assert np.array_equal(again.values, delta.values)


def test_subdominant_trivial_metric():
    vals = np.full((5, 5), 2.5)
    np.fill_diagonal(vals, 0.0)
    delta = subdominant_ultrametric(DistanceMatrix(tuple("abcde"), vals))
    assert np.array_equal(delta.values, vals)


def test_subdominant_matches_dp_and_brute_force():
    rng = np.random.default_rng(13)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        d = random_metric(rng, n)
        delta = subdominant_ultrametric(d)
        assert np.array_equal(delta.values, minimax_dp(d.values))
        assert np.array_equal(delta.values, minimax_paths_brute(d.values))


def test_subdominant_dominated_and_ultrametric():
    rng = np.random.default_rng(19)
    for _ in range(20):
        d = random_metric(rng, int(rng.integers(3, 9)))
        delta = subdominant_ultrametric(d)
        assert np.all(delta.values <= d.values)
        assert delta.check_ultrametric(tol=0.0)
        assert np.array_equal(delta.values, delta.values.T)


def test_subdominant_maximality_against_dominated_ultrametrics():
    rng = np.random.default_rng(29)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        d = random_metric(rng, n)
        delta = subdominant_ultrametric(d)
        other = random_dendrogram(rng, n).delta_matrix()
        # scale the random ultrametric under d entrywise
        mask = ~np.eye(n, dtype=bool)
        factor = np.min(d.values[mask] / other.values[mask])
        dominated = other.values * factor * 0.999
        assert np.all(dominated <= d.values)
        assert np.all(dominated <= delta.values + 1e-12)


def test_dendrogram_examples():
    vals = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 2.0], [2.0, 2.0, 0.0]])
    dend = build_dendrogram(UltrametricMatrix(("a", "b", "c"), vals))
    assert dend.root.members == frozenset("abc")
    assert dend.root.radius == 2.0
    kid_sets = {c.members for c in dend.root.children}
    assert frozenset(("a", "b")) in kid_sets
    assert minimal_cluster(dend, "a") == frozenset(("a", "b"))
    assert minimal_cluster(dend, "c") == frozenset(("a", "b", "c"))


def test_dendrogram_single_vertex():
    from ultraheat import DendrogramNode, Dendrogram

    dend = Dendrogram(DendrogramNode(frozenset(["x"]), 0.0))
    assert dend.root.is_leaf
    assert minimal_cluster(dend, "x") == frozenset(["x"])


def test_dendrogram_trivial_metric_is_polytomous():
    vals = np.full((4, 4), 3.0)
    np.fill_diagonal(vals, 0.0)
    dend = build_dendrogram(UltrametricMatrix(tuple("wxyz"), vals))
    assert len(dend.root.children) == 4
    assert all(c.is_leaf for c in dend.root.children)


def test_dendrogram_lca_reproduces_delta():
    rng = np.random.default_rng(31)
    for _ in range(10):
        d = random_metric(rng, int(rng.integers(3, 10)))
        delta = subdominant_ultrametric(d)
        dend = build_dendrogram(delta)
        for u in delta.labels:
            for v in delta.labels:
                if u != v:
                    assert dend.delta(u, v) == delta.of(u, v)


def test_dendrogram_radii_strictly_decrease():
    rng = np.random.default_rng(37)
    dend = build_dendrogram(subdominant_ultrametric(random_metric(rng, 12)))
    for node in dend.nodes:
        for child in node.children:
            assert child.radius < node.radius


def test_graph_distances_accepts_encoded_graph():
    from ultraheat import TopologyFamily, encode

    fam = TopologyFamily(
        ("a", "b", "c"),
        (frozenset({("a", "b")}), frozenset({("a", "b"), ("b", "c")})),
        (2, 3),
    )
    g = encode(fam)
    d = graph_distances(g)  # default weights 1/log(w+1)
    import math

    assert d.of("a", "b") == pytest.approx(1.0 / math.log(7.0))
    assert d.of("b", "c") == pytest.approx(1.0 / math.log(4.0))
    # the doubly-shared edge is shorter than the singly-shared one
    assert d.of("a", "b") < d.of("b", "c")


def test_graph_distance_metric_axioms():
    rng = np.random.default_rng(41)
    labels = tuple(f"v{i:02d}" for i in range(10))
    d = graph_distances(labels, random_connected_weights(rng, labels))
    assert d.check_metric(tol=1e-12)


def test_index_persistence_roundtrip_and_determinism():
    rng = np.random.default_rng(43)
    dend = random_dendrogram(rng, 9)
    obj = dendrogram_to_obj(dend.root)
    again = dendrogram_from_obj(obj)
    assert dendrogram_to_obj(again.root) == obj
    for u in dend.labels:
        for v in dend.labels:
            assert dend.delta(u, v) == again.delta(u, v)
