"""Cells, embeddings, the radius lookup, measures, discretisation.

Disjointness oracle: pairwise digit-prefix comparison of leaf discs.
"""

from fractions import Fraction

import numpy as np
import pytest

from ultraheat import (
    Dendrogram,
    DendrogramNode,
    PAdicCell,
    discretize,
    embed,
    padic_distance,
    tree_measure,
)
from ultraheat.errors import LevelTooCoarse, PrimeMismatch

from conftest import random_dendrogram


def leaf_pair(radius=2.0, labels=("a", "b")):
    kids = tuple(DendrogramNode(frozenset([l]), 0.0) for l in labels)
    root = DendrogramNode(frozenset(labels), radius, kids)
    return Dendrogram(root)


def test_padic_distance_examples():
    assert padic_distance(PAdicCell(3, (1, 2)), PAdicCell(3, (1, 0))) == pytest.approx(1 / 3)
    assert padic_distance(PAdicCell(3, (1, 2)), PAdicCell(3, (1, 2))) == 0.0
    assert padic_distance(PAdicCell(3, (0, 1)), PAdicCell(3, (1, 1))) == 1.0


def test_padic_distance_prime_mismatch():
    with pytest.raises(PrimeMismatch):
        padic_distance(PAdicCell(2, (0,)), PAdicCell(3, (0,)))


def test_embed_two_children_gives_p2():
    assign = embed(leaf_pair())
    assert assign.p == 2
    assert assign.m == 1
    assert sorted(str(assign.discs[l]) for l in assign.labels) == ["0", "1"]


def test_embed_five_children_gives_p5():
    labels = tuple("abcde")
    kids = tuple(DendrogramNode(frozenset([l]), 0.0) for l in labels)
    dend = Dendrogram(DendrogramNode(frozenset(labels), 1.0, kids))
    assert embed(dend).p == 5


def test_embed_rejects_small_prime():
    labels = tuple("abc")
    kids = tuple(DendrogramNode(frozenset([l]), 0.0) for l in labels)
    dend = Dendrogram(DendrogramNode(frozenset(labels), 1.0, kids))
    with pytest.raises(ValueError):
        embed(dend, p=2)


def test_embed_leaf_discs_disjoint_random():
    rng = np.random.default_rng(47)
    for _ in range(25):
        dend = random_dendrogram(rng, int(rng.integers(2, 40)))
        assign = embed(dend)
        discs = [assign.discs[l] for l in assign.labels]
        assert all(c.level == assign.m for c in discs)
        for i in range(len(discs)):
            for j in range(i + 1, len(discs)):
                assert discs[i].digits != discs[j].digits
                assert padic_distance(discs[i], discs[j]) > 0


def test_embed_rho_compatibility():
    rng = np.random.default_rng(53)
    for _ in range(15):
        dend = random_dendrogram(rng, int(rng.integers(2, 25)))
        assign = embed(dend)
        for u in assign.labels:
            for v in assign.labels:
                if u == v:
                    continue
                dist = padic_distance(assign.discs[u], assign.discs[v])
                assert assign.rho_of(dist) == dend.delta(u, v)


def test_rho_table_strictly_increasing():
    rng = np.random.default_rng(59)
    dend = random_dendrogram(rng, 20)
    assign = embed(dend)
    dists = [d for d, _ in assign.rho]
    radii = [r for _, r in assign.rho]
    assert dists == sorted(dists, reverse=True)
    assert radii == sorted(radii, reverse=True)


def test_tree_measure_examples():
    la = DendrogramNode(frozenset(["a"]), 0.0)
    lb = DendrogramNode(frozenset(["b"]), 0.0)
    lc = DendrogramNode(frozenset(["c"]), 0.0)
    inner = DendrogramNode(frozenset(["a", "b"]), 1.0, (la, lb))
    root = DendrogramNode(frozenset(["a", "b", "c"]), 2.0, (inner, lc))
    dend = Dendrogram(root)
    nu = tree_measure(dend)
    assert nu.of(dend.root) == Fraction(1)
    assert nu.leaf_mass("c") == Fraction(1, 2)
    assert nu.leaf_mass("a") == nu.leaf_mass("b") == Fraction(1, 4)


def test_tree_measure_single_leaf():
    dend = Dendrogram(DendrogramNode(frozenset(["x"]), 0.0))
    assert tree_measure(dend).leaf_mass("x") == Fraction(1)


def test_tree_measure_balanced_binary():
    labels = [f"l{i}" for i in range(8)]

    def build(ls, r):
        if len(ls) == 1:
            return DendrogramNode(frozenset(ls), 0.0)
        mid = len(ls) // 2
        return DendrogramNode(
            frozenset(ls), r, (build(ls[:mid], r / 2), build(ls[mid:], r / 2))
        )

    dend = Dendrogram(build(labels, 8.0))
    nu = tree_measure(dend)
    for l in labels:
        assert nu.leaf_mass(l) == Fraction(1, 8)


def test_tree_measure_children_equal_and_additive():
    rng = np.random.default_rng(61)
    for _ in range(10):
        dend = random_dendrogram(rng, int(rng.integers(2, 30)))
        nu = tree_measure(dend)
        for node in dend.internal_nodes():
            masses = {nu.of(c) for c in node.children}
            assert len(masses) == 1
            assert sum(nu.of(c) for c in node.children) == nu.of(node)
        assert sum(nu.leaf_mass(l) for l in dend.labels) == Fraction(1)


def test_discretize_counting():
    assign = embed(leaf_pair())
    disc = discretize(assign, 2)
    assert len(disc.cells) == 4
    assert np.all(disc.haar_volumes() == 0.25)


def test_discretize_branching_count():
    labels = tuple("abc")
    kids = tuple(DendrogramNode(frozenset([l]), 0.0) for l in labels)
    dend = Dendrogram(DendrogramNode(frozenset(labels), 1.0, kids))
    assign = embed(dend)  # p = 3, m = 1
    disc = discretize(assign, 2)
    per_leaf = [sum(1 for l in disc.leaf_labels if l == lab) for lab in labels]
    assert per_leaf == [3, 3, 3]


def test_discretize_nu_volumes_sum_per_leaf():
    rng = np.random.default_rng(67)
    dend = random_dendrogram(rng, 6)
    assign = embed(dend)
    nu = tree_measure(dend)
    disc = discretize(assign, assign.m + 2)
    vols = disc.nu_volumes(nu)
    assert vols.sum() == pytest.approx(1.0, abs=1e-15)
    for lab in assign.labels:
        mask = np.array([l == lab for l in disc.leaf_labels])
        assert vols[mask].sum() == pytest.approx(float(nu.leaf_mass(lab)), abs=1e-15)


def test_discretize_rejects_coarse_level():
    assign = embed(leaf_pair())
    with pytest.raises(LevelTooCoarse):
        discretize(assign, assign.m)
