"""File schemas: topology families, weighted graphs, DAGs, and index files.

All writers emit canonical JSON (sorted keys, fixed separators, sorted
collections, trailing newline), so identical inputs produce identical
bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .multitopo import TopologyFamily, WeightedMultiGraph
from .padic import DiscAssignment
from .toposort import Dag
from .ultraindex import Dendrogram, DendrogramNode, UltrametricMatrix


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_canonical(path, obj) -> str:
    text = canonical_dumps(obj)
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


# --- topology families ------------------------------------------------------


def family_to_obj(family: TopologyFamily) -> dict:
    return {
        "vertices": sorted(map(str, family.vertex_ids)),
        "topologies": [
            {"edges": sorted([list(map(str, e)) for e in dag])} for dag in family.dags
        ],
        "primes": list(family.primes),
    }


def family_from_obj(obj) -> TopologyFamily:
    try:
        vertices = tuple(obj["vertices"])
        topologies = obj["topologies"]
        dags = tuple(
            frozenset(tuple(edge) for edge in topo["edges"]) for topo in topologies
        )
        primes = tuple(obj.get("primes") or ())
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed family file: {exc}") from exc
    if not primes:
        from .multitopo import first_primes

        primes = first_primes(len(dags))
    return TopologyFamily(vertices, dags, primes)


# --- weighted graphs -----------------------------------------------------------


def graph_to_obj(g: WeightedMultiGraph, primes=None) -> dict:
    edges = []
    for e in g.edges:
        u, v = sorted(e, key=str)
        edges.append({"ends": [str(u), str(v)], "w": int(g.w[e])})
    edges.sort(key=lambda rec: rec["ends"])
    obj = {
        "vertices": sorted(map(str, g.vertices)),
        "edges": edges,
        "d": {str(v): list(g.d[v]) for v in g.vertices},
    }
    if primes is not None:
        obj["primes"] = list(primes)
    return obj


def graph_from_obj(obj) -> tuple[WeightedMultiGraph, tuple]:
    try:
        vertices = tuple(obj["vertices"])
        w = {}
        for rec in obj["edges"]:
            u, v = rec["ends"]
            w[frozenset((u, v))] = int(rec["w"])
        d = {v: tuple(obj["d"][v]) for v in vertices}
        primes = tuple(obj.get("primes") or ())
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed graph file: {exc}") from exc
    g = WeightedMultiGraph(vertices, frozenset(w), w, d)
    return g, primes


# --- DAG files -------------------------------------------------------------------


def dag_from_obj(obj) -> tuple[Dag, dict]:
    try:
        vertices = tuple(obj["vertices"])
        edges = frozenset(tuple(e) for e in obj["edges"])
        weights = {}
        for key, val in (obj.get("weights") or {}).items():
            u, _, v = key.partition("|")
            weights[frozenset((u, v))] = float(val)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed dag file: {exc}") from exc
    return Dag(vertices, edges), weights


# --- dendrogram / index files ----------------------------------------------------------


def dendrogram_to_obj(node: DendrogramNode):
    if node.is_leaf:
        return {"leaf": str(node.label)}
    return {
        "radius": node.radius,
        "children": [dendrogram_to_obj(c) for c in node.children],
    }


def dendrogram_from_obj(obj) -> Dendrogram:
    def build(rec) -> DendrogramNode:
        if "leaf" in rec:
            return DendrogramNode(frozenset([rec["leaf"]]), 0.0)
        children = tuple(build(c) for c in rec["children"])
        members = frozenset().union(*(c.members for c in children))
        return DendrogramNode(members, float(rec["radius"]), children)

    try:
        return Dendrogram(build(obj))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed dendrogram: {exc}") from exc


def assignment_to_obj(assign: DiscAssignment) -> dict:
    return {
        "p": assign.p,
        "m": assign.m,
        "discs": {str(l): str(assign.discs[l]) for l in assign.labels},
        "rho": [[dist, radius] for dist, radius in assign.rho],
    }


def index_to_obj(
    assign: DiscAssignment,
    delta: UltrametricMatrix,
    d_e=None,
    kappa=None,
) -> dict:
    obj = {
        "vertices": list(map(str, delta.labels)),
        "delta": [[float(x) for x in row] for row in delta.values],
        "dendrogram": dendrogram_to_obj(assign.dendrogram.root),
        "assignment": assignment_to_obj(assign),
    }
    if d_e is not None:
        obj["d_e"] = [[float(x) for x in row] for row in np.asarray(d_e)]
    if kappa is not None:
        obj["kappa"] = [[float(x) for x in row] for row in np.asarray(kappa)]
    return obj


def index_from_obj(obj):
    from .padic import embed

    try:
        labels = tuple(obj["vertices"])
        delta = UltrametricMatrix(labels, np.array(obj["delta"], dtype=float))
        dend = dendrogram_from_obj(obj["dendrogram"])
        p = int(obj["assignment"]["p"])
        d_e = np.array(obj["d_e"], dtype=float) if "d_e" in obj else None
        kappa = np.array(obj["kappa"], dtype=float) if "kappa" in obj else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed index file: {exc}") from exc
    assign = embed(dend, p)
    return assign, delta, d_e, kappa


# --- text matrices ---------------------------------------------------------------------


def matrix_export(path, matrix: np.ndarray, header: dict) -> str:
    lines = ["# " + json.dumps(header, sort_keys=True)]
    for row in np.asarray(matrix):
        lines.append(" ".join(f"{x:.17g}" for x in row))
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def spectrum_export(path, basis) -> str:
    lines = ["kind\tsupport\tindex\tlambda\tresidual"]
    for pair in basis:
        lines.append(
            f"{pair.kind}\t{pair.support}\t{pair.index}\t{pair.lam:.17g}\t{pair.residual:.17g}"
        )
    text = "\n".join(lines) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
