"""Batch front end: encode/decode families, build indexes, sort, and run
spectra, heat kernels, bound certification, and convergence studies.

Every subcommand writes deterministic artifacts and prints a JSON summary
(one record per artifact with path, sha256 and key metrics).  Module
errors map to distinct exit codes; malformed input exits 2.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import errors, heat, multitopo, operators, padic, serialize, spectra, toposort, ultraindex

EXIT_CODES = {
    errors.ParseError: 2,
    errors.CyclicInput: 3,
    errors.DuplicatePrime: 4,
    errors.NotPrime: 4,
    errors.UnknownPrimeFactor: 5,
    errors.AmbiguousOrientation: 6,
    errors.DisconnectedGraph: 7,
    errors.CycleDetected: 8,
    errors.PrimeMismatch: 9,
    errors.LevelTooCoarse: 10,
    errors.InvalidLevel: 11,
    errors.CellOutsideZ: 12,
    errors.BallOutsideZ: 13,
    errors.BadJ: 14,
    errors.LeafNode: 15,
    errors.TrivialCharacter: 16,
    errors.IncompleteBasis: 17,
    errors.DimensionMismatch: 18,
    errors.NegativeTime: 19,
    errors.BoundViolated: 20,
}


def _summary(subcommand: str, artifacts: list[dict], metrics: dict) -> None:
    print(serialize.canonical_dumps(
        {"subcommand": subcommand, "artifacts": artifacts, "metrics": metrics}
    ), end="")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_encode(args) -> int:
    family = serialize.family_from_obj(serialize.load_json(args.input))
    graph = multitopo.encode(family)
    digest = serialize.write_canonical(
        args.output, serialize.graph_to_obj(graph, primes=family.primes)
    )
    _summary("encode", [{"path": args.output, "sha256": digest}], {
        "vertices": len(graph.vertices),
        "edges": len(graph.edges),
        "topologies": len(family.dags),
    })
    return 0


def cmd_decode(args) -> int:
    graph, stored_primes = serialize.graph_from_obj(serialize.load_json(args.input))
    primes = tuple(int(p) for p in args.primes.split(",")) if args.primes else stored_primes
    if not primes:
        raise errors.ParseError("no primes stored in the file and none given")
    family = multitopo.decode(graph, primes)
    digest = serialize.write_canonical(args.output, serialize.family_to_obj(family))
    _summary("decode", [{"path": args.output, "sha256": digest}], {
        "vertices": len(family.vertex_ids),
        "topologies": len(family.dags),
    })
    return 0


def _index_pieces(graph: multitopo.WeightedMultiGraph):
    weights = ultraindex.default_distance_weights(graph)
    d_e = ultraindex.graph_distances(graph, weights)
    delta = ultraindex.subdominant_ultrametric(d_e)
    dend = ultraindex.build_dendrogram(delta)
    assign = padic.embed(dend)
    labels = d_e.labels
    n = len(labels)
    kappa = np.zeros((n, n))
    pos = {l: i for i, l in enumerate(labels)}
    for e, wt in weights.items():
        u, v = tuple(e)
        kappa[pos[u], pos[v]] = kappa[pos[v], pos[u]] = wt
    return assign, delta, d_e, kappa


def cmd_index(args) -> int:
    graph, _ = serialize.graph_from_obj(serialize.load_json(args.input))
    assign, delta, d_e, kappa = _index_pieces(graph)
    obj = serialize.index_to_obj(assign, delta, d_e=d_e.values, kappa=kappa)
    digest = serialize.write_canonical(args.output, obj)
    _summary("index", [{"path": args.output, "sha256": digest}], {
        "vertices": len(delta.labels),
        "p": assign.p,
        "m": assign.m,
        "max_level": assign.dendrogram.max_level,
    })
    return 0


def cmd_toposort(args) -> int:
    dag, weights = serialize.dag_from_obj(serialize.load_json(args.input))
    seeds = args.seeds.split(",") if args.seeds else [sorted(dag.vertices, key=str)[0]]
    if args.index:
        assign, _, _, _ = serialize.index_from_obj(serialize.load_json(args.index))
        dend = assign.dendrogram
    else:
        if not weights:
            weights = {frozenset(e): 1.0 for e in dag.edges}
        d_e = ultraindex.graph_distances(dag.vertices, weights)
        delta = ultraindex.subdominant_ultrametric(d_e)
        dend = ultraindex.build_dendrogram(delta)
    order = toposort.parallel_toposort(dag, dend, seeds, parallelism=args.parallelism)
    pos = {v: i for i, v in enumerate(order)}
    valid = all(pos[u] < pos[v] for u, v in dag.edges)
    lines = "\n".join(map(str, order)) + "\n"
    Path(args.output).write_text(lines, encoding="utf-8")
    digest = hashlib.sha256(lines.encode()).hexdigest()
    _summary("toposort", [{"path": args.output, "sha256": digest}], {
        "vertices": len(order),
        "valid_linear_extension": valid,
        "parallelism": args.parallelism,
    })
    return 0 if valid else 1


def _spec_from_index(args, assign, delta, d_e, kappa) -> operators.KernelSpec:
    labels = delta.labels
    bullet = operators.Bullet(args.bullet)
    if bullet is operators.Bullet.ULTRAMETRIC:
        base = delta.values
    elif bullet is operators.Bullet.GRAPH_DISTANCE:
        if d_e is None:
            raise errors.ParseError("index file lacks the graph distance matrix")
        base = d_e
    else:
        if kappa is None:
            raise errors.ParseError("index file lacks the adjacency matrix")
        base = kappa
    return operators.KernelSpec(bullet, args.alpha, labels, base)


def _measure_args(args, assign):
    if args.measure == "nu":
        return "nu", padic.tree_measure(assign.dendrogram)
    return "haar", None


def cmd_spectrum(args) -> int:
    assign, delta, d_e, kappa = serialize.index_from_obj(serialize.load_json(args.input))
    spec = _spec_from_index(args, assign, delta, d_e, kappa)
    disc = padic.discretize(assign, args.level)
    measure, tm = _measure_args(args, assign)
    basis = spectra.full_basis(spec, assign, disc, measure, tm)
    digest = serialize.spectrum_export(args.output, basis)
    _summary("spectrum", [{"path": args.output, "sha256": digest}], {
        "cells": len(disc.cells),
        "eigenpairs": len(basis),
        "max_residual": _fmt(max(p.residual for p in basis)),
        "min_eigenvalue": _fmt(min(p.lam for p in basis)),
    })
    return 0


def cmd_heat(args) -> int:
    assign, delta, d_e, kappa = serialize.index_from_obj(serialize.load_json(args.input))
    spec = _spec_from_index(args, assign, delta, d_e, kappa)
    disc = padic.discretize(assign, args.level)
    measure, tm = _measure_args(args, assign)
    basis = spectra.full_basis(spec, assign, disc, measure, tm)
    table = heat.heat_kernel(basis, args.t)
    gen = operators.generator(spec, assign, disc, measure, tm)
    T = heat.semigroup(gen, args.t)
    agreement = float(np.max(np.abs(table.matrix * gen.measure[None, :] - T.matrix)))
    digest = serialize.matrix_export(args.output, table.matrix, {
        "p": assign.p, "n": args.level, "bullet": args.bullet,
        "alpha": args.alpha, "measure": args.measure, "t": args.t,
    })
    _summary("heat", [{"path": args.output, "sha256": digest}], {
        "cells": len(disc.cells),
        "row_sum_defect": _fmt(T.row_sum_defect()),
        "two_route_gap": _fmt(agreement),
    })
    return 0


def cmd_bounds(args) -> int:
    assign, delta, d_e, kappa = serialize.index_from_obj(serialize.load_json(args.input))
    disc = padic.discretize(assign, args.level)
    rng = np.random.default_rng(args.seed)
    if args.truncate is not None:
        spec = _spec_from_index(args, assign, delta, d_e, kappa)
        u = rng.uniform(-1, 1, len(disc.cells))
        report = heat.truncation_bound(spec, assign, disc, args.truncate, args.t, u)
        meta = {"mode": "truncate", "ell": args.truncate}
    else:
        name_a, _, name_b = args.swap.partition(",")
        args_a = argparse.Namespace(bullet=name_a, alpha=args.alpha)
        args_b = argparse.Namespace(bullet=name_b, alpha=args.alpha)
        spec_a = _spec_from_index(args_a, assign, delta, d_e, kappa)
        spec_b = _spec_from_index(args_b, assign, delta, d_e, kappa)
        report = heat.kernel_swap_bound(spec_a, spec_b, assign, disc, args.t)
        meta = {"mode": "swap", "pair": [name_a, name_b]}
    obj = {
        "measured_sup_error": report.measured_sup_error,
        "theoretical_bound": report.theoretical_bound,
        "tight_bound": report.tight_bound,
        "slack": report.slack,
        "volumes": report.volumes,
        "constants_sum": sum(report.constants.values()),
        **meta,
    }
    digest = serialize.write_canonical(args.output, obj)
    _summary("bounds", [{"path": args.output, "sha256": digest}], {
        "slack": _fmt(report.slack),
        "measured": _fmt(report.measured_sup_error),
        "bound": _fmt(report.theoretical_bound),
    })
    return 0


def cmd_converge(args) -> int:
    assign, delta, d_e, kappa = serialize.index_from_obj(serialize.load_json(args.input))
    spec = _spec_from_index(args, assign, delta, d_e, kappa)
    measure, tm = _measure_args(args, assign)
    disc_ref = padic.discretize(assign, args.reference)
    rng = np.random.default_rng(args.seed)
    u0 = rng.uniform(-1, 1, len(disc_ref.cells))
    levels = [int(s) for s in args.levels.split(",")]
    rows = heat.convergence_study(spec, assign, u0, levels, args.tau, measure, tm)
    text = "n\tgap\n" + "".join(f"{n}\t{gap:.17g}\n" for n, gap in rows)
    Path(args.output).write_text(text, encoding="utf-8")
    digest = hashlib.sha256(text.encode()).hexdigest()
    _summary("converge", [{"path": args.output, "sha256": digest}], {
        "levels": levels,
        "final_gap": _fmt(rows[-1][1]),
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ultraheat", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("encode", help="pack a family of DAG topologies into one graph")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("decode", help="recover the family from a weighted graph")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--primes", default="")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("index", help="distances, subdominant ultrametric, dendrogram, discs")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(fn=cmd_index)

    p = sub.add_parser("toposort", help="cluster-parallel topological sort")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--seeds", default="")
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--index", default="")
    p.set_defaults(fn=cmd_toposort)

    p = sub.add_parser("spectrum", help="full eigenbasis with certified residuals")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--bullet", choices=[b.value for b in operators.Bullet], required=True)
    p.add_argument("--measure", choices=["haar", "nu"], default="haar")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--level", type=int, required=True)
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("heat", help="heat kernel table at time t")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--bullet", choices=[b.value for b in operators.Bullet], required=True)
    p.add_argument("--measure", choices=["haar", "nu"], default="haar")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(fn=cmd_heat)

    p = sub.add_parser("bounds", help="certify truncation or kernel-swap bounds")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--bullet", choices=[b.value for b in operators.Bullet],
                   default="ultrametric")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--truncate", type=int, default=None)
    p.add_argument("--swap", default="")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("converge", help="level-refinement convergence study")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--bullet", choices=[b.value for b in operators.Bullet], required=True)
    p.add_argument("--measure", choices=["haar", "nu"], default="haar")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--levels", required=True)
    p.add_argument("--reference", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_converge)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand == "bounds" and (args.truncate is None) == (not args.swap):
        parser.error("bounds needs exactly one of --truncate or --swap")
    try:
        return args.fn(args)
    except errors.UltraheatError as exc:
        code = EXIT_CODES.get(type(exc), 30)
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc), "exit": code}),
            file=sys.stderr,
        )
        return code


if __name__ == "__main__":
    sys.exit(main())
