"""Jump kernels over the embedded domain and their exact finite generators.

Rates between points in the same vertex disc follow the Vladimirov kernel
|x-y|_p^(-alpha); rates between different discs are constant per vertex
pair and come from one of three sources: the (weighted) adjacency matrix,
the shortest-path graph distance, or the subdominant ultrametric.  On
functions locally constant at level n the integral operator is realised
exactly by a finite matrix with off-diagonal entries rate * measure and
zero row sums.

Tree truncation cuts the dendrogram at a level, replaces every rate
inside a cut node's ball by the Vladimirov rate, and widens the domain by
the filler cells of the cut balls not covered by any vertex disc.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
import numpy as np

from .errors import CellOutsideZ, InvalidLevel
from .padic import (
    DiscAssignment,
    Discretization,
    PAdicCell,
    TreeMeasure,
    padic_distance,
)


class Bullet(str, Enum):
    ADJACENCY = "adjacency"
    GRAPH_DISTANCE = "graphdist"
    ULTRAMETRIC = "ultrametric"


@dataclass(frozen=True)
class KernelSpec:
    """Cross-disc interaction: base matrix and exponent.

    Rates between distinct vertices v, w are base(v,w)^(-alpha); a zero
    base entry means no interaction (only allowed for the adjacency
    bullet, where zero marks a non-edge).  Rates may exceed 1: only
    non-negativity matters downstream.
    """

    bullet: Bullet
    alpha: float
    labels: tuple
    base: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        base = np.asarray(self.base, dtype=float)
        base.setflags(write=False)
        object.__setattr__(self, "base", base)
        if self.alpha < 1:
            raise ValueError(f"alpha must be >= 1, got {self.alpha}")
        n = len(self.labels)
        if base.shape != (n, n):
            raise ValueError("base matrix shape does not match labels")
        if not np.allclose(base, base.T, rtol=0, atol=0):
            raise ValueError("base matrix must be symmetric")
        if np.any(base < 0):
            raise ValueError("base matrix must be non-negative")
        if self.bullet is not Bullet.ADJACENCY:
            off = base[~np.eye(n, dtype=bool)]
            if n > 1 and np.any(off == 0):
                raise ValueError(f"{self.bullet.value} base must be positive off the diagonal")

    def cross_rates(self) -> np.ndarray:
        """k(v,w) = base^(-alpha) off the diagonal, 0 where base is 0."""
        rates = np.zeros_like(self.base)
        mask = self.base > 0
        rates[mask] = self.base[mask] ** -self.alpha
        np.fill_diagonal(rates, 0.0)
        return rates

    def label_index(self) -> dict:
        return {l: i for i, l in enumerate(self.labels)}


def _prefix_length_matrix(digits: np.ndarray) -> np.ndarray:
    eq = digits[:, None, :] == digits[None, :, :]
    return np.cumprod(eq, axis=2).sum(axis=2)


def cell_distance_matrix(disc) -> np.ndarray:
    """Pairwise p-adic distances between the discretisation cells."""
    digits = disc.digit_matrix()
    j = _prefix_length_matrix(digits)
    dist = float(disc.p) ** (-j.astype(float))
    np.fill_diagonal(dist, 0.0)
    return dist


def kernel_matrix(spec: KernelSpec, assign: DiscAssignment, disc: Discretization) -> np.ndarray:
    """k_p over all cell pairs: Vladimirov inside a disc, cross rate between
    discs, zero on the diagonal."""
    if set(spec.labels) != set(assign.labels):
        raise ValueError("kernel labels do not match the disc assignment")
    dist = cell_distance_matrix(disc)
    with np.errstate(divide="ignore"):
        intra = np.where(dist > 0, dist, 1.0) ** -spec.alpha
    idx = spec.label_index()
    leaf_idx = np.array([idx[l] for l in disc.leaf_labels])
    same = leaf_idx[:, None] == leaf_idx[None, :]
    cross = spec.cross_rates()
    K = np.where(same, intra, cross[np.ix_(leaf_idx, leaf_idx)])
    np.fill_diagonal(K, 0.0)
    return K


def kernel_value(spec: KernelSpec, assign: DiscAssignment, x: PAdicCell, y: PAdicCell) -> float:
    """Rate between two distinct same-level cells of the domain."""
    vx = assign.vertex_of(x)
    vy = assign.vertex_of(y)
    if vx is None or vy is None:
        raise CellOutsideZ("cell lies outside every vertex disc")
    if x.digits == y.digits:
        raise ValueError("kernel_value requires distinct cells")
    if vx == vy:
        return padic_distance(x, y) ** -spec.alpha
    idx = spec.label_index()
    return float(spec.cross_rates()[idx[vx], idx[vy]])


@dataclass(frozen=True)
class GeneratorMatrix:
    """Finite generator: off-diagonal rate*measure, zero row sums."""

    level: int
    cells: tuple
    leaf_labels: tuple
    matrix: np.ndarray
    measure: np.ndarray  # per-cell masses
    measure_kind: str  # 'haar' | 'nu'
    bullet: Bullet
    alpha: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        mu = np.asarray(self.measure, dtype=float)
        mu.setflags(write=False)
        object.__setattr__(self, "measure", mu)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    def row_sum_defect(self) -> float:
        return float(np.max(np.abs(self.matrix.sum(axis=1))))


MAX_DENSE_CELLS = 10_000


def _assemble(K, measure_vec, cells, leaf_labels, level, measure_kind, bullet, alpha):
    if len(cells) > MAX_DENSE_CELLS:
        raise ValueError(
            f"{len(cells)} cells exceed the dense-matrix limit of {MAX_DENSE_CELLS}; "
            "choose a coarser level"
        )
    A = K * measure_vec[None, :]
    np.fill_diagonal(A, 0.0)
    np.fill_diagonal(A, -A.sum(axis=1))
    return GeneratorMatrix(
        level=level,
        cells=tuple(cells),
        leaf_labels=tuple(leaf_labels),
        matrix=A,
        measure=measure_vec,
        measure_kind=measure_kind,
        bullet=bullet,
        alpha=alpha,
    )


def generator(
    spec: KernelSpec,
    assign: DiscAssignment,
    disc,
    measure: str = "haar",
    tree_measure: TreeMeasure | None = None,
) -> GeneratorMatrix:
    """Exact matrix of the jump operator on level-n locally constant functions."""
    if isinstance(disc, TruncatedDomain):
        if measure != "haar":
            raise ValueError("truncated domains are discretised with the Haar measure")
        K = truncated_kernel_matrix(spec, disc)
        mvec = disc.haar_volumes()
        return _assemble(
            K, mvec, disc.cells, disc.leaf_labels, disc.level, "haar", spec.bullet, spec.alpha
        )
    if measure == "haar":
        mvec = disc.haar_volumes()
    elif measure == "nu":
        if tree_measure is None:
            raise ValueError("nu measure requires a TreeMeasure")
        mvec = disc.nu_volumes(tree_measure)
    else:
        raise ValueError(f"unknown measure {measure!r}")
    K = kernel_matrix(spec, assign, disc)
    return _assemble(
        K, mvec, disc.cells, disc.leaf_labels, disc.level, measure, spec.bullet, spec.alpha
    )


def degree(
    spec: KernelSpec,
    assign: DiscAssignment,
    disc: Discretization,
    x: PAdicCell,
    measure: str = "haar",
    tree_measure: TreeMeasure | None = None,
) -> float:
    """Total jump rate out of cell x (off-diagonal row sum)."""
    gen = generator(spec, assign, disc, measure, tree_measure)
    i = disc.index_of(x)
    return float(gen.matrix[i].sum() - gen.matrix[i, i])


# --- tree truncation ------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedDomain:
    """Cells of the widened domain obtained by cutting the dendrogram.

    Cut nodes are the dendrogram nodes at the cut level plus any leaves
    above it; their full p-adic balls are discretised, so cells not
    covered by a vertex disc appear as filler (leaf label None).
    """

    assignment: DiscAssignment
    cut_level: int
    level: int
    cells: tuple
    leaf_labels: tuple  # label or None (filler)
    node_index: tuple  # cut-node ordinal per cell
    cut_node_levels: tuple  # p-adic ball level per cut node

    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {c.digits: i for i, c in enumerate(self.cells)})

    def __len__(self):
        return len(self.cells)

    def index_of(self, cell: PAdicCell) -> int:
        return self._index[cell.digits]

    @property
    def p(self) -> int:
        return self.assignment.p

    def haar_volumes(self) -> np.ndarray:
        return np.full(len(self.cells), float(self.p) ** -self.level)

    def digit_matrix(self) -> np.ndarray:
        return np.array([c.digits for c in self.cells], dtype=np.int64)

    def z_mask(self) -> np.ndarray:
        return np.array([l is not None for l in self.leaf_labels])

    @property
    def vol_z(self) -> float:
        return int(self.z_mask().sum()) * float(self.p) ** -self.level

    @property
    def vol_total(self) -> float:
        return len(self.cells) * float(self.p) ** -self.level

    @property
    def vol_filler(self) -> float:
        return self.vol_total - self.vol_z


@dataclass(frozen=True)
class TruncatedKernel:
    """The cut kernel: Vladimirov inside every cut ball, untouched across."""

    spec: KernelSpec
    domain: TruncatedDomain

    def matrix(self) -> np.ndarray:
        return truncated_kernel_matrix(self.spec, self.domain)

    def max_rate_z_to_filler(self) -> float:
        K = self.matrix()
        z = self.domain.z_mask()
        if z.all():
            return 0.0
        return float(K[np.ix_(z, ~z)].max())


def cut_nodes(assign: DiscAssignment, ell: int):
    dend = assign.dendrogram
    max_level = dend.max_level
    if not 0 < ell <= max_level:
        raise InvalidLevel(f"cut level {ell} outside 1..{max_level}")
    chosen = [
        node
        for node in dend.nodes
        if node.level == ell or (node.is_leaf and node.level < ell)
    ]
    chosen.sort(key=lambda n: min(map(str, n.members)))
    return chosen


def truncated_domain(
    assign: DiscAssignment,
    ell: int,
    level: int | None = None,
    spec: KernelSpec | None = None,
) -> tuple[TruncatedDomain, "TruncatedKernel | None"]:
    """Discretise the union of cut-node balls at the given cell level.

    Returns the domain and, when a KernelSpec is supplied, the cut kernel
    acting on it; the domain can also be passed straight to ``generator``.
    """
    n = assign.m + 1 if level is None else level
    if n <= assign.m:
        raise InvalidLevel(f"cell level {n} is not finer than the vertex discs (m={assign.m})")
    nodes = cut_nodes(assign, ell)
    cells: list[PAdicCell] = []
    labels: list = []
    node_idx: list[int] = []
    ball_levels: list[int] = []
    for k, node in enumerate(nodes):
        ball = assign.cell_of(node)
        ball_levels.append(ball.level)
        for suffix in itertools.product(range(assign.p), repeat=n - ball.level):
            cell = PAdicCell(assign.p, ball.digits + suffix)
            cells.append(cell)
            labels.append(assign.vertex_of(cell))
            node_idx.append(k)
    dom = TruncatedDomain(
        assignment=assign,
        cut_level=ell,
        level=n,
        cells=tuple(cells),
        leaf_labels=tuple(labels),
        node_index=tuple(node_idx),
        cut_node_levels=tuple(ball_levels),
    )
    return dom, (TruncatedKernel(spec, dom) if spec is not None else None)


def truncated_kernel_matrix(spec: KernelSpec, dom: TruncatedDomain) -> np.ndarray:
    digits = dom.digit_matrix()
    j = _prefix_length_matrix(digits)
    dist = float(dom.p) ** (-j.astype(float))
    np.fill_diagonal(dist, 1.0)
    vlad = dist ** -spec.alpha

    idx = spec.label_index()
    leaf_idx = np.array([-1 if l is None else idx[l] for l in dom.leaf_labels])
    node_idx = np.asarray(dom.node_index)
    same_node = node_idx[:, None] == node_idx[None, :]

    cross = spec.cross_rates()
    both_in_z = (leaf_idx[:, None] >= 0) & (leaf_idx[None, :] >= 0)
    safe = np.where(leaf_idx >= 0, leaf_idx, 0)
    cross_vals = np.where(both_in_z, cross[np.ix_(safe, safe)], 0.0)

    K = np.where(same_node, vlad, cross_vals)
    np.fill_diagonal(K, 0.0)
    return K
