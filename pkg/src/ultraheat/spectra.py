"""Wavelet eigenbases and closed-form spectra of the jump generators.

Two wavelet families diagonalise the operators together with functions
constant on the vertex discs:

* Kozyrev wavelets: supported in a ball B of radius p^-d inside a vertex
  disc of radius p^-m, constant times exp(2 pi i j a / p) on the child
  cell with branch digit a.  They are eigenfunctions for every kernel
  choice and both measures; the eigenvalue splits into a local part
  (shell integral over the disc plus the in-ball jump term) and the
  total rate towards the other discs:

      local(p, alpha, d, m) = -(1 - 1/p) * sum_{k=m}^{d-1} p^{k(alpha-1)}
                              - p^{d(alpha-1)}

  Haar measure:  lambda = local - sum_w k(v,w) p^-m
  tree measure:  lambda = s_v * local - sum_w k(v,w) nu(U_w)
  with s_v the density of the tree measure on the disc relative to Haar.
  The local part is independent of the character index j and strictly
  decreases in d.

* Ultrametric wavelets: on an internal dendrogram node, constant
  nu(node)^(-1/2) * exp(2 pi i k idx / c) on each of the c children
  (children enumerated by smallest member label).  For the ultrametric
  kernel under the tree measure they are eigenfunctions with

      gamma = -radius^(-alpha) * c * nu(child)
              - sum over ancestors a of radius(a)^(-alpha) * (nu(a) - nu(step below a))

  i.e. the sibling exchange term plus the total escape rate towards the
  rest of the tree; both pieces are independent of which child carries
  the evaluation point.  ``verify_eigenpair`` certifies every closed form
  against the assembled generator and is the authority on all of them.

Functions constant on the discs are handled by the dense eigensolve of
the measure-weighted vertex matrix (``laplacian_block_modes``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadJ,
    BallOutsideZ,
    DimensionMismatch,
    IncompleteBasis,
    LeafNode,
    TrivialCharacter,
)
from .linalg import weighted_symmetric_eig
from .operators import Bullet, GeneratorMatrix, KernelSpec, generator
from .padic import DiscAssignment, Discretization, PAdicCell, TreeMeasure
from .ultraindex import Dendrogram, DendrogramNode


@dataclass(frozen=True)
class EigenPair:
    kind: str  # 'kozyrev' | 'ultrametric' | 'block' | 'constant'
    support: str
    index: int
    lam: float
    psi: np.ndarray
    residual: float = float("nan")

    def with_residual(self, r: float) -> "EigenPair":
        return EigenPair(self.kind, self.support, self.index, self.lam, self.psi, r)


@dataclass(frozen=True)
class EigenBasis:
    pairs: tuple
    cells: tuple
    measure: np.ndarray
    measure_kind: str

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    def psi_matrix(self) -> np.ndarray:
        return np.column_stack([np.asarray(p.psi, dtype=complex) for p in self.pairs])

    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs])

    def gram(self) -> np.ndarray:
        psi = self.psi_matrix()
        return psi.conj().T @ (self.measure[:, None] * psi)

    def projector_sum(self) -> np.ndarray:
        psi = self.psi_matrix()
        return psi @ (psi.conj().T * self.measure[None, :])


# --- Kozyrev wavelets ------------------------------------------------------------


def kozyrev_wavelet(
    assign: DiscAssignment, disc: Discretization, B: PAdicCell, j: int
) -> np.ndarray:
    """Unit-Haar-norm Kozyrev wavelet supported in ball B, as a cell vector.

    On the child cell of B with branch digit a the value is
    |B|^(-1/2) exp(2 pi i j a / p); locally constant at level d+1.
    """
    p = assign.p
    if not 1 <= j <= p - 1:
        raise BadJ(f"j must lie in 1..{p - 1}, got {j}")
    if B.p != p:
        raise BallOutsideZ(f"ball over p={B.p}, domain over p={p}")
    d = B.level
    if d < assign.m or assign.vertex_of(B.extended(max(d, assign.m))) is None:
        raise BallOutsideZ("ball is not contained in a vertex disc")
    if disc.level < d + 1:
        raise ValueError("discretisation too coarse to resolve the wavelet")
    amp = float(p) ** (d / 2.0)
    out = np.zeros(len(disc.cells), dtype=complex)
    for i, cell in enumerate(disc.cells):
        if cell.digits[:d] != B.digits:
            continue
        a = cell.digits[d]
        out[i] = amp * np.exp(2j * math.pi * j * a / p)
    return out


def kozyrev_local_eigenvalue(p: int, alpha: float, d: int, m: int) -> float:
    """Eigenvalue of the single-disc Vladimirov dynamics on a scale-d wavelet.

    Shell-by-shell integral over the disc outside the ball plus the
    in-ball exchange term; strictly decreasing in d, independent of the
    character index.
    """
    if d < m:
        raise ValueError(f"ball level d={d} must be at least the disc level m={m}")
    shells = sum(float(p) ** (k * (alpha - 1.0)) for k in range(m, d))
    return -(1.0 - 1.0 / p) * shells - float(p) ** (d * (alpha - 1.0))


def kozyrev_eigenvalue(
    spec: KernelSpec,
    assign: DiscAssignment,
    B: PAdicCell,
    v,
    measure: str = "haar",
    tree_measure: TreeMeasure | None = None,
) -> float:
    """Closed-form generator eigenvalue of the Kozyrev wavelet in B inside disc v."""
    p, m = assign.p, assign.m
    local = kozyrev_local_eigenvalue(p, spec.alpha, B.level, m)
    rates = spec.cross_rates()
    idx = spec.label_index()
    iv = idx[v]
    if measure == "haar":
        masses = {w: float(p) ** -m for w in spec.labels}
        scale = 1.0
    elif measure == "nu":
        if tree_measure is None:
            raise ValueError("nu measure requires a TreeMeasure")
        masses = {w: float(tree_measure.leaf_mass(w)) for w in spec.labels}
        scale = masses[v] * float(p) ** m
    else:
        raise ValueError(f"unknown measure {measure!r}")
    cross = sum(rates[iv, idx[w]] * masses[w] for w in spec.labels if w != v)
    return scale * local - cross


# --- ultrametric wavelets -----------------------------------------------------------


def ultrametric_wavelet(
    dend: Dendrogram,
    nu: TreeMeasure,
    disc: Discretization,
    node: DendrogramNode,
    k: int,
) -> np.ndarray:
    """Haar-like wavelet of a non-leaf node: nu(node)^(-1/2) times the k-th
    character of the cyclic group on its children, constant per child."""
    if node.is_leaf:
        raise LeafNode("ultrametric wavelets live on internal nodes")
    c = len(node.children)
    if k == 0:
        raise TrivialCharacter("k=0 is the constant on the node, not a wavelet")
    if not 1 <= k <= c - 1:
        raise ValueError(f"character index k must lie in 1..{c - 1}, got {k}")
    amp = float(nu.of(node)) ** -0.5
    child_of = {}
    for idx_child, child in enumerate(node.children):
        for label in child.members:
            child_of[label] = idx_child
    out = np.zeros(len(disc.cells), dtype=complex)
    for i, label in enumerate(disc.leaf_labels):
        ic = child_of.get(label)
        if ic is None:
            continue
        out[i] = amp * np.exp(2j * math.pi * k * ic / c)
    return out


def ultrametric_eigenvalue(
    dend: Dendrogram,
    delta,
    nu: TreeMeasure,
    node: DendrogramNode,
    alpha: float,
) -> float:
    """Generator eigenvalue of an ultrametric wavelet (ultrametric kernel,
    tree measure): sibling exchange within the node plus the escape rate
    towards every ancestor's remainder.  Independent of the child node
    and of the character index; certified against the assembled matrix
    by ``verify_eigenpair`` in the test suite."""
    if node.is_leaf:
        raise LeafNode("ultrametric wavelets live on internal nodes")
    if delta is not None:
        diam = max(
            delta.of(u, v)
            for a, b in itertools.combinations(node.children, 2)
            for u in a.members
            for v in b.members
        )
        if not math.isclose(diam, node.radius, rel_tol=1e-12):
            raise ValueError("ultrametric matrix disagrees with the dendrogram radius")
    c = len(node.children)
    child_mass = float(nu.of(node)) / c
    gamma = -(node.radius**-alpha) * c * child_mass
    walk = node
    anc = node.parent
    while anc is not None:
        gamma -= anc.radius**-alpha * float(nu.of(anc) - nu.of(walk))
        walk, anc = anc, anc.parent
    return gamma


# --- disc-constant block -----------------------------------------------------------


def laplacian_block_modes(
    spec: KernelSpec,
    assign: DiscAssignment,
    disc: Discretization,
    measure: str = "haar",
    tree_measure: TreeMeasure | None = None,
) -> list[EigenPair]:
    """Eigenpairs of the vertex-level matrix k(v,w) * mass(U_w), lifted to
    functions constant on each disc and normalised in the cell inner
    product.  All eigenvalues are non-positive."""
    labels = spec.labels
    p, m = assign.p, assign.m
    if measure == "haar":
        mass = np.full(len(labels), float(p) ** -m)
    elif measure == "nu":
        if tree_measure is None:
            raise ValueError("nu measure requires a TreeMeasure")
        mass = np.array([float(tree_measure.leaf_mass(l)) for l in labels])
    else:
        raise ValueError(f"unknown measure {measure!r}")
    rates = spec.cross_rates()
    L = rates * mass[None, :]
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    evals, vecs, _ = weighted_symmetric_eig(L, mass)
    idx = spec.label_index()
    leaf_idx = np.array([idx[l] for l in disc.leaf_labels])
    out = []
    for k in range(len(labels)):
        lifted = vecs[leaf_idx, k]
        out.append(EigenPair("block", "discs", k, float(evals[k]), lifted))
    return out


def verify_eigenpair(A: GeneratorMatrix, psi: np.ndarray, lam: float) -> float:
    """Relative residual ||A psi - lam psi||_inf / max(1, |lam|): the
    universal oracle for every closed-form eigenvalue."""
    psi = np.asarray(psi)
    if psi.shape != (A.n_cells,):
        raise DimensionMismatch(f"vector of length {psi.shape} against {A.n_cells} cells")
    r = A.matrix @ psi - lam * psi
    return float(np.max(np.abs(r)) / max(1.0, abs(lam)))


# --- full bases ----------------------------------------------------------------------


def _balls_inside(assign: DiscAssignment, disc: Discretization, label) -> list[PAdicCell]:
    """All balls of level m..n-1 inside the labelled vertex disc."""
    prefix = assign.discs[label]
    out = [prefix]
    for d in range(assign.m + 1, disc.level):
        for suffix in itertools.product(range(assign.p), repeat=d - assign.m):
            out.append(PAdicCell(assign.p, prefix.digits + suffix))
    return out


def full_basis(
    spec: KernelSpec,
    assign: DiscAssignment,
    disc: Discretization,
    measure: str = "haar",
    tree_measure: TreeMeasure | None = None,
) -> EigenBasis:
    """Complete orthonormal eigenbasis of the level-n space.

    Haar measure: Kozyrev wavelets over every ball inside every disc plus
    the disc-constant block modes.  Tree measure with the ultrametric
    kernel: the constant, the ultrametric wavelets, and the Kozyrev
    wavelets (renormalised); other kernels replace the wavelet block by
    the measure-weighted block modes.  Residuals are stamped against the
    assembled generator.
    """
    gen = generator(spec, assign, disc, measure, tree_measure)
    p = assign.p
    pairs: list[EigenPair] = []

    if measure == "nu":
        if tree_measure is None:
            raise ValueError("nu measure requires a TreeMeasure")
        nu_masses = {l: float(tree_measure.leaf_mass(l)) for l in assign.labels}

    for label in assign.labels:
        if measure == "nu":
            s_v = nu_masses[label] * float(p) ** assign.m
        for B in _balls_inside(assign, disc, label):
            lam = kozyrev_eigenvalue(spec, assign, B, label, measure, tree_measure)
            for j in range(1, p):
                psi = kozyrev_wavelet(assign, disc, B, j)
                if measure == "nu":
                    psi = psi / math.sqrt(s_v)
                pairs.append(EigenPair("kozyrev", f"{label}:{B}", j, lam, psi))

    if measure == "haar":
        pairs.extend(laplacian_block_modes(spec, assign, disc, measure, tree_measure))
    elif spec.bullet is Bullet.ULTRAMETRIC:
        dend = assign.dendrogram
        pairs.append(
            EigenPair("constant", "domain", 0, 0.0, np.ones(len(disc.cells), dtype=float))
        )
        delta = dend.delta_matrix()
        for node in dend.internal_nodes():
            gamma = ultrametric_eigenvalue(dend, delta, tree_measure, node, spec.alpha)
            for k in range(1, len(node.children)):
                psi = ultrametric_wavelet(dend, tree_measure, disc, node, k)
                support = ",".join(sorted(map(str, node.members)))
                pairs.append(EigenPair("ultrametric", support, k, gamma, psi))
    else:
        pairs.extend(laplacian_block_modes(spec, assign, disc, measure, tree_measure))

    if len(pairs) != len(disc.cells):
        raise IncompleteBasis(f"{len(pairs)} basis functions for {len(disc.cells)} cells")
    stamped = tuple(pr.with_residual(verify_eigenpair(gen, pr.psi, pr.lam)) for pr in pairs)
    return EigenBasis(stamped, disc.cells, gen.measure, measure)
