"""Dense symmetric eigensolves in a measure-weighted inner product."""

from __future__ import annotations

import numpy as np


def weighted_symmetric_eig(L: np.ndarray, masses: np.ndarray, degenerate_gap: float = 1e-9):
    """Eigenpairs of an operator self-adjoint w.r.t. diag(masses).

    Works on the symmetrisation S = D^(1/2) L D^(-1/2); eigenvectors are
    mapped back so that columns are orthonormal in the weighted inner
    product.  Eigenvalues closer than ``degenerate_gap`` are treated as
    one multiplet and re-orthonormalised jointly; signs are fixed so the
    output is reproducible.

    Returns (eigenvalues ascending, eigenvector columns, multiplicities).
    """
    masses = np.asarray(masses, dtype=float)
    if np.any(masses <= 0):
        raise ValueError("masses must be positive")
    d = np.sqrt(masses)
    S = L * d[:, None] / d[None, :]
    asym = np.max(np.abs(S - S.T))
    scale = max(1.0, float(np.max(np.abs(S))))
    if asym > 1e-8 * scale:
        raise ValueError(f"operator is not symmetric under the given measure (defect {asym:g})")
    S = 0.5 * (S + S.T)
    evals, Q = np.linalg.eigh(S)

    # group numerically degenerate clusters and re-orthonormalise each
    mults = np.ones(len(evals), dtype=int)
    start = 0
    while start < len(evals):
        stop = start + 1
        while stop < len(evals) and evals[stop] - evals[stop - 1] < degenerate_gap:
            stop += 1
        if stop - start > 1:
            block, _ = np.linalg.qr(Q[:, start:stop])
            Q[:, start:stop] = block
            mults[start:stop] = stop - start
        start = stop

    for k in range(Q.shape[1]):
        col = Q[:, k]
        pivot = int(np.argmax(np.abs(col)))
        if col[pivot] < 0:
            Q[:, k] = -col
    vectors = Q / d[:, None]
    return evals, vectors, mults
