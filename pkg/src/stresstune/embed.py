"""Embedding routines: classical scaling, shortest-path MDS, stress
majorization, and least-squares trilateration against fixed landmarks.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import (
    PINV_RCOND,
    Configuration,
    DegenerateGeometryError,
    DenseSymmetricMatrix,
    DisconnectedGraphError,
    StressTuneError,
    _top_eigenpairs_array,
    affine_rank,
    pseudo_inverse,
)
from .graph import DissimilarityGraph, all_pairs_shortest_paths, is_connected

# Distances below this are treated as zero inside the majorization update.
_SMACOF_DIST_FLOOR = 1e-12

SMACOF_MAX_ITER = 300
SMACOF_TOL = 1e-6


def _double_center_array(A: np.ndarray) -> np.ndarray:
    r = A.mean(axis=1)
    B = A - r[:, None] - r[None, :] + A.mean()
    return (B + B.T) / 2.0


def _classical_scaling_array(D: np.ndarray, p: int) -> np.ndarray:
    A = -0.5 * D * D
    B = _double_center_array(A)
    vals, vecs = _top_eigenpairs_array(B, p)
    Y = vecs * np.sqrt(np.clip(vals, 0.0, None))
    return Y - Y.mean(axis=0)


def classical_scaling(D: DenseSymmetricMatrix, p: int) -> Configuration:
    """Classical (Torgerson) scaling of a complete dissimilarity matrix.

    Squares the entries, double-centers, takes the top ``p`` eigenpairs and
    scales eigenvectors by the square roots of the eigenvalues, clamping
    negative eigenvalues to zero. The output is centered at the origin.
    """
    V = D.values
    if np.isinf(V).any():
        raise StressTuneError("dissimilarity matrix is incomplete (infinite entries)")
    if (V < 0).any():
        raise ValueError("dissimilarities must be nonnegative")
    diag = np.abs(np.diag(V))
    if diag.max(initial=0.0) > 1e-12 * (1.0 + V.max(initial=0.0)):
        raise ValueError("dissimilarity matrix must have a zero diagonal")
    if not 1 <= p <= D.order:
        raise ValueError(f"p must be in [1, {D.order}]")
    return Configuration(_classical_scaling_array(V, p))


def strain(config: Configuration, B: DenseSymmetricMatrix) -> float:
    """Sum over unordered pairs of ``(<y_i, y_j> - b_ij)^2``.

    ``B`` is the double-centered Gram target; classical scaling minimizes
    this objective over rank-``p`` Gram factorizations.
    """
    if config.n != B.order:
        raise ValueError("configuration and matrix sizes disagree")
    G = config.points @ config.points.T
    M = (G - B.values) ** 2
    return float((M.sum() - np.trace(M)) / 2.0)


def mds_d(g: DissimilarityGraph, p: int) -> Configuration:
    """Classical scaling after shortest-path completion of the missing pairs."""
    if not is_connected(g):
        raise DisconnectedGraphError("graph must be connected for shortest-path completion")
    return classical_scaling(all_pairs_shortest_paths(g), p)


def _smacof(
    n: int,
    ei: np.ndarray,
    ej: np.ndarray,
    d: np.ndarray,
    Y0: np.ndarray,
    max_iter: int,
    tol: float,
) -> tuple[np.ndarray, list[float]]:
    """Guttman majorization of ``sum_E (||y_i - y_j|| - d_ij)^2`` (unit weights).

    Returns the final iterate and the stress value at every accepted iterate;
    the sequence is nonincreasing (a step that fails to decrease is dropped).
    """

    def edge_dists(Y):
        diff = Y[ei] - Y[ej]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    Y = np.array(Y0, dtype=np.float64)
    dist = edge_dists(Y)
    stress = float(((dist - d) ** 2).sum())
    history = [stress]
    if stress == 0.0 or max_iter < 1 or ei.size == 0:
        return Y, history

    # V is the unit-weight graph Laplacian; adding J/n shifts its null space
    # so a Cholesky solve applies V^+ exactly to vectors orthogonal to 1.
    L = np.zeros((n, n))
    np.add.at(L, (ei, ei), 1.0)
    np.add.at(L, (ej, ej), 1.0)
    np.add.at(L, (ei, ej), -1.0)
    np.add.at(L, (ej, ei), -1.0)
    factor = cho_factor(L + 1.0 / n, lower=True)

    p = Y.shape[1]
    for _ in range(max_iter):
        safe = np.where(dist < _SMACOF_DIST_FLOOR, 1.0, dist)
        ratio = np.where(dist < _SMACOF_DIST_FLOOR, 0.0, d / safe)
        BY = np.empty_like(Y)
        for dim in range(p):
            contrib = ratio * (Y[ei, dim] - Y[ej, dim])
            BY[:, dim] = np.bincount(ei, weights=contrib, minlength=n) - np.bincount(
                ej, weights=contrib, minlength=n
            )
        Y_new = cho_solve(factor, BY)
        dist_new = edge_dists(Y_new)
        stress_new = float(((dist_new - d) ** 2).sum())
        if stress_new > stress:
            break
        Y, dist = Y_new, dist_new
        decrease = stress - stress_new
        stress = stress_new
        history.append(stress)
        if stress == 0.0 or decrease < tol * (stress + decrease):
            break
    return Y, history


def smacof_refine(
    g: DissimilarityGraph,
    start: Configuration,
    max_iter: int = SMACOF_MAX_ITER,
    tol: float = SMACOF_TOL,
    return_history: bool = False,
):
    """Refine a configuration by majorizing the edge-restricted stress.

    Only observed edges enter the objective (unit weights). Stops when the
    relative stress decrease falls below ``tol`` or after ``max_iter`` steps.
    With ``return_history`` the per-iterate stress values are returned too.
    """
    if start.n != g.n:
        raise ValueError("start configuration must cover every node")
    if max_iter < 0:
        raise ValueError("max_iter must be nonnegative")
    if not is_connected(g):
        raise DisconnectedGraphError("stress majorization requires a connected graph")
    Y, history = _smacof(g.n, g.ei, g.ej, g.weights, start.points, max_iter, tol)
    result = Configuration(Y)
    if return_history:
        return result, history
    return result


def trilaterate(landmarks: Configuration, dissimilarities) -> np.ndarray:
    """Place one point from squared distances to ``m >= p+1`` fixed landmarks.

    Landmarks are centered internally (the closed-form solve presumes a zero
    centroid) and the centroid is added back. Exact when the inputs are
    realizable; least-squares otherwise.
    """
    d = np.asarray(dissimilarities, dtype=np.float64).reshape(-1)
    Y = landmarks.points
    m, p = Y.shape
    if d.shape[0] != m:
        raise ValueError("need one dissimilarity per landmark")
    if m < p + 1:
        raise ValueError(f"need at least p+1={p + 1} landmarks, got {m}")
    if not np.isfinite(d).all() or (d < 0).any():
        raise ValueError("dissimilarities must be finite and nonnegative")
    if affine_rank(Y, rcond=PINV_RCOND) < p:
        raise DegenerateGeometryError("landmarks are affinely degenerate")
    c = Y.mean(axis=0)
    Yc = Y - c
    sq = np.einsum("ij,ij->i", Yc, Yc)
    a = (sq.sum() + m * sq) / m - 2.0 * (Yc @ Yc.sum(axis=0)) / m
    # a_j = mean_i ||y_i - y_j||^2, expanded to avoid an m x m intermediate
    return 0.5 * (pseudo_inverse(Yc) @ (a - d * d)) + c
