"""Shared numeric primitives and the value types used across the package.

Every operation here is a pure function of immutable inputs. Arrays stored on
the value types are defensively copied and marked read-only, so instances are
safe to share between threads.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Tolerances fixed by the data contracts (exercised directly in the tests).
SYMMETRY_ATOL = 1e-12
ORTHOGONALITY_ATOL = 1e-10
PINV_RCOND = 1e-10

# Order above which a subset eigensolver beats a full decomposition.
_EIGH_SUBSET_MIN_ORDER = 192


class StressTuneError(Exception):
    """Base class for domain errors raised by this package."""


class DisconnectedGraphError(StressTuneError):
    """An operation that needs a connected (sub)graph got a disconnected one."""


class DegenerateGeometryError(StressTuneError):
    """A point set is affinely degenerate where full affine span is required."""


class EigenSolverError(StressTuneError):
    """The symmetric eigensolver failed to converge."""


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    out = np.array(values, dtype=dtype, order="C", copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Configuration:
    """An indexed set of n points in R^p, stored as an (n, p) float array."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=np.float64, order="C", copy=True)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array of shape (n, p)")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("need n >= 1 points with dimension p >= 1")
        if not np.isfinite(pts).all():
            raise ValueError("coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def p(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class DenseSymmetricMatrix:
    """Square symmetric float matrix, checked for symmetry at construction.

    ``+inf`` entries are permitted only when ``allow_infinite`` is set (used
    by shortest-path completion to mark unreachable pairs); NaN never is.
    """

    values: np.ndarray
    allow_infinite: bool = False

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("matrix must be square")
        if np.isnan(v).any():
            raise ValueError("matrix entries must not be NaN")
        if np.isneginf(v).any():
            raise ValueError("matrix entries must not be -inf")
        if not self.allow_infinite and np.isinf(v).any():
            raise ValueError("infinite entries are not permitted here")
        both_inf = np.isinf(v) & np.isinf(v.T)
        masked = np.where(both_inf, 0.0, v)
        gap = np.abs(masked - masked.T)
        if gap.max(initial=0.0) > SYMMETRY_ATOL:
            raise ValueError(
                f"matrix is not symmetric within {SYMMETRY_ATOL:g} (max gap {gap.max():g})"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def order(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class RigidMap:
    """Orthogonal map plus translation, ``x -> Q x + t``.

    ``allow_reflection`` records whether det(Q) = -1 was permitted when the
    map was fitted; a reflecting Q with ``allow_reflection=False`` is invalid.
    """

    Q: np.ndarray
    t: np.ndarray
    allow_reflection: bool = True

    def __post_init__(self):
        Q = _frozen_array(self.Q)
        t = _frozen_array(self.t)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be square")
        p = Q.shape[0]
        if t.shape != (p,):
            raise ValueError("t must have shape (p,)")
        if not (np.isfinite(Q).all() and np.isfinite(t).all()):
            raise ValueError("rigid map entries must be finite")
        gap = np.abs(Q.T @ Q - np.eye(p)).max()
        if gap > ORTHOGONALITY_ATOL:
            raise ValueError(f"Q is not orthogonal within {ORTHOGONALITY_ATOL:g}")
        if not self.allow_reflection and np.linalg.det(Q) < 0:
            raise ValueError("Q reflects but reflections were not permitted")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "t", t)

    @property
    def p(self) -> int:
        return self.Q.shape[0]

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply the map to an (n, p) array of row points."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.Q.T + self.t

    def apply_configuration(self, config: Configuration) -> Configuration:
        return Configuration(self.apply(config.points))


def pairwise_sq_distances(config: Configuration) -> DenseSymmetricMatrix:
    """Matrix of squared Euclidean distances ``||x_i - x_j||^2``.

    Computed from coordinate differences (not a Gram-matrix identity), so
    entries are exactly symmetric and the diagonal is exactly zero.
    """
    X = config.points
    n, p = X.shape
    out = np.empty((n, n))
    block = max(1, int(4_000_000 // max(1, n * p)))
    for s in range(0, n, block):
        d = X[s : s + block, None, :] - X[None, :, :]
        out[s : s + block] = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(out, 0.0)
    return DenseSymmetricMatrix(out)


def double_center(matrix: DenseSymmetricMatrix) -> DenseSymmetricMatrix:
    """Subtract row and column means and add back the grand mean.

    For symmetric input the column means equal the row means, so a single
    mean vector is used; the result is re-symmetrized to keep the strict
    symmetry invariant under floating-point reassociation.
    """
    A = matrix.values
    if matrix.allow_infinite and np.isinf(A).any():
        raise ValueError("cannot double-center a matrix with infinite entries")
    r = A.mean(axis=1)
    B = A - r[:, None] - r[None, :] + A.mean()
    B = (B + B.T) / 2.0
    return DenseSymmetricMatrix(B)


def _top_eigenpairs_array(B: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    k = B.shape[0]
    try:
        if k <= _EIGH_SUBSET_MIN_ORDER or p > k // 4:
            vals, vecs = np.linalg.eigh(B)
            vals = vals[::-1][:p].copy()
            vecs = vecs[:, ::-1][:, :p].copy()
        else:
            vals, vecs = scipy.linalg.eigh(B, subset_by_index=[k - p, k - 1])
            vals = vals[::-1].copy()
            vecs = vecs[:, ::-1].copy()
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise EigenSolverError(f"eigendecomposition did not converge: {exc}") from exc
    return vals, vecs


def top_eigenpairs(matrix: DenseSymmetricMatrix, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Largest ``p`` eigenvalues (descending) and matching orthonormal eigenvectors.

    Returns ``(values, vectors)`` with ``values`` of shape (p,) and
    ``vectors`` of shape (k, p), one eigenvector per column.
    """
    if np.isinf(matrix.values).any():
        raise ValueError("matrix must have finite entries")
    k = matrix.order
    if not 1 <= p <= k:
        raise ValueError(f"p must be in [1, {k}], got {p}")
    return _top_eigenpairs_array(matrix.values, p)


def pseudo_inverse(Y: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rcond`` times the largest are treated as zero.
    """
    A = np.asarray(Y, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    if not np.isfinite(A).all():
        raise ValueError("entries must be finite")
    return np.linalg.pinv(A, rcond=rcond)


def affine_rank(points: np.ndarray, rcond: float = PINV_RCOND) -> int:
    """Dimension of the affine span of row points (singular values above cutoff)."""
    X = np.asarray(points, dtype=np.float64)
    if X.shape[0] == 0:
        return 0
    centered = X - X.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rcond * s[0]))


def write_configuration_csv(config: Configuration, path: str | os.PathLike) -> None:
    """Write ``id,x1,...,xp`` rows; floats use repr so reads round-trip exactly."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + [f"x{d + 1}" for d in range(config.p)])
        for i, row in enumerate(config.points):
            writer.writerow([i] + [repr(float(x)) for x in row])


def read_configuration_csv(path: str | os.PathLike) -> Configuration:
    """Read a configuration written by :func:`write_configuration_csv`."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0] != "id":
            raise ValueError(f"{path}: expected header id,x1,...,xp")
        p = len(header) - 1
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != p + 1:
                raise ValueError(f"{path}: row {lineno} has {len(rec)} fields, expected {p + 1}")
            try:
                idx = int(rec[0])
                coords = [float(x) for x in rec[1:]]
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from exc
            rows.append((idx, coords))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    ids = [r[0] for r in rows]
    if ids != list(range(len(rows))):
        raise ValueError(f"{path}: ids must be 0..n-1 without gaps")
    return Configuration(np.array([r[1] for r in rows]))
