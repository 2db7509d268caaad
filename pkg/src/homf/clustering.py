"""Spectral clustering of the hypergraph kernel.

Normalized symmetric Laplacian embedding (row-normalized eigenvectors of the
c smallest eigenvalues) followed by seeded k-means.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg
from sklearn.cluster import KMeans

from .exceptions import NoConvergence, SingularKernelWarning

# Row degrees this far below the maximum cannot be normalized meaningfully
# and are treated as isolated vertices.
ISOLATION_REL_TOL = 1e-120

KMEANS_RESTARTS = 20
KMEANS_MAX_ITER = 100


def symmetric_eigen(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(matrix).max()))
    if np.abs(matrix - matrix.T).max() > 1e-8 * scale:
        raise ValueError("matrix is not symmetric within 1e-8")
    try:
        values, vectors = np.linalg.eigh((matrix + matrix.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence("eigendecomposition failed") from exc
    return values, vectors


def _kmeans_labels(rows: np.ndarray, c: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    km = KMeans(
        n_clusters=c,
        init="k-means++",
        n_init=KMEANS_RESTARTS,
        max_iter=KMEANS_MAX_ITER,
        random_state=seed % (2**31),
    ).fit(rows)
    return km.labels_.astype(np.int64), km.cluster_centers_


def spectral_cluster(kernel: np.ndarray, c: int, seed: int) -> np.ndarray:
    """Partition the kernel's vertices into ``c`` groups.

    Isolated vertices (zero row degree up to floating-point noise) are left
    out of the eigensolve and assigned to the centroid nearest the origin of
    the embedding. Warns with SingularKernelWarning when ``c`` exceeds the
    kernel's numerical rank plus one; labels are then best-effort.
    """
    kernel = np.asarray(kernel, dtype=np.float64)
    n = kernel.shape[0]
    if kernel.ndim != 2 or kernel.shape[1] != n:
        raise ValueError("kernel must be square")
    if not 1 <= c <= n:
        raise ValueError(f"cluster count {c} out of range [1, {n}]")
    scale = max(1.0, float(np.abs(kernel).max()))
    if np.abs(kernel - kernel.T).max() > 1e-8 * scale:
        raise ValueError("kernel is not symmetric within 1e-8")
    if c == 1:
        return np.zeros(n, dtype=np.int64)

    degrees = kernel.sum(axis=1)
    max_degree = degrees.max()
    if max_degree <= 0.0:
        warnings.warn("kernel has no edges; all labels default to 0", SingularKernelWarning)
        return np.zeros(n, dtype=np.int64)
    isolated = degrees <= ISOLATION_REL_TOL * max_degree
    core = ~isolated
    core_idx = np.flatnonzero(core)
    n_core = core_idx.size

    labels = np.zeros(n, dtype=np.int64)
    if n_core <= c:
        # too few connected vertices to form c groups
        warnings.warn(
            f"only {n_core} connected vertices for c={c} clusters", SingularKernelWarning
        )
        labels[core_idx] = np.arange(n_core) % c
        return labels

    inv_sqrt = 1.0 / np.sqrt(degrees[core_idx])
    K = kernel[np.ix_(core_idx, core_idx)]
    L = -K * inv_sqrt[:, None] * inv_sqrt[None, :]
    np.fill_diagonal(L, 1.0 + np.diagonal(L))
    L = (L + L.T) / 2.0
    eigenvalues, vectors = scipy.linalg.eigh(L, subset_by_index=(0, c - 1))

    # eigenvalue 1 of L corresponds to a zero eigenvalue of the normalized
    # kernel; count the informative embedding directions
    informative = int(np.sum(1.0 - eigenvalues > 1e-10))
    if informative + 1 < c:
        warnings.warn(
            f"kernel numerical rank {informative} supports at most "
            f"{informative + 1} clusters, requested {c}",
            SingularKernelWarning,
        )

    norms = np.linalg.norm(vectors, axis=1)
    safe = norms > 1e-300
    rows = np.zeros_like(vectors)
    rows[safe] = vectors[safe] / norms[safe, None]
    core_labels, centroids = _kmeans_labels(rows, c, seed)
    labels[core_idx] = core_labels
    if isolated.any():
        # isolated vertices embed at the origin
        labels[isolated] = int(np.argmin(np.linalg.norm(centroids, axis=1)))
    return labels
