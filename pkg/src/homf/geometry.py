"""Geometric model families: minimal-subset solvers, least-squares refits, residuals.

Data conventions used throughout the package:

- 2D points are float64 arrays of shape (n, 2), columns ``x, y``.
- two-view correspondences are float64 arrays of shape (n, 4), columns
  ``x1, y1, x2, y2`` (first view, second view).

Model parameterizations:

- ``LINE2D``: params (a, b, c) with a*x + b*y + c = 0 and a**2 + b**2 = 1,
  so |a*x + b*y + c| is the orthogonal point-to-line distance.
- ``HOMOGRAPHY``: 3x3 matrix with unit Frobenius norm mapping view 1 to view 2.
- ``FUNDAMENTAL``: 3x3 rank-2 matrix with unit Frobenius norm satisfying
  p2_hom^T F p1_hom = 0 for exact correspondences.

All parameter vectors carry a deterministic sign: the largest-magnitude
component is positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import DegenerateSubset, KindMismatch

# Normalization invariants must hold to this tolerance.
NORM_TOL = 1e-9

# Bounded retries when callers resample degenerate minimal subsets.
DEFAULT_RESAMPLE_BUDGET = 100


class ModelKind(Enum):
    """Supported model families with their minimal subset sizes."""

    LINE2D = "line"
    HOMOGRAPHY = "homography"
    FUNDAMENTAL = "fundamental"

    @property
    def minimal_size(self) -> int:
        """Number of observations that determine one hypothesis."""
        return {ModelKind.LINE2D: 2, ModelKind.HOMOGRAPHY: 4, ModelKind.FUNDAMENTAL: 8}[self]

    @property
    def block_size(self) -> int:
        """Refit window parameter: two above the minimal subset size."""
        return self.minimal_size + 2

    @property
    def data_width(self) -> int:
        """Number of columns an observation row has for this family."""
        return 2 if self is ModelKind.LINE2D else 4


@dataclass(frozen=True, eq=False)
class Model:
    """A fitted geometric hypothesis."""

    kind: ModelKind
    params: np.ndarray  # (3,) for LINE2D, (3, 3) otherwise

    @property
    def matrix(self) -> np.ndarray:
        if self.kind is ModelKind.LINE2D:
            raise KindMismatch("line models have no matrix form")
        return self.params


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    """Flip the vector so its largest-magnitude component is positive."""
    flat = vec.ravel()
    pivot = int(np.argmax(np.abs(flat)))
    if flat[pivot] < 0:
        return -vec
    return vec


def _check_data(data: np.ndarray, kind: ModelKind) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != kind.data_width:
        raise KindMismatch(
            f"{kind.value} expects (n, {kind.data_width}) data, got {data.shape}"
        )
    if not np.isfinite(data).all():
        raise ValueError("observations must be finite")
    return data


def hartley_normalization(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Translate points to their centroid and scale mean distance to sqrt(2).

    Returns the normalized points and the 3x3 similarity T with
    normalized_hom = T @ original_hom.
    """
    points = np.asarray(points, dtype=np.float64)
    centroid = points.mean(axis=0)
    centered = points - centroid
    mean_dist = np.linalg.norm(centered, axis=1).mean()
    if mean_dist < 1e-12:
        raise DegenerateSubset("all points coincide")
    s = np.sqrt(2.0) / mean_dist
    T = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    return centered * s, T


def _has_duplicates(points: np.ndarray, rel_tol: float = 1e-9) -> bool:
    span = max(1.0, float(np.abs(points).max()))
    tol = rel_tol * span
    diffs = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diffs**2).sum(axis=2))
    iu = np.triu_indices(len(points), k=1)
    return bool((dist[iu] < tol).any())


def _has_collinear_triple(points: np.ndarray, rel_tol: float = 1e-9) -> bool:
    from itertools import combinations

    span = max(1.0, float(np.abs(points).max()))
    tol = rel_tol * span * span
    for i, j, k in combinations(range(len(points)), 3):
        u = points[j] - points[i]
        v = points[k] - points[i]
        if abs(u[0] * v[1] - u[1] * v[0]) < tol:
            return True
    return False


# ---------------------------------------------------------------------------
# Line fitting
# ---------------------------------------------------------------------------


def _fit_line(points: np.ndarray) -> Model:
    """Orthogonal (total least squares) line through >= 2 points."""
    centroid = points.mean(axis=0)
    centered = points - centroid
    span = max(1.0, float(np.abs(points).max()))
    if np.linalg.norm(centered, axis=1).max() < 1e-9 * span:
        raise DegenerateSubset("all points coincide")
    scatter = centered.T @ centered
    _, eigvecs = np.linalg.eigh(scatter)
    a, b = eigvecs[:, 0]  # smallest-eigenvalue direction = line normal
    c = -(a * centroid[0] + b * centroid[1])
    params = np.array([a, b, c]) / np.hypot(a, b)
    return Model(ModelKind.LINE2D, _fix_sign(params))


# ---------------------------------------------------------------------------
# Homography fitting (normalized DLT)
# ---------------------------------------------------------------------------


def _homography_design(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """Stacked 2n x 9 DLT system for p2 ~ H p1."""
    n = len(p1)
    x, y = p1[:, 0], p1[:, 1]
    u, v = p2[:, 0], p2[:, 1]
    A = np.zeros((2 * n, 9))
    A[0::2, 0] = -x
    A[0::2, 1] = -y
    A[0::2, 2] = -1.0
    A[0::2, 6] = x * u
    A[0::2, 7] = y * u
    A[0::2, 8] = u
    A[1::2, 3] = -x
    A[1::2, 4] = -y
    A[1::2, 5] = -1.0
    A[1::2, 6] = x * v
    A[1::2, 7] = y * v
    A[1::2, 8] = v
    return A


def fit_homography(correspondences: np.ndarray, normalize: bool = True) -> Model:
    """DLT homography from >= 4 correspondences.

    ``normalize`` applies Hartley normalization to both views before the
    solve; disabling it is only useful for conditioning experiments.
    """
    corr = _check_data(correspondences, ModelKind.HOMOGRAPHY)
    n = len(corr)
    if n < 4:
        raise DegenerateSubset(f"homography needs >= 4 correspondences, got {n}")
    p1, p2 = corr[:, :2], corr[:, 2:]
    if n == 4:
        # DLT rank checks are unreliable for exactly-minimal subsets;
        # test the geometry explicitly.
        if _has_duplicates(p1) or _has_duplicates(p2):
            raise DegenerateSubset("duplicate points in minimal subset")
        if _has_collinear_triple(p1) or _has_collinear_triple(p2):
            raise DegenerateSubset("three collinear points in minimal subset")
    if normalize:
        p1n, T1 = hartley_normalization(p1)
        p2n, T2 = hartley_normalization(p2)
    else:
        p1n, T1 = p1, np.eye(3)
        p2n, T2 = p2, np.eye(3)
    A = _homography_design(p1n, p2n)
    _, s, Vt = np.linalg.svd(A)
    if s[7] < 1e-10 * s[0]:
        raise DegenerateSubset("rank-deficient homography system")
    Hn = Vt[-1].reshape(3, 3)
    H = np.linalg.inv(T2) @ Hn @ T1
    norm = np.linalg.norm(H)
    if norm < 1e-15 or abs(np.linalg.det(H / norm)) < 1e-12:
        raise DegenerateSubset("singular homography")
    return Model(ModelKind.HOMOGRAPHY, _fix_sign(H / norm))


# ---------------------------------------------------------------------------
# Fundamental matrix fitting (normalized eight-point)
# ---------------------------------------------------------------------------


def _fundamental_design(p1: np.ndarray, p2: np.ndarray) -> np.ndarray:
    """n x 9 system for p2_hom^T F p1_hom = 0."""
    x1, y1 = p1[:, 0], p1[:, 1]
    x2, y2 = p2[:, 0], p2[:, 1]
    return np.column_stack(
        [x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2, x1, y1, np.ones(len(p1))]
    )


def fit_fundamental(correspondences: np.ndarray, normalize: bool = True) -> Model:
    """Eight-point fundamental matrix with rank-2 projection."""
    corr = _check_data(correspondences, ModelKind.FUNDAMENTAL)
    n = len(corr)
    if n < 8:
        raise DegenerateSubset(f"fundamental needs >= 8 correspondences, got {n}")
    p1, p2 = corr[:, :2], corr[:, 2:]
    if n == 8 and (_has_duplicates(p1) or _has_duplicates(p2)):
        raise DegenerateSubset("duplicate points in minimal subset")
    if normalize:
        p1n, T1 = hartley_normalization(p1)
        p2n, T2 = hartley_normalization(p2)
    else:
        p1n, T1 = p1, np.eye(3)
        p2n, T2 = p2, np.eye(3)
    A = _fundamental_design(p1n, p2n)
    _, s, Vt = np.linalg.svd(A)
    if s[7] < 1e-10 * s[0]:
        raise DegenerateSubset("rank-deficient eight-point system")
    Fn = Vt[-1].reshape(3, 3)
    U, S, Vt2 = np.linalg.svd(Fn)
    S[2] = 0.0  # rank-2 projection
    Fn = U @ np.diag(S) @ Vt2
    F = T2.T @ Fn @ T1
    norm = np.linalg.norm(F)
    if norm < 1e-15:
        raise DegenerateSubset("vanishing fundamental matrix")
    return Model(ModelKind.FUNDAMENTAL, _fix_sign(F / norm))


# ---------------------------------------------------------------------------
# Public fit / residual API
# ---------------------------------------------------------------------------


def fit_minimal(kind: ModelKind, subset: np.ndarray) -> Model:
    """Fit one hypothesis from a minimal subset (exact interpolation).

    Raises DegenerateSubset for duplicate points, collinear quads and other
    zero-area configurations; callers are expected to resample.
    """
    subset = _check_data(subset, kind)
    p = kind.minimal_size
    if len(subset) != p:
        raise ValueError(f"{kind.value} minimal subset has size {p}, got {len(subset)}")
    return refit(kind, subset)


def refit(kind: ModelKind, subset: np.ndarray) -> Model:
    """Least-squares fit from >= minimal_size observations.

    Orthogonal regression for lines, normalized DLT for homographies and
    the normalized eight-point solve (rank-2 projected) for fundamentals.
    """
    subset = _check_data(subset, kind)
    if len(subset) < kind.minimal_size:
        raise ValueError(
            f"{kind.value} refit needs >= {kind.minimal_size} observations, got {len(subset)}"
        )
    if kind is ModelKind.LINE2D:
        return _fit_line(subset)
    if kind is ModelKind.HOMOGRAPHY:
        return fit_homography(subset)
    return fit_fundamental(subset)


def _residuals_line(params: np.ndarray, points: np.ndarray) -> np.ndarray:
    a, b, c = params
    return np.abs(a * points[:, 0] + b * points[:, 1] + c)


def _project(H: np.ndarray, points: np.ndarray) -> np.ndarray:
    hom = np.column_stack([points, np.ones(len(points))]) @ H.T
    w = hom[:, 2]
    # keep far-from-plane points finite instead of dividing by ~0
    w = np.where(np.abs(w) < 1e-12, np.where(w < 0, -1e-12, 1e-12), w)
    return hom[:, :2] / w[:, None]


def _residuals_homography(H: np.ndarray, corr: np.ndarray) -> np.ndarray:
    p1, p2 = corr[:, :2], corr[:, 2:]
    fwd = np.linalg.norm(_project(H, p1) - p2, axis=1)
    try:
        Hinv = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSubset("singular homography has no backward transfer") from exc
    bwd = np.linalg.norm(_project(Hinv, p2) - p1, axis=1)
    return 0.5 * (fwd + bwd)


def _residuals_fundamental(F: np.ndarray, corr: np.ndarray) -> np.ndarray:
    p1 = np.column_stack([corr[:, :2], np.ones(len(corr))])
    p2 = np.column_stack([corr[:, 2:], np.ones(len(corr))])
    Fp1 = p1 @ F.T
    Ftp2 = p2 @ F
    num = np.abs(np.sum(p2 * Fp1, axis=1))
    den = np.sqrt(Fp1[:, 0] ** 2 + Fp1[:, 1] ** 2 + Ftp2[:, 0] ** 2 + Ftp2[:, 1] ** 2)
    den = np.maximum(den, 1e-15)
    return num / den


def residuals(model: Model, data: np.ndarray) -> np.ndarray:
    """Per-observation residual of ``data`` under ``model``, in data units.

    Orthogonal distance for lines, symmetric transfer error (mean of forward
    and backward reprojection distances) for homographies, first-order
    geometric (Sampson) distance for fundamentals.
    """
    data = _check_data(data, model.kind)
    if model.kind is ModelKind.LINE2D:
        return _residuals_line(model.params, data)
    if model.kind is ModelKind.HOMOGRAPHY:
        return _residuals_homography(model.params, data)
    return _residuals_fundamental(model.params, data)
