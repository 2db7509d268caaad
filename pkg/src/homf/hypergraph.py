"""Iterative hyperedge optimization and affinity/kernel assembly.

A hyperedge is one model hypothesis together with its relation to every
data point. Optimization repeatedly refits the hypothesis on a small block
of vertices ranked just at the minimum tolerable structure size and stops
early once the ranked weights stabilize over three iterations. Columns of
exponential affinities stack into the n x m matrix H whose Gram product
G = H H^T is the kernel that spectral clustering partitions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import geometry, kde
from .exceptions import DegenerateSubset, ZeroSpread
from .geometry import Model
from .kde import ScaleEstimate

DEFAULT_T_MAX = 10
DEFAULT_Q_FRACTION = 0.1


@dataclass
class IHOConfig:
    """Hyperedge optimization parameters.

    q: minimum tolerable structure size (ranked cutoff, default 0.1 * n).
    block: refit window parameter, two above the minimal subset size;
        each iteration refits the block + 1 vertices at ranks q-block .. q.
    t_max: iteration cap.
    """

    q: int
    block: int
    t_max: int = DEFAULT_T_MAX

    def __post_init__(self):
        if self.block < 3:
            raise ValueError("refit window parameter must be >= 3")
        if self.q < self.block + 1:
            raise ValueError(f"q={self.q} must be >= block+1={self.block + 1}")
        if self.t_max < 1:
            raise ValueError("t_max must be >= 1")


@dataclass
class Hyperedge:
    """An optimized hypothesis plus its per-vertex evidence.

    ``scale`` and ``significant`` are attached after adaptive inlier
    estimation runs on the optimized model; ``valid`` is False when weighting
    degenerated and the hyperedge must not enter the affinity matrix.
    """

    model: Model
    weights: np.ndarray | None
    scale: ScaleEstimate | None
    significant: np.ndarray | None
    iterations_used: int
    converged: bool
    valid: bool = True

    def with_evidence(self, scale: ScaleEstimate, significant: np.ndarray) -> "Hyperedge":
        return replace(self, scale=scale, significant=significant)


def _ranked_squared_weights(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices and squared weights sorted by descending weight, ties by index."""
    order = np.argsort(-weights, kind="stable")
    return order, weights[order] ** 2


def exit_criterion(history: list[np.ndarray], q: int, block: int) -> bool:
    """Three-iteration stability test on ranked squared weights.

    ``history`` holds the descending-sorted squared weights of the most
    recent iterations, oldest first. True when the current rank-q squared
    weight is below the rank q-block..q block sums of both previous
    iterations; always False with fewer than three iterations recorded.
    """
    if len(history) < 3:
        return False
    current, prev1, prev2 = history[-1], history[-2], history[-3]
    w2_q = current[q - 1]
    lo = q - block - 1
    return bool(w2_q < prev1[lo:q].sum() and w2_q < prev2[lo:q].sum())


def optimize_hyperedge(initial: Model, data: np.ndarray, config: IHOConfig) -> Hyperedge:
    """Iteratively refit a hypothesis on its rank q-block..q vertices.

    Per iteration: residuals, kernel weights, rank vertices by descending
    weight (ascending residual), refit on the block+1 vertices ending at
    rank q, then test the exit criterion. A degenerate refit aborts with the
    last valid iterate flagged not-converged; a degenerate weighting flags
    the hyperedge invalid.
    """
    n = len(data)
    if config.q > n:
        raise ValueError(f"q={config.q} exceeds the number of points {n}")
    model = initial
    history: list[np.ndarray] = []
    iterations = 0
    converged = False
    last_weights: np.ndarray | None = None
    for t in range(1, config.t_max + 1):
        residuals = geometry.residuals(model, data)
        try:
            weights = kde.weight_scores(residuals)
        except ZeroSpread:
            return Hyperedge(model, last_weights, None, None, iterations, False, valid=False)
        last_weights = weights
        order, ranked_sq = _ranked_squared_weights(weights)
        history.append(ranked_sq)
        if len(history) > 3:
            history.pop(0)
        block_indices = order[config.q - config.block - 1 : config.q]
        try:
            model = geometry.refit(model.kind, data[block_indices])
        except DegenerateSubset:
            return Hyperedge(model, last_weights, None, None, iterations, False)
        iterations = t
        if exit_criterion(history, config.q, config.block):
            converged = True
            break
    # weights of the model actually returned (the last refit)
    final_residuals = geometry.residuals(model, data)
    try:
        final_weights = kde.weight_scores(final_residuals)
    except ZeroSpread:
        return Hyperedge(model, last_weights, None, None, iterations, converged, valid=False)
    return Hyperedge(model, final_weights, None, None, iterations, converged)


def affinity_column(
    weights: np.ndarray,
    residuals: np.ndarray,
    scale: ScaleEstimate,
    mode: str = "residual",
) -> np.ndarray:
    """One hyperedge's affinity to every vertex, entries in (0, 1].

    mode="residual" (default): exp(-r_i^2 / (2 sigma^2)), a Gaussian
    affinity in the hyperedge's own inlier scale. mode="literal":
    exp(-w_i / (2 sigma^2)) on the raw weighting scores, kept for fidelity
    experiments (it ranks inliers below outliers).
    """
    sigma = max(scale.scale, kde.SCALE_FLOOR)
    if mode == "residual":
        arg = np.asarray(residuals, dtype=np.float64) ** 2
    elif mode == "literal":
        arg = np.asarray(weights, dtype=np.float64)
    else:
        raise ValueError(f"unknown affinity mode {mode!r}")
    with np.errstate(over="ignore"):
        return np.exp(-arg / (2.0 * sigma * sigma))


def assemble_kernel(H: np.ndarray) -> np.ndarray:
    """Gram kernel G = H H^T, symmetrized against floating-point drift."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[1] < 1:
        raise ValueError("affinity matrix must be n x m with m >= 1")
    G = H @ H.T
    return (G + G.T) / 2.0
