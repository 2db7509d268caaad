"""Adaptive inlier estimation: density weighting, entropy selection, scale.

Given the residual vector of a hypothesis, points are weighted by an
Epanechnikov kernel density evaluated at their residual, significant points
(the hypothesis's inliers) are selected by an entropy threshold on the
squared-weight gaps, and the inlier noise scale follows from the kappa-th
ordered significant residual and a normal quantile.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .exceptions import (
    AllEqualWeights,
    OutOfDomain,
    ScaleNonConvergenceWarning,
    TooFewSignificant,
    ZeroSpread,
)

# Epanechnikov kernel constants: the integrals of EK(u)^2 and u^2 EK(u)
# over [-1, 1]. Both are exact rationals (9/15 and 3/15).
EPANECHNIKOV_ROUGHNESS = 0.6
EPANECHNIKOV_SECOND_MOMENT = 0.2

# Consistency factor turning a median absolute deviation into a normal sigma.
MAD_TO_SIGMA = 1.4826

# Positive floor for estimated scales; exact-zero ordered residuals happen
# on noiseless data and the scale must stay strictly positive.
SCALE_FLOOR = 1e-12

DEFAULT_KAPPA = 10

IKOSE_MAX_ITER = 50
IKOSE_INLIER_MULTIPLIER = 2.5


@dataclass
class SignificanceResult:
    """Outcome of the entropy-threshold selection of significant points."""

    significant: np.ndarray  # bool mask, length n
    entropy: float  # nats
    gaps: np.ndarray  # max(w^2) - w_i^2
    priors: np.ndarray  # gaps / sum(gaps)


@dataclass
class ScaleEstimate:
    """Inlier noise scale with the order statistic that produced it."""

    scale: float
    kappa: int
    n_significant: int


def epanechnikov(u):
    """Epanechnikov kernel 0.75 * (1 - u^2) on [-1, 1], zero outside."""
    u = np.asarray(u, dtype=np.float64)
    value = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    if value.ndim == 0:
        return float(value)
    return value


def residual_spread(residuals: np.ndarray) -> float:
    """Spread S_r of a residual vector: its standard deviation.

    Zero exactly when all residuals are equal, which flags a degenerate
    hypothesis. The contaminated spread is what lets the kernel support
    cover the inlier population at any outlier ratio.
    """
    return float(np.std(np.asarray(residuals, dtype=np.float64)))


def bandwidth(residuals: np.ndarray) -> float:
    """Plug-in kernel bandwidth for a residual vector.

    b = [7 * R(K) / (n * mu2(K))]^0.2 * S_r with the Epanechnikov constants
    R(K) = 0.6, mu2(K) = 0.2 and S_r the spread of the residuals.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    n = residuals.size
    if n < 2:
        raise ValueError("bandwidth needs at least two residuals")
    spread = residual_spread(residuals)
    if spread == 0.0:
        raise ZeroSpread("residual spread is zero")
    return (7.0 * EPANECHNIKOV_ROUGHNESS / (n * EPANECHNIKOV_SECOND_MOMENT)) ** 0.2 * spread


def weight_scores(residuals: np.ndarray) -> np.ndarray:
    """Kernel-density weighting score EK(r_i / b) / (n * b) per point."""
    residuals = np.asarray(residuals, dtype=np.float64)
    b = bandwidth(residuals)
    n = residuals.size
    return epanechnikov(residuals / b) / (n * b)


def select_significant(weights: np.ndarray) -> SignificanceResult:
    """Split points into significant / insignificant by entropy threshold.

    Gaps xi_i = max(w^2) - w_i^2 define priors p_i = xi_i / sum(xi); a point
    is significant when -log p_i exceeds the prior entropy. Zero-gap points
    (maximal weight) are always significant since -log 0 = +inf.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if weights.size < 2:
        raise ValueError("significance selection needs at least two weights")
    w2 = weights**2
    gaps = w2.max() - w2
    total = gaps.sum()
    if total == 0.0:
        raise AllEqualWeights("all weighting scores are identical")
    priors = gaps / total
    positive = priors > 0.0
    entropy = float(-(priors[positive] * np.log(priors[positive])).sum())
    with np.errstate(divide="ignore"):
        neg_log = -np.log(priors)
    significant = neg_log > entropy
    return SignificanceResult(significant, entropy, gaps, priors)


def normal_quantile(p: float) -> float:
    """Standard normal quantile (inverse CDF)."""
    if not 0.0 < p < 1.0:
        raise OutOfDomain(f"quantile argument must lie in (0, 1), got {p}")
    return float(ndtri(p))


def inlier_scale(residuals: np.ndarray, significant: np.ndarray, kappa: int) -> ScaleEstimate:
    """Inlier noise scale from the kappa-th smallest significant residual.

    s = |r_(kappa)| / quantile((1 + kappa/n_sig) / 2), floored at a tiny
    positive value so noiseless data keeps the scale invariant s > 0.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    significant = np.asarray(significant, dtype=bool)
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    n_sig = int(significant.sum())
    if n_sig < kappa:
        raise TooFewSignificant(f"{n_sig} significant points < kappa={kappa}")
    ordered = np.sort(np.abs(residuals[significant]))
    r_kappa = float(ordered[kappa - 1])
    arg = (1.0 + kappa / n_sig) / 2.0
    if arg >= 1.0:  # kappa == n_sig
        scale = SCALE_FLOOR
    else:
        scale = max(r_kappa / normal_quantile(arg), SCALE_FLOOR)
    return ScaleEstimate(scale, kappa, n_sig)


def aie_scale(residuals: np.ndarray, kappa: int = DEFAULT_KAPPA) -> ScaleEstimate:
    """Full adaptive chain: weights -> significant set -> inlier scale.

    kappa is capped at the number of significant points.
    """
    weights = weight_scores(residuals)
    selection = select_significant(weights)
    n_sig = int(selection.significant.sum())
    return inlier_scale(residuals, selection.significant, min(kappa, n_sig))


def ikose_scale(residuals: np.ndarray, kappa: int = DEFAULT_KAPPA) -> tuple[float, int, bool]:
    """Iterative kappa-th ordered scale estimate.

    Repeats s = r_(kappa) / quantile((1 + kappa/n_hat) / 2) with n_hat the
    count of residuals within 2.5 s until the inlier count stabilizes or the
    iteration cap is hit. Returns (scale, iterations, converged).
    """
    abs_r = np.sort(np.abs(np.asarray(residuals, dtype=np.float64)))
    n = abs_r.size
    if n < kappa:
        raise ValueError(f"need at least kappa={kappa} residuals, got {n}")
    r_kappa = float(abs_r[kappa - 1])
    n_hat = max(n, kappa + 1)
    scale = SCALE_FLOOR
    for iteration in range(1, IKOSE_MAX_ITER + 1):
        quant = normal_quantile((1.0 + kappa / n_hat) / 2.0)
        scale = max(r_kappa / quant, SCALE_FLOOR)
        new_n = int(np.searchsorted(abs_r, IKOSE_INLIER_MULTIPLIER * scale, side="right"))
        new_n = max(new_n, kappa + 1)
        if new_n == n_hat:
            return scale, iteration, True
        n_hat = new_n
    warnings.warn("IKOSE inlier count did not stabilize", ScaleNonConvergenceWarning)
    return scale, IKOSE_MAX_ITER, False


def baseline_scale(method: str, residuals: np.ndarray, kappa: int = DEFAULT_KAPPA) -> float:
    """Reference scale estimators: MED, MAD and IKOSE.

    MED = 1.4826 * median(|r|); MAD = 1.4826 * median(|r - median(r)|);
    IKOSE iterates the ordered-residual estimate (non-convergence warns and
    returns the last iterate).
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    name = method.lower()
    if name == "med":
        return MAD_TO_SIGMA * float(np.median(np.abs(residuals)))
    if name == "mad":
        return MAD_TO_SIGMA * float(np.median(np.abs(residuals - np.median(residuals))))
    if name == "ikose":
        scale, _, _ = ikose_scale(residuals, kappa)
        return scale
    raise ValueError(f"unknown scale estimator {method!r}")
