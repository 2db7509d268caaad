"""Multi-structure geometric model fitting with hypergraph optimization.

Fits multiple instances of a geometric model family (2D lines, homographies,
fundamental matrices) to data contaminated with noise and gross outliers.
Hypotheses are drawn by guided sampling, optimized into hyperedges, scored by
adaptive kernel-density inlier estimation and partitioned by spectral
clustering of the hyperedge affinity kernel.
"""

from .evaluation import (
    LabeledDataset,
    SyntheticSpec,
    gen_two_lines,
    misclassification,
    scale_bench,
    scale_error,
)
from .geometry import Model, ModelKind, fit_minimal, refit, residuals
from .hypergraph import Hyperedge, IHOConfig, optimize_hyperedge
from .kde import ScaleEstimate, aie_scale, baseline_scale
from .pipeline import FitResult, HOMFConfig, fit, label_outliers

__version__ = "0.1.0"

__all__ = [
    "FitResult",
    "HOMFConfig",
    "Hyperedge",
    "IHOConfig",
    "LabeledDataset",
    "Model",
    "ModelKind",
    "ScaleEstimate",
    "SyntheticSpec",
    "__version__",
    "aie_scale",
    "baseline_scale",
    "fit",
    "fit_minimal",
    "gen_two_lines",
    "label_outliers",
    "misclassification",
    "optimize_hyperedge",
    "refit",
    "residuals",
    "scale_bench",
    "scale_error",
]
