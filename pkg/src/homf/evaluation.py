"""Synthetic two-line data, evaluation metrics and the scale benchmark.

The generator follows the synthetic protocol of the scale-estimation
experiments: two intersecting lines on a plane with a fixed total point
count, Gaussian perpendicular noise on the line points and uniform gross
outliers filling the remainder of a bounding box.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import geometry, kde
from .exceptions import InvalidSpec, LengthMismatch, NonPositiveScale
from .geometry import Model, ModelKind

DEFAULT_TOTAL = 2000
DEFAULT_RIGHT = 100
# Segment half-length in data units. The defaults keep the unit noise sigma
# small against the line extent, as any usable inlier/outlier contrast needs.
DEFAULT_HALF_LENGTH = 100.0

SCALE_ESTIMATORS = ("aie", "med", "mad", "ikose")


@dataclass
class SyntheticSpec:
    """Two intersecting noisy lines plus uniform outliers.

    Lines run along the two diagonals y = x (left/first structure) and
    y = -x (right/second structure), crossing at the origin. ``bbox`` is
    (xmin, ymin, xmax, ymax); by default the segments' bounding square
    enlarged 2x.
    """

    left_line_n: int = 1000
    right_line_n: int = DEFAULT_RIGHT
    total_n: int = DEFAULT_TOTAL
    noise_sigma: float = 1.0
    half_length: float = DEFAULT_HALF_LENGTH
    bbox: tuple[float, float, float, float] | None = None
    seed: int = 0

    def resolved_bbox(self) -> tuple[float, float, float, float]:
        if self.bbox is not None:
            return self.bbox
        half = self.half_length * np.sqrt(2.0)  # segment square enlarged 2x
        return (-half, -half, half, half)

    def validate(self) -> None:
        if min(self.left_line_n, self.right_line_n) < 0 or self.total_n < 1:
            raise InvalidSpec("point counts must be non-negative and total positive")
        if self.left_line_n + self.right_line_n > self.total_n:
            raise InvalidSpec(
                f"line points {self.left_line_n}+{self.right_line_n} exceed total {self.total_n}"
            )
        if self.noise_sigma < 0:
            raise InvalidSpec("noise sigma must be non-negative")
        if self.half_length <= 0:
            raise InvalidSpec("half length must be positive")
        box = self.resolved_bbox()
        if box[2] <= box[0] or box[3] <= box[1]:
            raise InvalidSpec("bounding box must have positive area")


@dataclass
class LabeledDataset:
    """Generated observations with ground truth for the metrics."""

    data: np.ndarray
    gt_labels: np.ndarray  # 0 = left line, 1 = right line, -1 = outlier
    true_models: list[Model] = field(default_factory=list)
    true_scale: float = 1.0


def _line_points(rng, count, direction, normal, half_length, sigma):
    along = rng.uniform(-half_length, half_length, size=count)
    offset = rng.normal(0.0, sigma, size=count) if sigma > 0 else np.zeros(count)
    return along[:, None] * direction + offset[:, None] * normal


def gen_two_lines(spec: SyntheticSpec) -> LabeledDataset:
    """Deterministic synthetic dataset for a given spec and seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    sq2 = np.sqrt(2.0)
    dir_left = np.array([1.0, 1.0]) / sq2
    nrm_left = np.array([-1.0, 1.0]) / sq2
    dir_right = np.array([1.0, -1.0]) / sq2
    nrm_right = np.array([1.0, 1.0]) / sq2

    left = _line_points(rng, spec.left_line_n, dir_left, nrm_left, spec.half_length, spec.noise_sigma)
    right = _line_points(rng, spec.right_line_n, dir_right, nrm_right, spec.half_length, spec.noise_sigma)
    n_out = spec.total_n - spec.left_line_n - spec.right_line_n
    xmin, ymin, xmax, ymax = spec.resolved_bbox()
    outliers = np.column_stack(
        [rng.uniform(xmin, xmax, size=n_out), rng.uniform(ymin, ymax, size=n_out)]
    )

    data = np.vstack([left, right, outliers])
    labels = np.concatenate(
        [
            np.zeros(spec.left_line_n, dtype=np.int64),
            np.ones(spec.right_line_n, dtype=np.int64),
            -np.ones(n_out, dtype=np.int64),
        ]
    )
    models = [
        Model(ModelKind.LINE2D, np.array([nrm_left[0], nrm_left[1], 0.0])),
        Model(ModelKind.LINE2D, np.array([nrm_right[0], nrm_right[1], 0.0])),
    ]
    return LabeledDataset(data, labels, models, spec.noise_sigma)


def scale_error(estimated: float, true: float) -> float:
    """Symmetric relative scale error max(s_e/s_t, s_t/s_e) - 1."""
    if estimated <= 0 or true <= 0:
        raise NonPositiveScale(f"scales must be positive, got {estimated} and {true}")
    return max(estimated / true, true / estimated) - 1.0


def misclassification(pred: np.ndarray, gt: np.ndarray) -> float:
    """Percentage of points assigned to the wrong structure.

    Predicted cluster ids are matched to ground-truth structure ids by the
    bijection minimizing mismatches; the outlier label -1 only matches -1.
    """
    pred = np.asarray(pred, dtype=np.int64)
    gt = np.asarray(gt, dtype=np.int64)
    if pred.shape != gt.shape or pred.ndim != 1:
        raise LengthMismatch(f"label shapes differ: {pred.shape} vs {gt.shape}")
    n = pred.size
    if n == 0:
        raise LengthMismatch("empty label vectors")
    pred_ids = np.unique(pred[pred != -1])
    gt_ids = np.unique(gt[gt != -1])
    correct = int(np.sum((pred == -1) & (gt == -1)))
    if pred_ids.size and gt_ids.size:
        confusion = np.zeros((pred_ids.size, gt_ids.size), dtype=np.int64)
        for a, pid in enumerate(pred_ids):
            mask = pred == pid
            for b, gid in enumerate(gt_ids):
                confusion[a, b] = int(np.sum(mask & (gt == gid)))
        rows, cols = linear_sum_assignment(-confusion)
        correct += int(confusion[rows, cols].sum())
    return 100.0 * (n - correct) / n


@dataclass
class BenchRow:
    """One benchmark table row; ``ratio`` is None for the full-sweep aggregate."""

    estimator: str
    ratio: float | None
    std: float
    mean: float
    med: float
    max: float
    failures: int


def _estimate(name: str, residuals: np.ndarray, kappa: int) -> float:
    if name == "aie":
        return kde.aie_scale(residuals, kappa).scale
    return kde.baseline_scale(name, residuals, kappa)


def scale_bench(
    ratios: Sequence[float],
    runs: int,
    estimators: Sequence[str] = SCALE_ESTIMATORS,
    seed: int = 0,
    total_n: int = DEFAULT_TOTAL,
    right_n: int = DEFAULT_RIGHT,
    noise_sigma: float = 1.0,
    kappa: int = kde.DEFAULT_KAPPA,
) -> list[BenchRow]:
    """Sweep the outlier ratio and tabulate per-estimator scale errors.

    The ratio is taken against the left-line structure: left_n =
    round((1 - ratio) * total_n), every other point (the fixed right line
    plus uniform outliers) counting as an outlier. Residuals are computed to
    the true left-line model and each estimator's error follows the
    symmetric ratio measure against the generating sigma. Estimator failures
    are excluded from the aggregates and counted per row.
    """
    estimators = [e.lower() for e in estimators]
    unknown = set(estimators) - set(SCALE_ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators: {sorted(unknown)}")
    errors: dict[str, dict[int, list[float]]] = {e: {} for e in estimators}
    failures: dict[str, dict[int, int]] = {e: {} for e in estimators}
    for i, ratio in enumerate(ratios):
        left_n = int(round((1.0 - ratio) * total_n))
        if left_n + right_n > total_n or left_n < 1:
            raise InvalidSpec(f"ratio {ratio} leaves no room for the left line")
        for est in estimators:
            errors[est][i] = []
            failures[est][i] = 0
        for run in range(runs):
            run_seed = int(np.random.SeedSequence([seed, i, run]).generate_state(1)[0])
            dataset = gen_two_lines(
                SyntheticSpec(
                    left_line_n=left_n,
                    right_line_n=right_n,
                    total_n=total_n,
                    noise_sigma=noise_sigma,
                    seed=run_seed,
                )
            )
            residuals = geometry.residuals(dataset.true_models[0], dataset.data)
            for est in estimators:
                try:
                    err = scale_error(_estimate(est, residuals, kappa), noise_sigma)
                except Exception:
                    failures[est][i] += 1
                else:
                    errors[est][i].append(err)

    def _row(est: str, ratio: float | None, values: list[float], fails: int) -> BenchRow:
        if values:
            arr = np.asarray(values)
            return BenchRow(
                est, ratio, float(arr.std()), float(arr.mean()),
                float(np.median(arr)), float(arr.max()), fails,
            )
        return BenchRow(est, ratio, float("nan"), float("nan"), float("nan"), float("nan"), fails)

    rows = []
    for est in estimators:
        for i, ratio in enumerate(ratios):
            rows.append(_row(est, float(ratio), errors[est][i], failures[est][i]))
    for est in estimators:
        pooled = [v for i in errors[est] for v in errors[est][i]]
        rows.append(_row(est, None, pooled, sum(failures[est].values())))
    return rows
