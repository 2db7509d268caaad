"""The complete fitting method: guided sampling, hyperedge optimization,
adaptive inlier estimation, kernel assembly, spectral clustering and final
per-cluster model extraction with outlier labeling.

Loop structure: sampling masses start uniform and the first hypothesis is a
plain uniform minimal-subset draw; every iteration optimizes the hypothesis
into a hyperedge, scores all points against it, appends an affinity column
and lowers the sampling mass of the points the hyperedge explains. The
stacked columns form H, spectral clustering partitions G = H H^T, and each
cluster gets a final least-squares model plus a residual-based outlier test.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import geometry, kde, sampling
from .clustering import spectral_cluster
from .exceptions import (
    AllEqualWeights,
    DegenerateSubset,
    InsufficientData,
    TooManyDegenerateDraws,
    ZeroSpread,
)
from .geometry import DEFAULT_RESAMPLE_BUDGET, Model, ModelKind
from .hypergraph import (
    DEFAULT_Q_FRACTION,
    DEFAULT_T_MAX,
    Hyperedge,
    IHOConfig,
    affinity_column,
    assemble_kernel,
    optimize_hyperedge,
)
from .kde import ScaleEstimate

DEFAULT_HYPOTHESES = 200
DEFAULT_OUTLIER_MULTIPLIER = 2.5

# Trim-refit rounds when polishing a cluster's final model.
FINAL_REFIT_ROUNDS = 3


@dataclass
class HOMFConfig:
    """Run configuration.

    ``iho`` overrides the derived per-dataset optimization config; when None
    it is built from ``q_fraction`` (ranked cutoff as a fraction of n) and
    ``t_max`` at fit time.
    """

    c: int
    kind: ModelKind = ModelKind.LINE2D
    m: int = DEFAULT_HYPOTHESES
    iho: IHOConfig | None = None
    q_fraction: float = DEFAULT_Q_FRACTION
    t_max: int = DEFAULT_T_MAX
    update_factor: float = sampling.DEFAULT_UPDATE_FACTOR
    kappa: int = kde.DEFAULT_KAPPA
    affinity_mode: str = "residual"
    seed: int = 0
    outlier_multiplier: float = DEFAULT_OUTLIER_MULTIPLIER
    resample_budget: int = DEFAULT_RESAMPLE_BUDGET

    def __post_init__(self):
        if self.c < 1:
            raise ValueError("need at least one structure")
        if self.m < 1:
            raise ValueError("need at least one hypothesis")
        if self.affinity_mode not in ("residual", "literal"):
            raise ValueError(f"unknown affinity mode {self.affinity_mode!r}")

    def resolve_iho(self, n: int) -> IHOConfig:
        if self.iho is not None:
            return self.iho
        block = self.kind.block_size
        q = max(int(round(self.q_fraction * n)), block + 1)
        return IHOConfig(q=q, block=block, t_max=self.t_max)


@dataclass
class RunStats:
    hypotheses_drawn: int = 0
    hyperedges_rejected: int = 0
    iho_iterations_total: int = 0
    wall_time_s: float = 0.0


@dataclass
class FitResult:
    """Labels, per-cluster models and the retained hyperedges of one run."""

    labels: np.ndarray
    models: list[Model]
    cluster_scales: list[ScaleEstimate]
    hyperedges: list[Hyperedge] = field(default_factory=list)
    stats: RunStats = field(default_factory=RunStats)
    failed: bool = False
    failure_reason: str | None = None


def label_outliers(
    labels: np.ndarray,
    data: np.ndarray,
    models: Sequence[Model],
    scales: Sequence[ScaleEstimate | float],
    multiplier: float,
) -> np.ndarray:
    """Relabel as -1 every point farther than multiplier * scale from its
    cluster's model; points already labeled -1 stay untouched."""
    labels = np.asarray(labels, dtype=np.int64).copy()
    if len(models) != len(scales):
        raise ValueError("one scale per cluster model required")
    for k, (model, scale) in enumerate(zip(models, scales)):
        members = labels == k
        if not members.any():
            continue
        sigma = scale.scale if isinstance(scale, ScaleEstimate) else float(scale)
        r = geometry.residuals(model, data)
        labels[members & (r > multiplier * sigma)] = -1
    return labels


def _draw_model(data, kind, state, budget):
    for _ in range(budget):
        subset = sampling.draw_subset(state, kind.minimal_size)
        try:
            return geometry.fit_minimal(kind, data[subset])
        except DegenerateSubset:
            continue
    raise TooManyDegenerateDraws(f"no valid minimal subset in {budget} draws")


def _cluster_scale(
    data: np.ndarray, model: Model, members: np.ndarray, kappa: int
) -> ScaleEstimate:
    """Adaptive scale of a final cluster model, with a MAD fallback when the
    density weighting degenerates (e.g. noiseless data)."""
    r = geometry.residuals(model, data)
    try:
        return kde.aie_scale(r, kappa)
    except (ZeroSpread, AllEqualWeights):
        member_r = r[members]
        sigma = kde.MAD_TO_SIGMA * float(np.median(np.abs(member_r - np.median(member_r))))
        sigma = max(sigma, kde.SCALE_FLOOR)
        return ScaleEstimate(sigma, 1, int(members.sum()))


def _seed_edge(members: np.ndarray, edges: list[Hyperedge]) -> Hyperedge | None:
    """Hyperedge whose significant set best overlaps the cluster (Jaccard)."""
    best, best_score = None, -1.0
    for edge in edges:
        sig = edge.significant
        inter = int(np.sum(sig & members))
        union = int(np.sum(sig | members))
        score = inter / union if union else 0.0
        if score > best_score:
            best, best_score = edge, score
    return best


def _final_cluster_model(
    data: np.ndarray,
    members: np.ndarray,
    kind: ModelKind,
    edges: list[Hyperedge],
    multiplier: float,
    kappa: int,
) -> Model | None:
    """Least-squares model for one cluster.

    Cluster members straight out of spectral clustering still contain gross
    outliers (every point receives some label) and a total least-squares fit
    has no breakdown resistance, so the refit is trimmed: starting from the
    hyperedge whose significant set best matches the cluster, a few rounds
    of (keep members within multiplier * scale of the model, refit, rescale)
    localize the fit on the cluster's own structure.
    """
    p = kind.minimal_size
    n_members = int(members.sum())
    seed = _seed_edge(members, edges)
    if seed is not None:
        model, sigma = seed.model, seed.scale.scale
    elif n_members >= p:
        try:
            model = geometry.refit(kind, data[members])
        except DegenerateSubset:
            return None
        sigma = _cluster_scale(data, model, members, kappa).scale
    else:
        return None
    for _ in range(FINAL_REFIT_ROUNDS):
        r = geometry.residuals(model, data)
        keep = members & (r <= multiplier * sigma)
        if int(keep.sum()) < p:
            break
        try:
            model = geometry.refit(kind, data[keep])
        except DegenerateSubset:
            break
        sigma = _cluster_scale(data, model, members, kappa).scale
    return model


def fit(data: np.ndarray, config: HOMFConfig) -> FitResult:
    """Run the full method on one dataset.

    Returns a flagged partial result when the resampling budget runs out or
    every hyperedge is rejected; raises InsufficientData when the dataset
    cannot support the configuration at all.
    """
    t_start = time.perf_counter()
    kind = config.kind
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != kind.data_width:
        raise InsufficientData(
            f"{kind.value} expects (n, {kind.data_width}) data, got {data.shape}"
        )
    n = len(data)
    p = kind.minimal_size
    if n < p * config.c or n < kind.block_size + 1:
        raise InsufficientData(f"{n} points cannot support c={config.c} {kind.value} structures")
    iho = config.resolve_iho(n)
    if iho.q > n:
        raise InsufficientData(f"ranked cutoff q={iho.q} exceeds n={n}")

    state = sampling.init_state(n, config.seed, config.update_factor)
    stats = RunStats()
    columns: list[np.ndarray] = []
    edges: list[Hyperedge] = []

    def _partial(reason: str) -> FitResult:
        stats.wall_time_s = time.perf_counter() - t_start
        return FitResult(
            labels=-np.ones(n, dtype=np.int64),
            models=[],
            cluster_scales=[],
            hyperedges=edges,
            stats=stats,
            failed=True,
            failure_reason=reason,
        )

    for _ in range(config.m):
        try:
            # the first draw consumes the still-uniform initial masses;
            # later ones follow the guided updates
            model = _draw_model(data, kind, state, config.resample_budget)
        except TooManyDegenerateDraws as exc:
            return _partial(str(exc))
        stats.hypotheses_drawn += 1
        edge = optimize_hyperedge(model, data, iho)
        stats.iho_iterations_total += edge.iterations_used
        if not edge.valid or not (edge.converged or edge.iterations_used == iho.t_max):
            stats.hyperedges_rejected += 1
            continue
        residuals = geometry.residuals(edge.model, data)
        weights = edge.weights
        try:
            selection = kde.select_significant(weights)
            scale = kde.inlier_scale(
                residuals,
                selection.significant,
                min(config.kappa, int(selection.significant.sum())),
            )
        except (ZeroSpread, AllEqualWeights):
            stats.hyperedges_rejected += 1
            continue
        edge = edge.with_evidence(scale, selection.significant)
        columns.append(affinity_column(weights, residuals, scale, config.affinity_mode))
        edges.append(edge)
        sampling.update_probabilities(state, selection.significant)

    if not columns:
        return _partial("every hyperedge was rejected")

    H = np.column_stack(columns)
    kernel = assemble_kernel(H)
    labels = spectral_cluster(kernel, config.c, config.seed)

    models: list[Model] = []
    scales: list[ScaleEstimate] = []
    for k in range(config.c):
        members = labels == k
        model_k = _final_cluster_model(
            data, members, kind, edges, config.outlier_multiplier, config.kappa
        )
        if model_k is None:
            return _partial(f"cluster {k} has no fittable members")
        models.append(model_k)
        scales.append(_cluster_scale(data, model_k, members, config.kappa))
    labels = label_outliers(labels, data, models, scales, config.outlier_multiplier)

    stats.wall_time_s = time.perf_counter() - t_start
    return FitResult(
        labels=labels,
        models=models,
        cluster_scales=scales,
        hyperedges=edges,
        stats=stats,
    )
