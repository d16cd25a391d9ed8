"""Stability of the standard under resampling and under injected outliers."""

import argparse
import logging
import math
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError
from scipy.spatial.distance import pdist, squareform

from app.apis.base import (
    BootstrapReport,
    DomainError,
    ExclusionRule,
    OutlierConfig,
    OutlierMode,
    OutlierReport,
    OutlierStep,
    PointCloud,
    RelationMatrix,
    UsageError,
)
from app.apis.builders import euclidean_relation, load_points
from app.apis.cli import BOOTSTRAPS, INPUT, LABELS, OUT, SEED, RunConfig, emit, summary
from app.apis.export import bootstrap_view, dump_json, outlier_view
from app.apis.relation import load_relation
from app.apis.scoring import aggregated_scores, rank_rows
from app.core.config import get_experiment_config
from app.core.router import Arg, CommandRouter
from app.env import get_settings

logger = logging.getLogger(__name__)

router = CommandRouter()


def resample_standard(values: np.ndarray, draw: np.ndarray) -> int:
    """Standard of the relation induced by ``draw``, as an original index.

    Equal costs rank by original index, then by draw position; the same order
    settles ties on the top score.
    """
    m = len(draw)
    induced = values[np.ix_(draw, draw)]
    priority = draw.astype(np.int64) * m + np.arange(m)
    scores = aggregated_scores(rank_rows(induced, column_priority=priority)).scores
    best = np.flatnonzero(scores == scores.max())
    return int(draw[best[np.argmin(priority[best])]])


def bootstrap_standards(relation: RelationMatrix, B: int, seed: int) -> BootstrapReport:
    if B < 1:
        raise DomainError(f"need at least one bootstrap, got B={B}")
    n = relation.n
    rng = np.random.default_rng(seed)
    counts = np.zeros(n, dtype=np.int64)
    for round_ in range(B):
        draw = rng.integers(0, n, size=n)
        winner = resample_standard(relation.values, draw)
        counts[winner] += 1
        logger.debug("Bootstrap round %d: standard %d", round_, winner)

    mode = int(np.argmax(counts))
    report = BootstrapReport(
        B=B,
        seed=seed,
        counts=counts.tolist(),
        frequency=(counts / B).tolist(),
        mode_object=mode,
        mode_frequency=counts[mode] / B,
        never_selected_fraction=np.count_nonzero(counts == 0) / n,
    )
    logger.info("Bootstrap finished: mode %d at %.2f over B=%d", mode, report.mode_frequency, B)
    return report


def top_standards(report: BootstrapReport, m: int = 3) -> List[int]:
    """The m most frequent standards, ties to the smaller index."""
    counts = np.asarray(report.counts)
    order = np.lexsort((np.arange(len(counts)), -counts))
    return [int(i) for i in order[:m] if counts[i] > 0]


def draw_outlier(rng: np.random.Generator, config: OutlierConfig) -> np.ndarray:
    """One point of the scaled domain lying outside the exclusion zone."""
    bounds = np.asarray(config.domain, dtype=float)
    low, high = bounds[[0, 2]] * config.outlier_scale, bounds[[1, 3]] * config.outlier_scale
    inner_low, inner_high = bounds[[0, 2]] * config.exclusion_scale, bounds[[1, 3]] * config.exclusion_scale
    while True:
        point = rng.uniform(low, high)
        outside = (point <= inner_low) | (point >= inner_high)
        if config.exclusion == ExclusionRule.BOTH:
            accepted = outside.all()
        else:
            accepted = outside.any()
        if accepted:
            return point


def _points_standard(coords: np.ndarray) -> int:
    scores = aggregated_scores(rank_rows(squareform(pdist(coords)))).scores
    return int(np.argmax(scores))


def outlier_experiment(
    points: PointCloud,
    mode: OutlierMode,
    seed: int,
    config: Optional[OutlierConfig] = None,
) -> OutlierReport:
    """Add outliers in batches until the standard leaves the clean top three.

    The trajectory starts at the clean set and grows by ``step_percent`` of n
    per step up to ``cap_percent`` of n.
    """
    if points.dim != 2:
        raise DomainError(f"outlier protocol needs planar points, got dimension {points.dim}")
    config = config or OutlierConfig()
    mode = OutlierMode(mode)
    n = points.n

    reference = bootstrap_standards(euclidean_relation(points), config.reference_bootstraps, seed)
    top3 = top_standards(reference, 3)

    step = max(1, math.ceil(config.step_percent * n / 100))
    cap = math.floor(config.cap_percent * n / 100)
    rng = np.random.default_rng([seed, 1])

    current = _points_standard(points.coords)
    trajectory = [OutlierStep(outliers=0, standard=current)]
    last_held = 0 if current in top3 else None

    if last_held is not None:
        outliers = np.empty((0, 2))
        single = draw_outlier(rng, config) if mode == OutlierMode.DUPLICATE else None
        while len(outliers) + step <= cap:
            if single is not None:
                batch = np.tile(single, (step, 1))
            else:
                batch = np.array([draw_outlier(rng, config) for _ in range(step)])
            outliers = np.vstack([outliers, batch])
            current = _points_standard(np.vstack([points.coords, outliers]))
            trajectory.append(OutlierStep(outliers=len(outliers), standard=current))
            logger.debug("Outliers %d: standard %d", len(outliers), current)
            if current not in top3:
                break
            last_held = len(outliers)

    tolerance = 100.0 * last_held / n if last_held is not None else 0.0
    logger.info("Outlier experiment (%s): tolerance %.1f%%", mode.value, tolerance)
    return OutlierReport(
        mode=mode,
        seed=seed,
        initial_top3=top3,
        tolerance_percent=tolerance,
        trajectory=trajectory,
    )


@router.command("bootstrap", INPUT, LABELS, BOOTSTRAPS, SEED, OUT)
def bootstrap_command(args: argparse.Namespace) -> int:
    """Bootstrap frequencies of the standard"""
    config = RunConfig.from_args(args)
    seed = config.require_seed()
    relation = load_relation(config.inputs[0], config.labeled)
    report = bootstrap_standards(relation, config.resolved_bootstraps(), seed)

    emit(dump_json(bootstrap_view(report, relation.labels)), config)
    summary(config, standard=relation.labels[report.mode_object], frequency=report.mode_frequency)
    return 0


@router.command(
    "outliers",
    Arg("input", type=Path, metavar="POINTS"),
    LABELS,
    SEED,
    Arg("--mode", choices=[mode.value for mode in OutlierMode], default=OutlierMode.SPREAD.value),
    Arg("--exclusion", choices=[rule.value for rule in ExclusionRule]),
    Arg("--cap-percent", type=float),
    Arg("--step-percent", type=float),
    BOOTSTRAPS,
    OUT,
)
def outliers_command(args: argparse.Namespace) -> int:
    """Outlier tolerance of the standard on planar points"""
    run = RunConfig.from_args(args)
    seed = run.require_seed()

    overrides = {
        "exclusion": args.exclusion,
        "cap_percent": args.cap_percent,
        "step_percent": args.step_percent,
        "reference_bootstraps": run.bootstraps,
    }
    defaults = get_experiment_config(get_settings().experiments)
    overrides = {key: value for key, value in overrides.items() if value is not None}
    try:
        config = OutlierConfig.model_validate({**defaults.model_dump(), **overrides})
    except ValidationError as e:
        raise UsageError(f"outliers: {e.errors()[0]['msg']}")

    points = load_points(run.inputs[0], run.labeled)
    report = outlier_experiment(points, args.mode, seed, config)

    emit(dump_json(outlier_view(report, points.labels)), run)
    summary(run, tolerance_percent=report.tolerance_percent, steps=len(report.trajectory))
    return 0
