"""Borda scoring of a relation.

Each object votes for every object (itself included) by ranking them on its
own cost row; the aggregated score of x is the mean of the n relative scores
n - Rk_y(x) it receives.
"""

import argparse
import json
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.stats import rankdata

from app.apis.base import RankTable, RelationMatrix, ScoreVector, TiePolicy
from app.apis.cli import INPUT, LABELS, OUT, TIE_POLICY, RunConfig, emit, format_arg, summary
from app.apis.export import export_scores_csv
from app.apis.relation import load_relation
from app.core.router import CommandRouter

logger = logging.getLogger(__name__)

router = CommandRouter()


def _with_voter_first(values: np.ndarray) -> np.ndarray:
    work = np.array(values, dtype=float)
    # the voter's own cost is 0, the row minimum; -1 makes it win every tie
    np.fill_diagonal(work, -1.0)
    return work


def neighbor_order(values: np.ndarray, column_priority: Optional[np.ndarray] = None) -> np.ndarray:
    """Objects of each row sorted by ascending cost, voter first.

    Ties go to the smaller ``column_priority`` (object index by default).
    """
    work = _with_voter_first(values)
    if column_priority is None:
        return np.argsort(work, axis=1, kind="stable")
    perm = np.argsort(column_priority, kind="stable")
    return perm[np.argsort(work[:, perm], axis=1, kind="stable")]


def rank_rows(
    values: np.ndarray,
    tie_policy: TiePolicy = TiePolicy.INDEX,
    column_priority: Optional[np.ndarray] = None,
) -> RankTable:
    n = values.shape[0]
    order = neighbor_order(values, column_priority)
    if tie_policy == TiePolicy.MIDRANK:
        ranks = rankdata(_with_voter_first(values), method="average", axis=1)
    else:
        ranks = np.empty((n, n), dtype=np.int64)
        np.put_along_axis(ranks, order, np.broadcast_to(np.arange(1, n + 1), (n, n)), axis=1)
    ranks.flags.writeable = False
    order.flags.writeable = False
    return RankTable(ranks=ranks, order=order, tie_policy=tie_policy)


def rank_table(relation: RelationMatrix, tie_policy: TiePolicy = TiePolicy.INDEX) -> RankTable:
    return rank_rows(relation.values, TiePolicy(tie_policy))


def aggregated_scores(rk: RankTable) -> ScoreVector:
    n = rk.n
    # column sums are exact (integers or half-integers); divide once
    received = rk.ranks.sum(axis=0)
    scores = (n * n - received) / n
    scores.flags.writeable = False
    return ScoreVector(scores=scores)


def standard(sv: ScoreVector) -> int:
    winners = sv.argmax_set
    if len(winners) > 1:
        logger.warning("Standard is not unique: %d objects share the top score", len(winners))
    return winners[0]


def score_relation(relation: RelationMatrix, tie_policy: TiePolicy = TiePolicy.INDEX) -> Tuple[RankTable, ScoreVector]:
    rk = rank_table(relation, tie_policy)
    return rk, aggregated_scores(rk)


@router.command(
    "score",
    INPUT,
    LABELS,
    TIE_POLICY,
    OUT,
    format_arg("csv", "json"),
)
def score_command(args: argparse.Namespace) -> int:
    """Compute aggregated scores and the standard"""
    config = RunConfig.from_args(args)
    relation = load_relation(config.inputs[0], config.labeled)
    _, sv = score_relation(relation, config.tie_policy)
    best = standard(sv)

    if config.format == "json":
        text = json.dumps(
            {
                "labels": relation.labels,
                "scores": sv.scores.tolist(),
                "standard": relation.labels[best],
                "argmax": [relation.labels[i] for i in sv.argmax_set],
            },
            indent=2,
        ) + "\n"
    else:
        text = export_scores_csv(relation.labels, sv)

    emit(text, config)
    summary(config, standard=relation.labels[best])
    return 0
