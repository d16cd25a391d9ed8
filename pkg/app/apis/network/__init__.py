"""Exemplar network and the scale sweep.

Every object links to the best-scored object of its neighborhood (itself when
nobody there beats it). Fixed points of the link are the exemplars.
"""

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Set

import networkx as nx
import numpy as np

from app.apis.base import (
    DomainError,
    ExemplarNetwork,
    InputError,
    NeighborhoodMode,
    NeighborhoodSpec,
    RankTable,
    ScoreVector,
    SweepTable,
)
from app.apis.cli import (
    AUTO_K,
    BOOTSTRAPS,
    GRAPH,
    INPUT,
    K,
    LABELS,
    OUT,
    SEED,
    TIE_POLICY,
    RunConfig,
    emit,
    format_arg,
    summary,
)
from app.apis.export import (
    bootstrap_view,
    dump_json,
    export_dot,
    export_durations_csv,
    export_links_csv,
    export_report,
    export_sweep_csv,
)
from app.apis.relation import load_relation
from app.apis.robustness import bootstrap_standards
from app.apis.scoring import score_relation, standard
from app.core.router import Arg, CommandRouter

logger = logging.getLogger(__name__)

router = CommandRouter()


def _check_k(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise DomainError(f"k={k} is outside 1..{n}")


def _check_adjacency(adjacency: List[List[int]], n: int) -> None:
    if len(adjacency) != n:
        raise DomainError(f"adjacency lists {len(adjacency)} objects, relation has {n}")
    for x, neighbors in enumerate(adjacency):
        for y in neighbors:
            if not 0 <= y < n:
                raise DomainError(f"neighbor {y} of object {x} is out of range")
            if y == x:
                raise DomainError(f"object {x} lists itself as a neighbor")


def neighborhood(rk: RankTable, x: int, spec: NeighborhoodSpec) -> Set[int]:
    """Objects competing for x's link, x included."""
    if spec.mode == NeighborhoodMode.KNN:
        _check_k(spec.k, rk.n)
        # under index-order ties these are exactly the objects ranked <= k
        return set(rk.order[x, : spec.k].tolist())
    _check_adjacency(spec.adjacency, rk.n)
    return {x, *spec.adjacency[x]}


def build_network(sv: ScoreVector, rk: RankTable, spec: NeighborhoodSpec) -> ExemplarNetwork:
    n = sv.n
    scores = sv.scores

    if spec.mode == NeighborhoodMode.KNN:
        _check_k(spec.k, n)
        candidates = rk.order[:, : spec.k]
        # argmax keeps the first maximum, so x itself (position 0) wins ties
        best = np.argmax(scores[candidates], axis=1)
        link = candidates[np.arange(n), best]
    else:
        _check_adjacency(spec.adjacency, n)
        position = np.empty_like(rk.order)
        np.put_along_axis(position, rk.order, np.broadcast_to(np.arange(n), (n, n)), axis=1)
        link = np.empty(n, dtype=np.int64)
        for x in range(n):
            members = np.array(sorted({x, *spec.adjacency[x]}, key=lambda y: position[x, y]))
            link[x] = members[np.argmax(scores[members])]

    link.flags.writeable = False
    net = ExemplarNetwork(link=link, spec=spec, scores=sv)
    logger.info("Built %s network: %d exemplars among %d objects", spec.mode.value, len(net.exemplars), n)
    return net


def optimal_k(counts, n: int) -> int:
    """Smallest k maximising (n - k + 1) - E(k)."""
    if isinstance(counts, SweepTable):
        counts = counts.counts
    ks = np.arange(1, n + 1)
    gap = (n - ks + 1) - np.asarray(counts)
    return int(np.argmax(gap)) + 1


def scale_sweep(sv: ScoreVector, rk: RankTable) -> SweepTable:
    """Exemplar counts E(k) for k = 1..n from one pass over the neighbor order.

    x stays an exemplar until its neighbor list reaches an object with a
    strictly higher score, so its duration is the position of the first such
    object (n when there is none).
    """
    n = sv.n
    scores = sv.scores
    beats = scores[rk.order] > scores[:, None]
    durations = np.where(beats.any(axis=1), np.argmax(beats, axis=1), n)

    # E(k) = number of objects with duration >= k
    per_duration = np.bincount(durations, minlength=n + 1)
    counts = np.cumsum(per_duration[::-1])[::-1][1 : n + 1]

    durations.flags.writeable = False
    counts.flags.writeable = False
    sweep = SweepTable(durations=durations, counts=counts, k_optimum=optimal_k(counts, n))
    logger.info("Scale sweep over n=%d: optimal k=%d", n, sweep.k_optimum)
    return sweep


def exemplar_of(net: ExemplarNetwork, x: int) -> int:
    for _ in range(net.n):
        y = int(net.link[x])
        if y == x:
            return x
        x = y
    raise DomainError("link function has a cycle")


def exemplar_components(net: ExemplarNetwork) -> Dict[int, List[int]]:
    """Members of each tree of the link forest, keyed by its exemplar."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(net.n))
    graph.add_edges_from((x, int(y)) for x, y in enumerate(net.link) if int(y) != x)

    clusters = {}
    for component in nx.weakly_connected_components(graph):
        members = sorted(component)
        clusters[exemplar_of(net, members[0])] = members
    return dict(sorted(clusters.items()))


def load_adjacency(path: Path, labels: Sequence[str]) -> List[List[int]]:
    """Read ``label: n1,n2,...`` lines into index lists.

    Objects missing from the file have no neighbors.
    """
    index = {label: i for i, label in enumerate(labels)}
    adjacency: List[List[int]] = [[] for _ in labels]
    seen = set()
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})")

    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise InputError(f"{path}:{number}: expected 'label: neighbors'")
        label = head.strip()
        if label not in index:
            raise InputError(f"{path}:{number}: unknown label {label!r}")
        if label in seen:
            raise InputError(f"{path}:{number}: {label!r} listed twice")
        seen.add(label)

        x = index[label]
        neighbors = set()
        for name in (part.strip() for part in tail.split(",")):
            if not name:
                continue
            if name not in index:
                raise InputError(f"{path}:{number}: unknown neighbor {name!r}")
            if index[name] == x:
                raise DomainError(f"{path}:{number}: {label!r} lists itself as a neighbor")
            neighbors.add(index[name])
        adjacency[x] = sorted(neighbors)

    return adjacency


@router.command(
    "network",
    INPUT,
    LABELS,
    TIE_POLICY,
    K,
    AUTO_K,
    GRAPH,
    format_arg("dot", "json", "csv"),
    BOOTSTRAPS,
    SEED,
    OUT,
)
def network_command(args: argparse.Namespace) -> int:
    """Build the exemplar network"""
    config = RunConfig.from_args(args)
    config.require_neighborhood()
    if config.bootstraps is not None:
        config.require_seed()

    relation = load_relation(config.inputs[0], config.labeled)
    rk, sv = score_relation(relation, config.tie_policy)
    best = standard(sv)

    sweep = None
    if config.graph is not None:
        spec = NeighborhoodSpec.graph(load_adjacency(config.graph, relation.labels))
    else:
        if config.auto_k or config.format == "json":
            sweep = scale_sweep(sv, rk)
        spec = NeighborhoodSpec.knn(sweep.k_optimum if config.auto_k else config.k)

    net = build_network(sv, rk, spec)

    if config.format == "json":
        robustness = {}
        if config.bootstraps is not None:
            report = bootstrap_standards(relation, config.bootstraps, config.seed)
            robustness["bootstrap"] = bootstrap_view(report, relation.labels)
        text = export_report(
            relation.labels,
            net,
            best,
            config.tie_policy,
            exemplar_components(net),
            sweep=sweep,
            robustness=robustness,
        )
    elif config.format == "csv":
        text = export_links_csv(relation.labels, net)
    else:
        text = export_dot(net, relation.labels)

    emit(text, config)
    summary(
        config,
        standard=relation.labels[best],
        exemplars=len(net.exemplars),
        k=spec.k if spec.mode == NeighborhoodMode.KNN else "graph",
    )
    return 0


@router.command(
    "sweep",
    INPUT,
    LABELS,
    TIE_POLICY,
    format_arg("csv", "json"),
    Arg("--durations", type=Path, metavar="PATH", help="also write label,duration lines here"),
    OUT,
)
def sweep_command(args: argparse.Namespace) -> int:
    """Tabulate exemplar counts over every scale"""
    config = RunConfig.from_args(args)
    relation = load_relation(config.inputs[0], config.labeled)
    rk, sv = score_relation(relation, config.tie_policy)
    sweep = scale_sweep(sv, rk)

    if config.format == "json":
        text = dump_json(
            {
                "n": sweep.n,
                "k_optimum": sweep.k_optimum,
                "counts": sweep.counts.tolist(),
                "durations": {label: int(d) for label, d in zip(relation.labels, sweep.durations)},
            }
        )
    else:
        text = export_sweep_csv(sweep)
    emit(text, config)

    if args.durations is not None:
        args.durations.write_text(export_durations_csv(relation.labels, sweep), encoding="utf-8", newline="")

    summary(
        config,
        standard=relation.labels[standard(sv)],
        exemplars=int(sweep.counts[sweep.k_optimum - 1]),
        k=sweep.k_optimum,
    )
    return 0
