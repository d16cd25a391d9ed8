"""Result writers: CSV tables, Graphviz DOT and the JSON report.

Every writer returns text; callers decide where it goes. Output for the same
input is byte-for-byte stable.
"""

import json
from typing import Any, Dict, List, Optional, Sequence

import networkx as nx
import numpy as np

from app.apis.base import (
    BootstrapReport,
    ExemplarNetwork,
    ExemplarReport,
    NeighborhoodMode,
    OutlierReport,
    ScoreVector,
    SweepTable,
    TiePolicy,
)


def _lines(rows) -> str:
    return "".join(",".join(str(cell) for cell in row) + "\n" for row in rows)


def _by_score(values: np.ndarray) -> np.ndarray:
    # descending value, then ascending index
    return np.lexsort((np.arange(len(values)), -np.asarray(values, dtype=float)))


def export_scores_csv(labels: Sequence[str], sv: ScoreVector) -> str:
    return _lines((labels[i], repr(float(sv.scores[i]))) for i in _by_score(sv.scores))


def export_sweep_csv(sweep: SweepTable) -> str:
    n = sweep.n
    return _lines((k, int(sweep.counts[k - 1]), n - k + 1) for k in range(1, n + 1))


def export_durations_csv(labels: Sequence[str], sweep: SweepTable) -> str:
    return _lines((label, int(d)) for label, d in zip(labels, sweep.durations))


def export_links_csv(labels: Sequence[str], net: ExemplarNetwork) -> str:
    return _lines(
        (labels[x], labels[int(y)], int(int(y) == x)) for x, y in enumerate(net.link)
    )


def _dot_id(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(net: ExemplarNetwork, labels: Sequence[str]) -> str:
    """Graphviz digraph: one node per object, one edge per non-self link.

    Nodes and edges are written in label order. Node width is the score
    normalised by n - 1; exemplars get a double border.
    """
    scores = net.scores.scores
    scale = max(net.n - 1, 1)
    exemplars = set(net.exemplars)

    graph = nx.DiGraph(name="exemplars")
    for x, label in enumerate(labels):
        graph.add_node(label, score=f"{scores[x]:.6g}", width=f"{scores[x] / scale:.6g}")
        if x in exemplars:
            graph.nodes[label]["peripheries"] = "2"
    graph.add_edges_from((labels[x], labels[int(y)]) for x, y in enumerate(net.link) if int(y) != x)

    lines = [f"digraph {graph.name} {{"]
    for label in sorted(graph.nodes):
        attrs = ", ".join(f"{key}={value}" for key, value in graph.nodes[label].items())
        lines.append(f"  {_dot_id(label)} [label={_dot_id(label)}, {attrs}];")
    for source, target in sorted(graph.edges):
        lines.append(f"  {_dot_id(source)} -> {_dot_id(target)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _label_fractions(labels: Sequence[str], values: Sequence[float]) -> Dict[str, float]:
    return {labels[i]: float(values[i]) for i in _by_score(values)}


def bootstrap_view(report: BootstrapReport, labels: Sequence[str]) -> Dict[str, Any]:
    return {
        "B": report.B,
        "seed": report.seed,
        "frequency": _label_fractions(labels, report.frequency),
        "mode_object": labels[report.mode_object],
        "mode_frequency": report.mode_frequency,
        "never_selected_fraction": report.never_selected_fraction,
    }


def outlier_view(report: OutlierReport, labels: Sequence[str]) -> Dict[str, Any]:
    def name(i: int) -> str:
        return labels[i] if i < len(labels) else f"outlier-{i - len(labels)}"

    return {
        "mode": report.mode.value,
        "seed": report.seed,
        "initial_top3": [name(i) for i in report.initial_top3],
        "tolerance_percent": report.tolerance_percent,
        "trajectory": [{"outliers": step.outliers, "standard": name(step.standard)} for step in report.trajectory],
    }


def dump_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2) + "\n"


def export_report(
    labels: Sequence[str],
    net: ExemplarNetwork,
    standard: int,
    tie_policy: TiePolicy,
    clusters: Dict[int, List[int]],
    sweep: Optional[SweepTable] = None,
    robustness: Optional[Dict[str, Any]] = None,
) -> str:
    """JSON report of a network run.

    Sweep fields are present only when a sweep was computed, which never
    happens for graph neighborhoods.
    """
    report = ExemplarReport(
        labels=list(labels),
        scores=net.scores.scores.tolist(),
        standard=labels[standard],
        tie_policy=tie_policy,
        neighborhood=net.spec.mode,
        k=net.spec.k if net.spec.mode == NeighborhoodMode.KNN else None,
        k_optimum=sweep.k_optimum if sweep is not None else None,
        links={labels[x]: labels[int(y)] for x, y in enumerate(net.link)},
        exemplars=[labels[x] for x in net.exemplars],
        clusters={labels[root]: [labels[m] for m in members] for root, members in clusters.items()},
        sweep=(
            [{"k": k, "exemplars": int(sweep.counts[k - 1])} for k in range(1, sweep.n + 1)]
            if sweep is not None
            else None
        ),
        durations=(
            {label: int(d) for label, d in zip(labels, sweep.durations)} if sweep is not None else None
        ),
        robustness=robustness or {},
    )
    return dump_json(report.model_dump(mode="json", by_alias=True, exclude_none=True))
