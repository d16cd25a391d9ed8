"""Relations built from raw data: points, binary images and publication lists."""

import argparse
import itertools
import logging
import re
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from pydantic import ValidationError
from scipy.spatial import KDTree
from scipy.spatial.distance import pdist, squareform

from app.apis.base import (
    BinaryImage,
    CoauthorRelation,
    DomainError,
    InputError,
    PointCloud,
    PublicationRecord,
    RelationMatrix,
)
from app.apis.cli import LABELS, OUT, RunConfig, emit, summary
from app.apis.relation import make_relation, read_cells, relation_to_csv
from app.core.router import Arg, CommandRouter

logger = logging.getLogger(__name__)

router = CommandRouter(prefix="relation", help="Build a relation from raw data")


def make_point_cloud(coords, labels: Optional[Sequence[str]] = None) -> PointCloud:
    rows = [list(row) for row in coords]
    if not rows:
        raise DomainError("point cloud is empty")
    if len({len(row) for row in rows}) > 1 or not rows[0]:
        raise DomainError("dimension mismatch: points must share one dimension d >= 1")
    table = np.asarray(rows, dtype=float)
    if not np.isfinite(table).all():
        raise DomainError("point coordinates must be finite")
    if labels is None:
        labels = [str(i) for i in range(len(rows))]
    table.flags.writeable = False
    return PointCloud(labels=[str(label) for label in labels], coords=table)


def load_points(path: Path, labeled: bool = False) -> PointCloud:
    cells = read_cells(path, shape_error=DomainError)
    labels = None
    if labeled:
        labels, cells = cells[:, 0].tolist(), cells[:, 1:]
    try:
        coords = cells.astype(np.float64)
    except ValueError as e:
        raise InputError(f"{path}: {e}")
    return make_point_cloud(coords, labels)


def euclidean_relation(pc: PointCloud) -> RelationMatrix:
    return make_relation(squareform(pdist(pc.coords)), pc.labels)


def make_image(label: str, pixels) -> BinaryImage:
    """Wrap a 0/1 array (rows x columns) as a ``BinaryImage``."""
    bits = np.asarray(pixels, dtype=np.int8)
    if bits.ndim != 2:
        raise InputError(f"image {label}: expected a 2-D bitmap")
    if not np.isin(bits, (0, 1)).all():
        raise InputError(f"image {label}: pixels must be 0 or 1")
    height, width = bits.shape
    return BinaryImage(label=label, width=width, height=height, foreground=np.argwhere(bits == 1))


def load_pbm(path: Path) -> BinaryImage:
    """Read a plain (P1) portable bitmap; the label is the file stem."""
    path = Path(path)
    # comments may hold any bytes; only the header and pixels must be ASCII
    body = re.sub(rb"#[^\n]*", b" ", path.read_bytes())
    try:
        tokens = body.decode("ascii").split()
    except UnicodeDecodeError:
        raise InputError(f"{path}: non-ASCII bytes outside comments")
    if not tokens or tokens[0] != "P1":
        raise InputError(f"{path}: not a plain PBM (magic P1)")
    try:
        width, height = int(tokens[1]), int(tokens[2])
    except (IndexError, ValueError):
        raise InputError(f"{path}: missing width/height")

    # P1 pixels may be written with or without separating whitespace
    digits = "".join(tokens[3:])
    if len(digits) != width * height or set(digits) - {"0", "1"}:
        raise InputError(f"{path}: expected {width * height} binary pixels")
    pixels = np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0")
    return make_image(path.stem, pixels.reshape(height, width))


def hausdorff_relation(images: Sequence[BinaryImage]) -> RelationMatrix:
    """Directed Hausdorff distances between image foregrounds.

    R(A, B) = max over a in A of min over b in B of |a - b|, exact Euclidean
    distances on (row, column) pixel coordinates.
    """
    for image in images:
        if len(image.foreground) == 0:
            raise DomainError(f"image {image.label} has an empty foreground")

    trees = [KDTree(image.foreground) for image in images]
    n = len(images)
    values = np.zeros((n, n))
    for i, j in itertools.permutations(range(n), 2):
        nearest, _ = trees[j].query(images[i].foreground, k=1)
        values[i, j] = nearest.max()

    logger.info("Built Hausdorff relation over %d images", n)
    return make_relation(values, [image.label for image in images])


def load_publications(path: Path) -> List[PublicationRecord]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})")

    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(PublicationRecord.model_validate_json(line))
        except ValidationError as e:
            raise InputError(f"{path}:{number}: {e.errors()[0]['msg']}")
    return records


def coauthor_relation(pubs: Sequence[PublicationRecord], common_count: bool = False) -> CoauthorRelation:
    """Co-authorship relation over the authors of ``pubs``.

    affinity(a -> b) sums, over publications shared by a and b, the number of
    authors of the publication times a's publication count (times the number
    of publications a shares with b when ``common_count`` is set). Costs
    reflect affinities so the strongest coauthor ranks first; non-coauthors
    share one sentinel cost above every coauthor cost.
    """
    if not pubs:
        raise DomainError("need at least one publication")

    authors = sorted({author for pub in pubs for author in pub.authors})
    index = {author: i for i, author in enumerate(authors)}
    n = len(authors)

    totals = np.zeros(n)
    shared = np.zeros((n, n))
    size_sum = np.zeros((n, n))
    for pub in pubs:
        ids = [index[author] for author in pub.authors]
        totals[ids] += 1
        for a, b in itertools.permutations(ids, 2):
            shared[a, b] += 1
            size_sum[a, b] += len(ids)

    factor = shared if common_count else totals[:, None]
    affinity = size_sum * factor
    coauthors = shared > 0

    top = affinity.max()
    cost = np.where(coauthors, 1 + top - affinity, 2 + top)
    np.fill_diagonal(cost, 0.0)

    adjacency = [np.flatnonzero(row).tolist() for row in coauthors]
    affinity.flags.writeable = False
    logger.info("Built co-author relation: %d authors, %d publications", n, len(pubs))
    return CoauthorRelation(relation=make_relation(cost, authors), adjacency=adjacency, affinity=affinity)


def write_adjacency(adjacency: Sequence[Sequence[int]], labels: Sequence[str]) -> str:
    """``label: n1,n2,...`` per object, the format ``network --graph`` reads."""
    return "".join(
        f"{label}: {','.join(labels[y] for y in neighbors)}\n" for label, neighbors in zip(labels, adjacency)
    )


def _emit_relation(relation: RelationMatrix, config: RunConfig, labeled: bool) -> None:
    emit(relation_to_csv(relation, labeled), config)
    summary(config, n=relation.n)


@router.command("euclid", Arg("input", type=Path, metavar="POINTS"), LABELS, OUT)
def euclid_command(args: argparse.Namespace) -> int:
    """Euclidean distances between points"""
    config = RunConfig.from_args(args)
    relation = euclidean_relation(load_points(config.inputs[0], config.labeled))
    _emit_relation(relation, config, config.labeled)
    return 0


@router.command("hausdorff", Arg("input", type=Path, nargs="+", metavar="IMAGE"), OUT)
def hausdorff_command(args: argparse.Namespace) -> int:
    """Directed Hausdorff distances between binary images"""
    config = RunConfig.from_args(args)
    relation = hausdorff_relation([load_pbm(path) for path in config.inputs])
    _emit_relation(relation, config, labeled=True)
    return 0


@router.command(
    "coauthor",
    Arg("input", type=Path, metavar="PUBLICATIONS"),
    OUT,
    Arg("--affinity-out", type=Path, metavar="PATH", help="write the raw affinity matrix here"),
    Arg("--adjacency-out", type=Path, metavar="PATH", help="write the coauthor adjacency here"),
    Arg("--common-count", action="store_true", help="weight by shared publications instead of totals"),
)
def coauthor_command(args: argparse.Namespace) -> int:
    """Co-authorship relation from publication records"""
    config = RunConfig.from_args(args)
    result = coauthor_relation(load_publications(config.inputs[0]), common_count=args.common_count)
    labels = result.relation.labels

    if args.affinity_out is not None:
        affinity = make_relation(result.affinity, labels)
        args.affinity_out.write_text(relation_to_csv(affinity, labeled=True), encoding="utf-8", newline="")
    if args.adjacency_out is not None:
        args.adjacency_out.write_text(write_adjacency(result.adjacency, labels), encoding="utf-8", newline="")

    _emit_relation(result.relation, config, labeled=True)
    return 0
