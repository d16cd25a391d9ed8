from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator


class ExemplarError(Exception):
    """Base error for all pipeline failures.

    Carries the exit status the command line reports and a readable detail.
    """

    status: int = 1

    def __init__(self, detail: str, status: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if status is not None:
            self.status = status


class RelationError(ExemplarError):
    """The relation violates one of its rules."""

    def __init__(self, detail: str, report: "ValidationReport | None" = None):
        super().__init__(detail)
        self.report = report


class DomainError(ExemplarError):
    """Input is well-formed but meaningless for the requested procedure."""


class InputError(ExemplarError):
    status = 2


class RelationShapeError(InputError):
    """Table is not rectangular, or not square where a relation is expected."""


class UsageError(ExemplarError):
    status = 3


class TiePolicy(str, Enum):
    INDEX = "index"
    MIDRANK = "midrank"


class NeighborhoodMode(str, Enum):
    KNN = "knn"
    GRAPH = "graph"


class OutlierMode(str, Enum):
    SPREAD = "spread"
    DUPLICATE = "duplicate"


class ExclusionRule(str, Enum):
    # reject candidates inside the scaled rectangle
    COMPLEMENT = "complement"
    # reject unless both coordinates are outside the scaled bounds
    BOTH = "both"


class ArrayModel(BaseModel):
    """Immutable model holding numpy arrays."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class Violation(BaseModel):
    rule: str  # "square", "finite", "positive", "zero-diagonal"
    row: Optional[int] = None
    column: Optional[int] = None
    value: Optional[float] = None


class ValidationReport(BaseModel):
    violations: List[Violation] = Field(default_factory=list)
    is_symmetric: bool = False

    @computed_field
    @property
    def valid(self) -> bool:
        return not self.violations


class RelationMatrix(ArrayModel):
    """Total, non-negative pairwise cost table with a zero diagonal.

    values[i, j] is the cost from object i to object j. Build it with
    ``app.apis.relation.make_relation`` so the rules are checked.
    """

    labels: List[str]
    values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.labels)


class RankTable(ArrayModel):
    """Per-voter ranks.

    ranks[x, y] is the rank of y relative to voter x (1 = closest). order[x]
    lists all objects by ascending cost from x, voter first, ties by index.
    """

    ranks: np.ndarray
    order: np.ndarray
    tie_policy: TiePolicy = TiePolicy.INDEX

    @property
    def n(self) -> int:
        return self.ranks.shape[0]


class ScoreVector(ArrayModel):
    scores: np.ndarray

    @property
    def n(self) -> int:
        return self.scores.shape[0]

    @property
    def argmax_set(self) -> List[int]:
        return np.flatnonzero(self.scores == self.scores.max()).tolist()


class NeighborhoodSpec(BaseModel):
    mode: NeighborhoodMode = NeighborhoodMode.KNN
    k: Optional[int] = None
    adjacency: Optional[List[List[int]]] = None

    @model_validator(mode="after")
    def check_mode(self) -> "NeighborhoodSpec":
        if self.mode == NeighborhoodMode.KNN and self.k is None:
            raise ValueError("knn neighborhoods need k")
        if self.mode == NeighborhoodMode.GRAPH and self.adjacency is None:
            raise ValueError("graph neighborhoods need an adjacency")
        return self

    @classmethod
    def knn(cls, k: int) -> "NeighborhoodSpec":
        return cls(mode=NeighborhoodMode.KNN, k=k)

    @classmethod
    def graph(cls, adjacency: List[List[int]]) -> "NeighborhoodSpec":
        return cls(mode=NeighborhoodMode.GRAPH, adjacency=adjacency)


class ExemplarNetwork(ArrayModel):
    link: np.ndarray
    spec: NeighborhoodSpec
    scores: ScoreVector

    @property
    def n(self) -> int:
        return self.link.shape[0]

    @property
    def exemplars(self) -> List[int]:
        return np.flatnonzero(self.link == np.arange(self.n)).tolist()


class SweepTable(ArrayModel):
    """Exemplar counts over every scale k = 1..n.

    durations[x] is the largest k at which x is still an exemplar; by nesting,
    x is an exemplar at every k <= durations[x].
    """

    durations: np.ndarray
    counts: np.ndarray  # counts[k - 1] = E(k)
    k_optimum: int

    @property
    def n(self) -> int:
        return self.durations.shape[0]

    def exemplars_at(self, k: int) -> List[int]:
        return np.flatnonzero(self.durations >= k).tolist()


class BootstrapReport(BaseModel):
    B: int
    seed: int
    counts: List[int]
    frequency: List[float]
    mode_object: int
    mode_frequency: float
    never_selected_fraction: float


class OutlierStep(BaseModel):
    outliers: int
    standard: int


class OutlierReport(BaseModel):
    mode: OutlierMode
    seed: int
    initial_top3: List[int]
    tolerance_percent: float
    trajectory: List[OutlierStep]


class PointCloud(ArrayModel):
    labels: List[str]
    coords: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


class BinaryImage(ArrayModel):
    label: str
    width: int
    height: int
    foreground: np.ndarray  # (m, 2) array of (row, column)


class PublicationRecord(BaseModel):
    id: str
    authors: List[str] = Field(min_length=1)

    @model_validator(mode="after")
    def check_authors(self) -> "PublicationRecord":
        if len(set(self.authors)) != len(self.authors):
            raise ValueError(f"publication {self.id} lists an author twice")
        return self


class CoauthorRelation(ArrayModel):
    relation: RelationMatrix
    adjacency: List[List[int]]
    affinity: np.ndarray


class OutlierConfig(BaseModel):
    domain: List[float] = Field(default_factory=lambda: [-10.0, 40.0, -15.0, 15.0])
    outlier_scale: float = 1000.0
    exclusion_scale: float = 100.0
    exclusion: ExclusionRule = ExclusionRule.COMPLEMENT
    step_percent: float = Field(default=1.0, gt=0)
    cap_percent: float = Field(default=300.0, gt=0)
    reference_bootstraps: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def check_domain(self) -> "OutlierConfig":
        if len(self.domain) != 4:
            raise ValueError("domain is [xmin, xmax, ymin, ymax]")
        xmin, xmax, ymin, ymax = self.domain
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("domain bounds are inverted")
        return self


class ExemplarReport(BaseModel):
    """JSON document written by ``network --format json``."""

    schema_: str = Field(default="exemplar-report/1", alias="schema")
    labels: List[str]
    scores: List[float]
    standard: str
    tie_policy: TiePolicy
    neighborhood: NeighborhoodMode
    k: Optional[int] = None
    k_optimum: Optional[int] = None
    links: Dict[str, str]
    exemplars: List[str]
    clusters: Dict[str, List[str]]
    sweep: Optional[List[Dict[str, int]]] = None
    durations: Optional[Dict[str, int]] = None
    robustness: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)
