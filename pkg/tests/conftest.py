from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np
import pytest

from app.apis.base import RelationMatrix
from app.apis.relation import make_relation
from app.core.config import get_experiment_config
from app.env import get_settings

SIX_POINTS = [0, 1, 2, 10, 11, 12]
THREE_POINTS = [0, 1, 3]


def line_relation(points: Sequence[float], labels: Optional[Sequence[str]] = None) -> RelationMatrix:
    x = np.asarray(points, dtype=float)
    return make_relation(np.abs(x[:, None] - x[None, :]), labels)


def random_values(rng: np.random.Generator, n: int) -> np.ndarray:
    values = rng.random((n, n)) + 0.01
    np.fill_diagonal(values, 0.0)
    return values


def oracle_order(values, x: int) -> List[int]:
    n = len(values)
    return sorted(range(n), key=lambda y: (y != x, values[x][y], y))


def oracle_scores(values) -> List[float]:
    """Borda scores by enumerating every voter's sorted row."""
    n = len(values)
    totals = [0.0] * n
    for x in range(n):
        for rank, y in enumerate(oracle_order(values, x), start=1):
            totals[y] += n - rank
    return [total / n for total in totals]


def oracle_exemplars(values, k: int) -> List[int]:
    scores = oracle_scores(values)
    exemplars = []
    for x in range(len(values)):
        members = oracle_order(values, x)[:k]
        if all(scores[y] <= scores[x] for y in members):
            exemplars.append(x)
    return exemplars


@pytest.fixture(autouse=True)
def fresh_settings():
    get_settings.cache_clear()
    get_experiment_config.cache_clear()
    yield
    get_settings.cache_clear()
    get_experiment_config.cache_clear()


@pytest.fixture
def six_points() -> RelationMatrix:
    return line_relation(SIX_POINTS)


@pytest.fixture
def six_points_labeled() -> RelationMatrix:
    return line_relation(SIX_POINTS, [str(p) for p in SIX_POINTS])


@pytest.fixture
def three_points() -> RelationMatrix:
    return line_relation(THREE_POINTS)


@pytest.fixture(scope="session")
def random_relations() -> List[RelationMatrix]:
    rng = np.random.default_rng(20240501)
    return [make_relation(random_values(rng, int(rng.integers(2, 65)))) for _ in range(200)]


@pytest.fixture
def write_file(tmp_path: Path) -> Callable[[str, str], Path]:
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
