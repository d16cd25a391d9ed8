import json
import logging
from functools import lru_cache
from pathlib import Path

from pydantic import ValidationError

from app.apis.base import OutlierConfig

logger = logging.getLogger(__name__)


@lru_cache()
def get_experiment_config(path: Path = Path("experiments.json")) -> OutlierConfig:
    """Load the outlier protocol defaults, falling back to built-in values."""
    try:
        cfg = json.loads(Path(path).read_text(encoding="utf-8"))
        return OutlierConfig(**cfg.get("outliers", {}))
    except FileNotFoundError:
        logger.info("No experiment config at %s, using defaults", path)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        logger.warning("Error loading %s: %s", path, e)
    return OutlierConfig()
