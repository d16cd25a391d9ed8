"""Usage:

from app.env import get_settings

if get_settings().tie_policy == TiePolicy.MIDRANK:
    print("Scoring without label-order tie breaks")

Values come from the environment; ``main.py`` calls ``load_dotenv()`` first so a
local ``.env`` file can provide them.
"""

import os
from functools import lru_cache
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

from app.apis.base import TiePolicy


class Settings(BaseModel):
    log_level: str = "WARNING"
    tie_policy: TiePolicy = TiePolicy.INDEX
    bootstraps: int = Field(default=200, ge=1)
    experiments: Path = Path("experiments.json")

    @field_validator("log_level")
    @classmethod
    def check_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value}")
        return value

    @classmethod
    def from_env(cls) -> "Settings":
        raw = {
            "log_level": os.environ.get("EXEMPLARS_LOG_LEVEL"),
            "tie_policy": os.environ.get("EXEMPLARS_TIE_POLICY"),
            "bootstraps": os.environ.get("EXEMPLARS_BOOTSTRAPS"),
            "experiments": os.environ.get("EXEMPLARS_EXPERIMENTS"),
        }
        return cls(**{key: value for key, value in raw.items() if value is not None})


@lru_cache()
def get_settings() -> Settings:
    return Settings.from_env()


__all__ = [
    "Settings",
    "get_settings",
]
