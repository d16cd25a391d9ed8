"""Shared pieces of the command handlers: arguments, run configuration, output."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, ValidationError

from app.apis.base import TiePolicy, UsageError
from app.core.router import Arg
from app.env import get_settings

logger = logging.getLogger(__name__)

MAX_SEED = 2**64

INPUT = Arg("input", type=Path, metavar="INPUT")
LABELS = Arg("--labels", action="store_true", help="first row and column carry object labels")
TIE_POLICY = Arg(
    "--tie-policy",
    choices=[policy.value for policy in TiePolicy],
    default=None,
    help="rank tie handling (default from EXEMPLARS_TIE_POLICY, else index)",
)
K = Arg("--k", type=int, help="k-nearest neighborhood size")
AUTO_K = Arg("--auto-k", action="store_true", help="use the optimal scale from the sweep")
GRAPH = Arg("--graph", type=Path, metavar="ADJACENCY", help="adjacency file ('label: n1,n2' per line)")
BOOTSTRAPS = Arg("--bootstraps", type=int, help="number of bootstrap resamples")
SEED = Arg("--seed", type=int, help="64-bit unsigned random seed")
OUT = Arg("--out", type=Path, help="write the result here instead of stdout")


def format_arg(*choices: str) -> Arg:
    return Arg("--format", choices=list(choices), default=choices[0], help=f"output format (default {choices[0]})")


class RunConfig(BaseModel):
    """Validated view of the parsed command line."""

    command: str = ""
    inputs: List[Path] = Field(min_length=1)
    labeled: bool = False
    tie_policy: TiePolicy = TiePolicy.INDEX
    k: Optional[int] = None
    auto_k: bool = False
    graph: Optional[Path] = None
    bootstraps: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=MAX_SEED)
    out: Optional[Path] = None
    format: Optional[str] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        raw = vars(args)
        inputs = raw.get("input")
        if not isinstance(inputs, list):
            inputs = [inputs]
        try:
            return cls(
                command=raw.get("command") or "",
                inputs=inputs,
                labeled=raw.get("labels", False),
                tie_policy=raw.get("tie_policy") or get_settings().tie_policy,
                k=raw.get("k"),
                auto_k=raw.get("auto_k", False),
                graph=raw.get("graph"),
                bootstraps=raw.get("bootstraps"),
                seed=raw.get("seed"),
                out=raw.get("out"),
                format=raw.get("format"),
            )
        except ValidationError as e:
            error = e.errors()[0]
            where = ".".join(str(part) for part in error["loc"])
            raise UsageError(f"{raw.get('command')}: {where}: {error['msg']}")

    def require_neighborhood(self) -> None:
        chosen = [self.k is not None, self.auto_k, self.graph is not None]
        if sum(chosen) != 1:
            raise UsageError(f"{self.command}: give exactly one of --k, --auto-k, --graph")

    def require_seed(self) -> int:
        if self.seed is None:
            raise UsageError(f"{self.command}: --seed is required")
        return self.seed

    def resolved_bootstraps(self) -> int:
        return self.bootstraps if self.bootstraps is not None else get_settings().bootstraps


def emit(text: str, config: RunConfig) -> None:
    if config.out is None:
        sys.stdout.write(text)
        return
    config.out.write_text(text, encoding="utf-8", newline="")
    logger.info("Wrote %s", config.out)


def summary(config: RunConfig, **fields) -> None:
    """One ``key=value`` line; stdout when the result went to a file, else stderr."""
    line = " ".join(f"{key}={value}" for key, value in fields.items() if value is not None)
    print(line, file=sys.stdout if config.out is not None else sys.stderr)
