"""Pairwise valued relation: validation and the relation CSV format.

A relation is total, non-negative and zero on the diagonal. Symmetry and the
triangle inequality are not required; asymmetry is only reported.
"""

import argparse
import logging
from collections import Counter
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Type

import numpy as np
import pandas as pd

from app.apis.base import (
    ExemplarError,
    InputError,
    RelationError,
    RelationMatrix,
    RelationShapeError,
    ValidationReport,
    Violation,
)
from app.apis.cli import INPUT, LABELS, OUT, RunConfig, emit, format_arg, summary
from app.core.router import CommandRouter

logger = logging.getLogger(__name__)

router = CommandRouter()


def validate_relation(values) -> ValidationReport:
    """Check a raw table against the relation rules.

    Every violation is reported; a ragged (non-rectangular) table raises
    ``RelationShapeError`` instead since it has no cell coordinates to report.
    """
    if isinstance(values, np.ndarray):
        table = values
    else:
        rows = [list(row) for row in values]
        if len({len(row) for row in rows}) > 1:
            raise RelationShapeError("relation table is not rectangular")
        table = np.asarray(rows, dtype=float)

    if table.ndim != 2:
        if table.size == 0:
            table = table.reshape(0, 0)
        else:
            raise RelationShapeError("relation table is not rectangular")
    table = table.astype(float, copy=False)

    violations: List[Violation] = []
    n_rows, n_cols = table.shape
    if n_rows != n_cols or n_rows == 0:
        violations.append(Violation(rule="square", row=n_rows, column=n_cols))

    finite = np.isfinite(table)
    for i, j in zip(*np.nonzero(~finite)):
        violations.append(Violation(rule="finite", row=int(i), column=int(j), value=float(table[i, j])))

    for i, j in zip(*np.nonzero(finite & (table < 0))):
        violations.append(Violation(rule="positive", row=int(i), column=int(j), value=float(table[i, j])))

    m = min(n_rows, n_cols)
    diag = table[np.arange(m), np.arange(m)]
    for i in np.flatnonzero(np.isfinite(diag) & (diag != 0)):
        violations.append(Violation(rule="zero-diagonal", row=int(i), column=int(i), value=float(diag[i])))

    is_symmetric = n_rows == n_cols and bool(np.array_equal(table, table.T))
    return ValidationReport(violations=violations, is_symmetric=is_symmetric)


def make_relation(values, labels: Optional[Sequence[str]] = None) -> RelationMatrix:
    """Validate ``values`` and wrap them as an immutable ``RelationMatrix``."""
    report = validate_relation(values)
    if not report.valid:
        first = report.violations[0]
        raise RelationError(
            f"invalid relation: {len(report.violations)} violation(s), first is "
            f"{first.rule} at ({first.row}, {first.column})",
            report,
        )

    table = np.array(values, dtype=float)
    n = table.shape[0]
    if labels is None:
        labels = [str(i) for i in range(n)]
    labels = [str(label) for label in labels]
    if len(labels) != n:
        raise RelationError(f"expected {n} labels, got {len(labels)}")
    duplicates = sorted(label for label, count in Counter(labels).items() if count > 1)
    if duplicates:
        raise RelationError(f"duplicate labels: {', '.join(duplicates)}")

    table.flags.writeable = False
    return RelationMatrix(labels=labels, values=table)


def read_cells(path: Path, shape_error: Type[ExemplarError] = RelationShapeError) -> np.ndarray:
    """Read a headerless CSV into a table of stripped strings.

    Rows of different lengths, an empty file and tokenizer failures raise
    ``shape_error``; bytes that are not UTF-8 raise ``InputError``.
    """
    try:
        frame = pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except UnicodeDecodeError as e:
        raise InputError(f"{path}: not valid UTF-8 ({e.reason} at byte {e.start})")
    except pd.errors.EmptyDataError:
        raise shape_error(f"{path}: empty file")
    except pd.errors.ParserError as e:
        raise shape_error(f"{path}: {e}")

    # short rows come back padded, with NaN or '' depending on the parser
    cells = np.char.strip(frame.fillna("").to_numpy(dtype=str))
    filled = np.char.str_len(cells) > 0
    widths = np.where(filled.any(axis=1), filled.shape[1] - np.argmax(filled[:, ::-1], axis=1), 0)
    if len(set(widths.tolist())) > 1:
        raise shape_error(f"{path}: rows have different lengths ({widths.min()} to {widths.max()} fields)")
    return cells


def parse_relation_table(path: Path, labeled: bool = False) -> Tuple[Optional[List[str]], np.ndarray]:
    """Read a relation CSV without validating the relation rules."""
    cells = read_cells(path)
    labels = None
    if labeled:
        header = cells[0, 1:].tolist()
        labels = cells[1:, 0].tolist()
        if header != labels:
            raise InputError(f"{path}: header labels do not match row labels")
        cells = cells[1:, 1:]

    try:
        values = cells.astype(np.float64)
    except ValueError as e:
        raise InputError(f"{path}: {e}")
    return labels, values


def load_relation(path: Path, labeled: bool = False) -> RelationMatrix:
    labels, values = parse_relation_table(path, labeled)
    if values.shape[0] != values.shape[1]:
        raise RelationShapeError(
            f"{path}: relation must be square, got {values.shape[0]} rows of {values.shape[1]} values"
        )
    relation = make_relation(values, labels)
    logger.info("Loaded relation with n=%d from %s", relation.n, path)
    return relation


def format_cost(value: float) -> str:
    # repr gives the shortest decimal that parses back to the same double
    return repr(float(value))


def relation_to_csv(relation: RelationMatrix, labeled: bool = False) -> str:
    frame = pd.DataFrame(relation.values).map(format_cost)
    if labeled:
        frame.index = relation.labels
        frame.columns = relation.labels
        return frame.to_csv(index_label="label", lineterminator="\n")
    return frame.to_csv(header=False, index=False, lineterminator="\n")


def save_relation(relation: RelationMatrix, path: Path, labeled: bool = False) -> None:
    Path(path).write_text(relation_to_csv(relation, labeled), encoding="utf-8", newline="")


def _violation_line(violation: Violation) -> str:
    fields = violation.model_dump(exclude_none=True)
    return " ".join([fields.pop("rule")] + [f"{key}={value}" for key, value in fields.items()])


@router.command("validate", INPUT, LABELS, format_arg("text", "json"), OUT)
def validate_command(args: argparse.Namespace) -> int:
    """Check a relation file and list every violation"""
    config = RunConfig.from_args(args)
    labels, values = parse_relation_table(config.inputs[0], config.labeled)
    report = validate_relation(values)
    if report.valid and labels is not None:
        # duplicate labels are the one rule checked outside the table
        make_relation(values, labels)

    if config.format == "json":
        text = report.model_dump_json(indent=2) + "\n"
    else:
        lines = [_violation_line(v) for v in report.violations] or ["valid"]
        text = "\n".join(lines) + "\n"
    emit(text, config)

    summary(config, valid=str(report.valid).lower(), symmetric=str(report.is_symmetric).lower())
    return 0 if report.valid else 1
