"""CSV parsing, column profiling, and label-balance statistics.

All functions here are pure: the same input bytes always produce the same
Dataset and the same DataReport. A cell is *missing* when, after CSV
unquoting, it is empty or consists only of whitespace.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    DuplicateColumnError,
    EmptyColumnNameError,
    EmptyInputError,
    InvalidEncodingError,
    RaggedRowError,
    UnknownColumnError,
)

PREVIEW_ROWS = 10
TOP_CATEGORIES_CAP = 10

# Column-kind inference thresholds. A column is numeric when at least 95% of
# its non-missing cells parse as decimal numbers; otherwise categorical when
# its distinct count stays under max(20, 5% of rows); otherwise free text.
NUMERIC_FRACTION = 0.95
CATEGORICAL_MIN_DISTINCT = 20
CATEGORICAL_ROW_FRACTION = 0.05


@dataclass(frozen=True)
class Dataset:
    """A rectangular table; ``None`` cells are missing values."""

    column_names: tuple[str, ...]
    rows: tuple[tuple[Optional[str], ...], ...]
    row_count: int = field(init=False)

    def __post_init__(self):
        seen = set()
        for name in self.column_names:
            if not name or not name.strip():
                raise EmptyColumnNameError("header contains an empty column name")
            if name in seen:
                raise DuplicateColumnError(name)
            seen.add(name)
        width = len(self.column_names)
        for i, row in enumerate(self.rows, start=1):
            if len(row) != width:
                raise RaggedRowError(i, width, len(row))
        object.__setattr__(self, "row_count", len(self.rows))

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise UnknownColumnError(name) from None

    def column(self, name: str) -> list[Optional[str]]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def row_dict(self, i: int) -> dict[str, Optional[str]]:
        return dict(zip(self.column_names, self.rows[i]))

    def content_digest(self) -> str:
        """Stable hex digest of the parsed table (column names + cells)."""
        payload = json.dumps(
            [list(self.column_names), [list(r) for r in self.rows]],
            separators=(",", ":"),
            ensure_ascii=False,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class NumericStats:
    mean: float
    std_dev: float
    min: float
    max: float


@dataclass(frozen=True)
class ColumnProfile:
    name: str
    inferred_kind: str  # "text" | "numeric" | "categorical"
    missing_count: int
    distinct_count: int
    numeric_stats: Optional[NumericStats] = None
    top_categories: Optional[tuple[tuple[str, int], ...]] = None

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "inferred_kind": self.inferred_kind,
            "missing_count": self.missing_count,
            "distinct_count": self.distinct_count,
            "numeric_stats": None,
            "top_categories": None,
        }
        if self.numeric_stats is not None:
            d["numeric_stats"] = {
                "mean": self.numeric_stats.mean,
                "std_dev": self.numeric_stats.std_dev,
                "min": self.numeric_stats.min,
                "max": self.numeric_stats.max,
            }
        if self.top_categories is not None:
            d["top_categories"] = [[v, c] for v, c in self.top_categories]
        return d


@dataclass(frozen=True)
class DataReport:
    dataset_id: str
    row_count: int
    profiles: tuple[ColumnProfile, ...]
    preview: tuple[tuple[Optional[str], ...], ...]
    duplicate_row_fraction: float

    @property
    def column_names(self) -> list[str]:
        return [p.name for p in self.profiles]

    def profile_for(self, name: str) -> ColumnProfile:
        for p in self.profiles:
            if p.name == name:
                return p
        raise UnknownColumnError(name)

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "row_count": self.row_count,
            "profiles": [p.to_dict() for p in self.profiles],
            "preview": [list(r) for r in self.preview],
            "duplicate_row_fraction": self.duplicate_row_fraction,
        }


@dataclass(frozen=True)
class LabelBalance:
    column: str
    counts: dict[str, int]
    imbalance_ratio: float

    def to_dict(self) -> dict:
        return {
            "column": self.column,
            "counts": dict(self.counts),
            "imbalance_ratio": self.imbalance_ratio,
        }


def _clean_cell(cell: str) -> Optional[str]:
    # Whitespace-only content carries no signal; normalize it to missing so
    # the rule matches training-time handling of empty inference fields.
    return None if cell.strip() == "" else cell


def parse_csv(data: bytes) -> Dataset:
    """Parse RFC 4180 CSV bytes (UTF-8, LF or CRLF) into a Dataset.

    The first record is the header. Raises EmptyInputError, RaggedRowError,
    DuplicateColumnError, EmptyColumnNameError, or InvalidEncodingError.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidEncodingError(str(exc)) from None
    if text.startswith("﻿"):
        text = text[1:]

    reader = csv.reader(io.StringIO(text, newline=""))
    records = [rec for rec in reader if rec]  # skip fully blank lines
    if not records:
        raise EmptyInputError("no header record")

    header = tuple(records[0])
    width = len(header)
    rows = []
    for i, rec in enumerate(records[1:], start=1):
        if len(rec) != width:
            raise RaggedRowError(i, width, len(rec))
        rows.append(tuple(_clean_cell(c) for c in rec))
    return Dataset(column_names=header, rows=tuple(rows))


def _try_number(cell: str) -> Optional[float]:
    try:
        value = float(cell)
    except ValueError:
        return None
    # "nan"/"inf" tokens parse via float() but are not decimal numbers
    return value if math.isfinite(value) else None


def _profile_column(name: str, cells: Sequence[Optional[str]], row_count: int) -> ColumnProfile:
    present = [c for c in cells if c is not None]
    missing = len(cells) - len(present)
    distinct = len(set(present))

    numbers = [v for v in (_try_number(c) for c in present) if v is not None]
    if present and len(numbers) >= NUMERIC_FRACTION * len(present):
        n = len(numbers)
        mean = sum(numbers) / n
        if n > 1:
            std = math.sqrt(sum((x - mean) ** 2 for x in numbers) / (n - 1))
        else:
            std = 0.0
        stats = NumericStats(mean=mean, std_dev=std, min=min(numbers), max=max(numbers))
        return ColumnProfile(name, "numeric", missing, distinct, numeric_stats=stats)

    if distinct <= max(CATEGORICAL_MIN_DISTINCT, CATEGORICAL_ROW_FRACTION * row_count):
        counts: dict[str, int] = {}
        for c in present:
            counts[c] = counts.get(c, 0) + 1
        top = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:TOP_CATEGORIES_CAP]
        return ColumnProfile(name, "categorical", missing, distinct,
                             top_categories=tuple(top))

    return ColumnProfile(name, "text", missing, distinct)


def profile_dataset(d: Dataset, dataset_id: Optional[str] = None) -> DataReport:
    """Profile every column and summarize the table.

    ``dataset_id`` defaults to a digest of the parsed content, so identical
    bytes always yield an identical report.
    """
    if dataset_id is None:
        dataset_id = d.content_digest()

    profiles = tuple(
        _profile_column(name, d.column(name), d.row_count) for name in d.column_names
    )
    preview = d.rows[: min(PREVIEW_ROWS, d.row_count)]

    if d.row_count:
        distinct_rows = len(set(d.rows))
        dup_fraction = (d.row_count - distinct_rows) / d.row_count
    else:
        dup_fraction = 0.0

    return DataReport(
        dataset_id=dataset_id,
        row_count=d.row_count,
        profiles=profiles,
        preview=preview,
        duplicate_row_fraction=dup_fraction,
    )


def label_balance(d: Dataset, column: str) -> LabelBalance:
    """Class counts over non-missing values plus max/min imbalance ratio."""
    cells = d.column(column)
    counts: dict[str, int] = {}
    for c in cells:
        if c is not None:
            counts[c] = counts.get(c, 0) + 1
    ordered = dict(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    if ordered:
        values = list(ordered.values())
        ratio = max(values) / min(values)
    else:
        ratio = 1.0
    return LabelBalance(column=column, counts=ordered, imbalance_ratio=ratio)
