"""CSV ingestion driven by a JSON schema.

The schema says which column is the label (and which of its values mean
+1), which column carries the sensitive attribute (and which values form
group 1), and how every other column is treated: one-hot encoded, kept as a
number, or dropped. The returned report records everything needed to encode
another file into the same feature space (levels, means, standard
deviations), plus counts of rejected rows.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core_data import Dataset
from .errors import SchemaError, ShapeError


@dataclass(frozen=True)
class TabularSchema:
    label_column: str
    positive_labels: tuple
    sensitive_column: str
    group1_values: tuple = ()
    group1_range: tuple | None = None
    negative_labels: tuple | None = None
    group0_values: tuple | None = None
    categorical: tuple = ()
    numeric: tuple = ()
    drop: tuple = ()
    standardize: bool = True
    expected_d: int | None = None
    drop_unlisted: bool = False
    delimiter: str = ","
    name: str = ""

    def __post_init__(self):
        for key in ("positive_labels", "group1_values", "categorical", "numeric", "drop"):
            object.__setattr__(self, key, tuple(str(v) for v in getattr(self, key)))
        for key in ("negative_labels", "group0_values"):
            if getattr(self, key) is not None:
                object.__setattr__(self, key, tuple(str(v) for v in getattr(self, key)))
        if not self.positive_labels:
            raise SchemaError("positive_labels must not be empty")
        if bool(self.group1_values) == (self.group1_range is not None):
            raise SchemaError("give exactly one of group1_values and group1_range")
        if self.group1_range is not None:
            lo, hi = (float(v) for v in self.group1_range)
            if not lo <= hi:
                raise SchemaError("group1_range must be [low, high] with low <= high")
            object.__setattr__(self, "group1_range", (lo, hi))
        features = self.categorical + self.numeric
        roles = Counter(features + self.drop)
        twice = sorted(c for c, k in roles.items() if k > 1)
        if twice:
            raise SchemaError(f"columns classified more than once: {twice}")
        for special in (self.label_column, self.sensitive_column):
            if special in features:
                raise SchemaError(f"{special!r} cannot also be a feature column")

    @classmethod
    def from_dict(cls, d: dict) -> "TabularSchema":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise SchemaError(f"unknown schema keys: {unknown}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise SchemaError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "TabularSchema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def label_of(self, raw: str):
        if raw in self.positive_labels:
            return 1
        if self.negative_labels is None or raw in self.negative_labels:
            return -1
        return None

    def group_of(self, raw: str):
        if self.group1_range is not None:
            try:
                v = float(raw)
            except ValueError:
                return None
            if not np.isfinite(v):
                return None
            return int(self.group1_range[0] <= v <= self.group1_range[1])
        if raw in self.group1_values:
            return 1
        if self.group0_values is None or raw in self.group0_values:
            return 0
        return None


@dataclass
class Encoding:
    """Feature-space definition learned from one file and reusable on others."""

    levels: dict = field(default_factory=dict)
    means: dict = field(default_factory=dict)
    stds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"levels": self.levels, "means": self.means, "stds": self.stds}

    @classmethod
    def from_dict(cls, d: dict) -> "Encoding":
        return cls({k: list(v) for k, v in d["levels"].items()},
                   dict(d.get("means", {})), dict(d.get("stds", {})))


def _read_rows(path, delimiter):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: no header row") from None
        rows = [r for r in reader if r]
    return header, rows


def load_csv(path, schema: TabularSchema, encoding: Encoding | None = None):
    """Read ``path`` into a :class:`Dataset` and an encoding report.

    Rows whose label or group value is unmapped, whose numeric cells do not
    parse, or (when ``encoding`` is given) whose categorical level was never
    seen are skipped and counted. Without ``encoding`` the levels are taken in
    order of first appearance and numeric columns are z-scored on the rows
    kept here.
    """
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"no such file: {path}")
    header, rows = _read_rows(path, schema.delimiter)
    col = {name: i for i, name in enumerate(header)}
    needed = (schema.label_column, schema.sensitive_column) + schema.categorical + schema.numeric
    missing = [c for c in needed if c not in col]
    if missing:
        raise SchemaError(f"missing columns: {missing}")
    unclassified = [c for c in header if c not in set(needed) | set(schema.drop)]
    if unclassified and not schema.drop_unlisted:
        raise SchemaError(f"columns with no role in the schema: {unclassified}")

    rejected = Counter()
    labels, groups, cats, nums = [], [], [], []
    for row in rows:
        if len(row) != len(header):
            rejected["wrong_field_count"] += 1
            continue
        cell = lambda c: row[col[c]].strip()
        y = schema.label_of(cell(schema.label_column))
        if y is None:
            rejected["unmapped_label"] += 1
            continue
        z = schema.group_of(cell(schema.sensitive_column))
        if z is None:
            rejected["unmapped_group"] += 1
            continue
        try:
            values = [float(cell(c)) for c in schema.numeric]
        except ValueError:
            rejected["numeric_parse"] += 1
            continue
        if not all(np.isfinite(values)):
            rejected["numeric_parse"] += 1
            continue
        levels = [cell(c) for c in schema.categorical]
        if encoding is not None and any(
                v not in encoding.levels[c] for c, v in zip(schema.categorical, levels)):
            rejected["unseen_level"] += 1
            continue
        labels.append(y)
        groups.append(z)
        nums.append(values)
        cats.append(levels)

    if not labels:
        raise ShapeError(f"{path}: no rows survived ingestion ({dict(rejected)})")

    if encoding is None:
        encoding = Encoding()
        for j, c in enumerate(schema.categorical):
            encoding.levels[c] = list(dict.fromkeys(r[j] for r in cats))
    num = np.asarray(nums, dtype=np.float64).reshape(len(labels), len(schema.numeric))
    if schema.standardize:
        for j, c in enumerate(schema.numeric):
            if c not in encoding.means:
                encoding.means[c] = float(num[:, j].mean())
                sd = float(num[:, j].std())
                encoding.stds[c] = sd if sd > 0 else 1.0
            num[:, j] = (num[:, j] - encoding.means[c]) / encoding.stds[c]

    blocks, names = [num], list(schema.numeric)
    for j, c in enumerate(schema.categorical):
        index = {v: k for k, v in enumerate(encoding.levels[c])}
        onehot = np.zeros((len(labels), len(index)))
        onehot[np.arange(len(labels)), [index[r[j]] for r in cats]] = 1.0
        blocks.append(onehot)
        names += [f"{c}={v}" for v in encoding.levels[c]]
    X = np.hstack(blocks)

    report = {
        "path": str(path),
        "rows_read": len(rows),
        "rows_kept": len(labels),
        "rejected": dict(rejected),
        "d": X.shape[1],
        "expected_d": schema.expected_d,
        "d_matches": schema.expected_d is None or schema.expected_d == X.shape[1],
        "feature_names": names,
        "encoding": encoding.to_dict(),
    }
    return Dataset(X, labels, groups), report
