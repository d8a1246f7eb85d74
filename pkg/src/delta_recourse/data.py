"""Tabular dataset loading, schema handling and train/test splitting.

Missing values: an empty CSV field is recorded as None for numeric
variables and as the empty-string modality for categorical ones (it
becomes a modality of its own downstream).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidFraction,
    MissingColumn,
    ParseError,
    UnknownLabel,
)

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class VariableSpec:
    name: str
    kind: str
    actionable: bool = True

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise ValueError(f"unknown variable kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    variables: tuple[VariableSpec, ...]
    target: str
    positive_label: str

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValueError("schema needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if self.target in names:
            raise ValueError("target name collides with a variable name")

    @property
    def names(self):
        return [v.name for v in self.variables]

    def index_of(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "positive_label": self.positive_label,
            "variables": [
                {"name": v.name, "kind": v.kind, "actionable": v.actionable}
                for v in self.variables
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Schema":
        return cls(
            variables=tuple(
                VariableSpec(v["name"], v["kind"], bool(v.get("actionable", True)))
                for v in d["variables"]
            ),
            target=d["target"],
            positive_label=d["positive_label"],
        )

    @classmethod
    def from_json(cls, path) -> "Schema":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Dataset:
    schema: Schema
    rows: list = field(repr=False)
    labels: list = field(repr=False)

    def __post_init__(self):
        if len(self.rows) != len(self.labels):
            raise ValueError("rows and labels must have equal length")

    def __len__(self):
        return len(self.rows)

    @property
    def label_values(self) -> tuple[str, str]:
        """(negative, positive) label pair observed in the data."""
        distinct = sorted(set(self.labels))
        if self.positive_label in distinct and len(distinct) <= 2:
            neg = [v for v in distinct if v != self.positive_label]
            return (neg[0] if neg else "", self.positive_label)
        raise UnknownLabel(-1, distinct)

    @property
    def positive_label(self) -> str:
        return self.schema.positive_label

    def binary_labels(self) -> np.ndarray:
        """1 for the positive class, 0 otherwise."""
        pos = self.positive_label
        return np.fromiter((1 if y == pos else 0 for y in self.labels), dtype=np.int64, count=len(self))

    def column(self, name: str) -> list:
        i = self.schema.index_of(name)
        return [r[i] for r in self.rows]

    def subset(self, indices) -> "Dataset":
        return Dataset(self.schema, [self.rows[i] for i in indices], [self.labels[i] for i in indices])


def _parse_value(raw: str, kind: str, row: int, column: str):
    if kind == NUMERIC:
        if raw == "" or raw.strip() == "":
            return None
        try:
            return float(raw)
        except ValueError:
            raise ParseError(row, column, raw) from None
    return raw


def load_csv(path, schema: Schema, negative_label: str | None = None) -> Dataset:
    """Read an RFC 4180 CSV with a header row into a Dataset.

    When negative_label is given, any target value outside the two
    configured labels raises UnknownLabel; otherwise the second label is
    inferred from the file and more than two distinct values is an error.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumn(schema.target) from None
        col_idx = {name: i for i, name in enumerate(header)}
        for var in schema.variables:
            if var.name not in col_idx:
                raise MissingColumn(var.name)
        if schema.target not in col_idx:
            raise MissingColumn(schema.target)

        var_cols = [(var, col_idx[var.name]) for var in schema.variables]
        target_col = col_idx[schema.target]
        allowed = {schema.positive_label, negative_label} if negative_label is not None else None

        rows, labels = [], []
        for rownum, record in enumerate(reader):
            label = record[target_col]
            if allowed is not None and label not in allowed:
                raise UnknownLabel(rownum, label)
            rows.append(tuple(_parse_value(record[c], var.kind, rownum, var.name) for var, c in var_cols))
            labels.append(label)

    if allowed is None:
        distinct = set(labels)
        if len(distinct) > 2:
            raise UnknownLabel(-1, sorted(distinct))
    return Dataset(schema, rows, labels)


def split(dataset: Dataset, train_fraction: float, seed: int, stratify: bool = False):
    """Deterministic shuffled split; |train| = round(train_fraction * N).

    Uses numpy's PCG64 generator so the split is bit-reproducible for a
    given seed across platforms.
    """
    if not (0.0 < train_fraction < 1.0):
        raise InvalidFraction(train_fraction)
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least 2 rows to split")
    rng = np.random.Generator(np.random.PCG64(seed))
    n_train = int(round(train_fraction * n))
    if stratify:
        y = dataset.binary_labels()
        train_idx = []
        all_idx = np.arange(n)
        for cls in (0, 1):
            members = all_idx[y == cls]
            perm = members[rng.permutation(len(members))]
            take = int(round(train_fraction * len(members)))
            train_idx.extend(perm[:take].tolist())
        train_set = set(train_idx)
        # trim or pad to the exact global count, preserving shuffle order
        rest = [i for i in all_idx.tolist() if i not in train_set]
        while len(train_idx) > n_train:
            rest.append(train_idx.pop())
        while len(train_idx) < n_train and rest:
            train_idx.append(rest.pop(0))
        test_idx = [i for i in range(n) if i not in set(train_idx)]
        return dataset.subset(sorted(train_idx)), dataset.subset(sorted(test_idx))
    perm = rng.permutation(n)
    return dataset.subset(perm[:n_train].tolist()), dataset.subset(perm[n_train:].tolist())
