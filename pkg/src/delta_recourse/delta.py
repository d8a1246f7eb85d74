"""Per-individual Δ scores and the persisted knowledge base.

Δ for a single-cell change (variable i, factual cell -> cell m) is the
log-odds shift of the positive class it induces:

    Δ = W_i * [(logP(x_i|pos) - logP(x_i|neg)) ... for m minus for x_i]
      = score_logit(x with i -> m) - score_logit(x)

Δ is additive across variables, so the knowledge base stores only
single-cell changes.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CellOutOfRange,
    DuplicateId,
    DuplicateVariable,
    FingerprintMismatch,
    FormatError,
    UnknownRowId,
)
from .nbmodel import WeightedNaiveBayes

KB_FORMAT = "delta-kb/1"


def _llr(model: WeightedNaiveBayes, i: int, cell: int) -> float:
    table = model.cond_logp_[i]
    if not (0 <= cell < table.shape[0]):
        raise CellOutOfRange(model.preprocessor_.schema.variables[i].name, int(cell), table.shape[0])
    return float(table[cell, 1] - table[cell, 0])


def delta_univariate(model: WeightedNaiveBayes, x, i: int, m: int) -> float:
    """Log-odds effect of moving variable i from its factual cell to m."""
    return float(model.weights_[i] * (_llr(model, i, m) - _llr(model, i, int(x[i]))))


def validate_changes(changes):
    seen = set()
    for i, _ in changes:
        if i in seen:
            raise DuplicateVariable(f"variable {i} appears twice in the change set")
        seen.add(i)


def delta_set(model: WeightedNaiveBayes, x, changes) -> float:
    """Sum of univariate Δ over a change set (at most one change per variable)."""
    validate_changes(changes)
    return float(sum(delta_univariate(model, x, i, m) for i, m in changes))


def apply_changes(x, changes) -> tuple:
    out = list(x)
    for i, m in changes:
        out[i] = m
    return tuple(out)


def probability_delta(model: WeightedNaiveBayes, x, changes) -> float:
    """Posterior-probability difference view. Not additive across
    variables; prefer the log-odds Δ for anything compositional."""
    return model.predict_proba(apply_changes(x, changes)) - model.predict_proba(x)


@dataclass
class DeltaTable:
    """The knowledge base: one row per individual, one column per
    (variable, cell) of every weight-included variable."""

    fingerprint: str
    positive_class: str
    columns: list  # list of (variable_name, cell_index)
    row_ids: list
    values: np.ndarray = field(repr=False)       # (N, T)
    factual_cells: np.ndarray = field(repr=False)  # (N, d_full) over the full schema
    base_logit: np.ndarray = field(repr=False)   # (N,)

    def __post_init__(self):
        if len(set(self.row_ids)) != len(self.row_ids):
            raise DuplicateId("row ids must be unique")

    def __len__(self):
        return len(self.row_ids)

    def row_index(self, row_id) -> int:
        try:
            return self.row_ids.index(row_id)
        except ValueError:
            raise UnknownRowId(row_id) from None

    def column_labels(self) -> list:
        return [f"{var}:{cell}" for var, cell in self.columns]

    def variable_names(self) -> list:
        seen = []
        for var, _ in self.columns:
            if var not in seen:
                seen.append(var)
        return seen


def included_variables(model: WeightedNaiveBayes) -> list:
    """Indices of variables with non-zero weight (KB columns)."""
    return [i for i, w in enumerate(model.weights_) if w != 0.0]


def build_kb(model: WeightedNaiveBayes, instances, ids) -> DeltaTable:
    """Materialize Δ for every candidate single-cell change of every
    individual. Factual cells hold exactly 0."""
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise DuplicateId("ids must be unique")
    schema = model.preprocessor_.schema
    include = included_variables(model)
    columns = [
        (schema.variables[i].name, q)
        for i in include
        for q in range(model.cond_logp_[i].shape[0])
    ]
    encoded = np.asarray(instances, dtype=np.int64).reshape(len(ids), model.n_variables)
    base_logit = model.score_logit_many(encoded) if len(ids) else np.zeros(0)

    values = np.zeros((len(ids), len(columns)))
    col = 0
    for i in include:
        table = model.cond_logp_[i]
        llr = table[:, 1] - table[:, 0]  # per cell
        cells = table.shape[0]
        if len(ids):
            fact = llr[encoded[:, i]]
            block = model.weights_[i] * (llr[None, :] - fact[:, None])
            block[np.arange(len(ids)), encoded[:, i]] = 0.0  # exact zero at the factual cell
            values[:, col:col + cells] = block
        col += cells

    return DeltaTable(
        fingerprint=model.fingerprint(),
        positive_class=model.classes_[1],
        columns=columns,
        row_ids=ids,
        values=values,
        factual_cells=encoded,
        base_logit=np.asarray(base_logit, dtype=float),
    )


def _meta_path(path) -> str:
    return os.fspath(path) + ".meta.json"


def save_kb(table: DeltaTable, path):
    """Write the KB as CSV plus a JSON metadata sidecar (<path>.meta.json).

    Reals are written with shortest round-trip precision (repr)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id"] + table.column_labels())
        for rid, row in zip(table.row_ids, table.values):
            writer.writerow([rid] + [repr(float(v)) for v in row])
    meta = {
        "format": KB_FORMAT,
        "fingerprint": table.fingerprint,
        "positive_class": table.positive_class,
        "columns": [[var, cell] for var, cell in table.columns],
        "n_variables": int(table.factual_cells.shape[1]) if table.factual_cells.ndim == 2 else 0,
        "row_ids": [str(r) for r in table.row_ids],
        "factual_cells": table.factual_cells.tolist(),
        "base_logit": [float(v) for v in table.base_logit],
    }
    with open(_meta_path(path), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(meta, sort_keys=True, separators=(",", ":")))


def load_kb(path, model: WeightedNaiveBayes | None = None, strict: bool = False) -> DeltaTable:
    try:
        with open(_meta_path(path), encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read KB metadata: {exc}") from exc
    if meta.get("format") != KB_FORMAT:
        raise FormatError(f"unsupported KB format {meta.get('format')!r}")
    if strict and model is not None and meta["fingerprint"] != model.fingerprint():
        raise FingerprintMismatch(
            "knowledge base was built from a different model than the one loaded"
        )
    columns = [(var, int(cell)) for var, cell in meta["columns"]]
    expected_header = ["id"] + [f"{var}:{cell}" for var, cell in columns]
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty KB file") from None
        if header != expected_header:
            raise FormatError("KB header does not match metadata column order")
        row_ids, rows = [], []
        for record in reader:
            if len(record) != len(expected_header):
                raise FormatError(f"KB row for id {record[:1]} has wrong width")
            row_ids.append(record[0])
            rows.append([float(v) for v in record[1:]])
    if row_ids != meta["row_ids"]:
        raise FormatError("KB row ids do not match metadata")
    n = len(row_ids)
    return DeltaTable(
        fingerprint=meta["fingerprint"],
        positive_class=meta["positive_class"],
        columns=columns,
        row_ids=row_ids,
        values=np.array(rows, dtype=float).reshape(n, len(columns)),
        factual_cells=np.array(meta["factual_cells"], dtype=np.int64).reshape(n, meta.get("n_variables", 0) if n == 0 else -1),
        base_logit=np.array(meta["base_logit"], dtype=float),
    )
