"""Command-line pipeline: train, kb, explain, cluster, serve.

Every flag mirrors a key of the JSON config file; flags win. Exit codes:
0 ok, 2 input error, 3 consistency error, 4 internal error.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import cluster as cluster_mod
from . import explain as explain_mod
from .data import Schema, load_csv, split
from .delta import build_kb, load_kb, save_kb
from .errors import (
    CellOutOfRange,
    DeltaRecourseError,
    DuplicateId,
    DuplicateVariable,
    EmptyDataset,
    FingerprintMismatch,
    FormatError,
    InfeasibleConstraints,
    InvalidFraction,
    LengthMismatch,
    MissingColumn,
    ParseError,
    SchemaMismatch,
    TooFewRows,
    UnknownLabel,
    UnknownRowId,
)
from .nbmodel import WeightedNaiveBayes, auc_score
from .preprocess import TablePreprocessor, encode

INPUT_ERRORS = (MissingColumn, ParseError, UnknownLabel, InvalidFraction, EmptyDataset,
                TooFewRows, FileNotFoundError, json.JSONDecodeError, KeyError, ValueError)
CONSISTENCY_ERRORS = (FingerprintMismatch, SchemaMismatch, FormatError, UnknownRowId,
                      CellOutOfRange, DuplicateVariable, DuplicateId, LengthMismatch,
                      InfeasibleConstraints)


def pipeline_command(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except CONSISTENCY_ERRORS as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(3)
        except INPUT_ERRORS as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(2)
        except DeltaRecourseError as exc:
            click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(4)
    return wrapper


def merged_config(config_path, flags: dict) -> dict:
    cfg = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    for key, value in flags.items():
        if value is not None:
            cfg[key] = value
    return cfg


@click.group()
def main():
    """Counterfactual knowledge-base pipeline for a weighted naive Bayes
    classifier. DELTA_RECOURSE_THREADS caps internal parallelism."""


def _load_split(cfg):
    schema = Schema.from_json(cfg["schema"])
    dataset = load_csv(cfg["data"], schema)
    return split(
        dataset,
        float(cfg.get("train_fraction", 0.8)),
        int(cfg.get("seed", 1)),
        stratify=bool(cfg.get("stratify", False)),
    )


@main.command()
@click.option("--config", type=click.Path(exists=True))
@click.option("--data", type=click.Path())
@click.option("--schema", "schema_", type=click.Path())
@click.option("--out-model", type=click.Path())
@click.option("--report", type=click.Path())
@click.option("--train-fraction", type=float)
@click.option("--seed", type=int)
@click.option("--stratify/--no-stratify", default=None)
@click.option("--smoothing", type=float)
@click.option("--max-bins", type=int)
@click.option("--min-support", type=int)
@click.option("--weight-mode", type=click.Choice(["select", "uniform", "fixed"]))
@click.option("--weights", help="comma-separated fractional weights for --weight-mode fixed")
@pipeline_command
def train(config, data, schema_, out_model, report, train_fraction, seed, stratify,
          smoothing, max_bins, min_support, weight_mode, weights):
    """Fit the preprocessor and the weighted naive Bayes model."""
    cfg = merged_config(config, {
        "data": data, "schema": schema_, "out_model": out_model, "report": report,
        "train_fraction": train_fraction, "seed": seed, "stratify": stratify,
        "smoothing": smoothing, "max_bins": max_bins, "min_support": min_support,
        "weight_mode": weight_mode, "weights": weights,
    })
    train_set, test_set = _load_split(cfg)
    pre = TablePreprocessor(
        max_bins=int(cfg.get("max_bins", 32)),
        min_support=int(cfg.get("min_support", 16)),
    ).fit(train_set)
    enc_train = pre.transform(train_set)
    enc_test = pre.transform(test_set)

    model = WeightedNaiveBayes(smoothing=float(cfg.get("smoothing", 1.0)))
    model.fit(enc_train, train_set.labels, pre.preprocessor_)
    mode = cfg.get("weight_mode", "select")
    if mode == "select":
        model.select_weights(enc_test, test_set.labels)
    elif mode == "fixed":
        raw = cfg["weights"]
        vals = [float(v) for v in raw.split(",")] if isinstance(raw, str) else [float(v) for v in raw]
        model.set_weights(vals)
    # uniform: keep all weights at 1

    model.save(cfg["out_model"])

    scores = model.score_logit_many(enc_test)
    y = test_set.binary_labels()
    schema = model.preprocessor_.schema
    report_doc = {
        "test_auc": auc_score(scores, y) if len(y) else None,
        "test_accuracy": float(((scores > 0).astype(int) == y).mean()) if len(y) else None,
        "n_train": len(train_set),
        "n_test": len(test_set),
        "retained_variables": [
            {"name": v.name, "weight": float(w), "cells": int(model.cond_logp_[i].shape[0])}
            for i, (v, w) in enumerate(zip(schema.variables, model.weights_))
            if w != 0.0
        ],
        "fingerprint": model.fingerprint(),
    }
    report_path = cfg.get("report")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report_doc, fh, indent=2, sort_keys=True)
    click.echo(json.dumps(report_doc, indent=2, sort_keys=True))


@main.command()
@click.option("--config", type=click.Path(exists=True))
@click.option("--model", "model_path", type=click.Path())
@click.option("--data", type=click.Path())
@click.option("--schema", "schema_", type=click.Path())
@click.option("--slice", "slice_", type=click.Choice(["train", "test", "all"]))
@click.option("--train-fraction", type=float)
@click.option("--seed", type=int)
@click.option("--stratify/--no-stratify", default=None)
@click.option("--out-kb", type=click.Path())
@pipeline_command
def kb(config, model_path, data, schema_, slice_, train_fraction, seed, stratify, out_kb):
    """Build the Δ knowledge base over a dataset slice (default: test)."""
    cfg = merged_config(config, {
        "model": model_path, "data": data, "schema": schema_, "slice": slice_,
        "train_fraction": train_fraction, "seed": seed, "stratify": stratify,
        "out_kb": out_kb,
    })
    model = WeightedNaiveBayes.load(cfg["model"])
    train_set, test_set = _load_split(cfg)
    which = cfg.get("slice", "test")
    if which == "train":
        part, offset = train_set, 0
    elif which == "all":
        full = load_csv(cfg["data"], Schema.from_json(cfg["schema"]))
        part, offset = full, 0
    else:
        part, offset = test_set, len(train_set)
    encoded = encode(part, model.preprocessor_)
    ids = [f"row-{offset + i}" for i in range(len(part))]
    table = build_kb(model, encoded, ids)
    save_kb(table, cfg["out_kb"])
    click.echo(f"wrote KB with {len(table)} rows x {len(table.columns)} columns to {cfg['out_kb']}")


def _load_constraints(cfg):
    path = cfg.get("constraints")
    if not path:
        return explain_mod.ConstraintSet()
    with open(path, encoding="utf-8") as fh:
        return explain_mod.ConstraintSet.from_dict(json.load(fh))


@main.command()
@click.option("--config", type=click.Path(exists=True))
@click.option("--model", "model_path", type=click.Path())
@click.option("--kb", "kb_path", type=click.Path())
@click.option("--id", "row_id")
@click.option("--cells", help="comma-separated cell indices instead of --id")
@click.option("--constraints", type=click.Path())
@click.option("--threshold", type=float)
@click.option("--preventive", is_flag=True, default=None)
@click.option("--steps", type=int)
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text")
@pipeline_command
def explain(config, model_path, kb_path, row_id, cells, constraints, threshold,
            preventive, steps, fmt):
    """Print the trajectory for one individual (reactive or preventive)."""
    cfg = merged_config(config, {
        "model": model_path, "kb": kb_path, "id": row_id, "cells": cells,
        "constraints": constraints, "threshold": threshold,
        "preventive": preventive, "steps": steps,
    })
    model = WeightedNaiveBayes.load(cfg["model"])
    table = load_kb(cfg["kb"], model=model, strict=True)
    if cfg.get("id") is not None:
        idx = table.row_index(str(cfg["id"]))
        x = tuple(int(c) for c in table.factual_cells[idx])
    elif cfg.get("cells"):
        raw = cfg["cells"]
        x = tuple(int(v) for v in (raw.split(",") if isinstance(raw, str) else raw))
    else:
        raise ValueError("one of --id or --cells is required")
    cons = _load_constraints(cfg)
    if cfg.get("preventive"):
        result = explain_mod.negative_semifactual(model, x, cons, steps=int(cfg.get("steps", 1)))
    else:
        result = explain_mod.greedy_counterfactual(model, x, cons, threshold=float(cfg.get("threshold", 0.5)))
    rendered = explain_mod.render_trajectory(result, model)
    click.echo(rendered.to_csv() if fmt == "csv" else rendered.to_text())
    click.echo(f"status: {result.status}  final_prob: {result.final_prob!r}  "
               f"plausibility: {result.plausibility_final!r}")


@main.command()
@click.option("--config", type=click.Path(exists=True))
@click.option("--model", "model_path", type=click.Path())
@click.option("--kb", "kb_path", type=click.Path())
@click.option("--k-min", type=int)
@click.option("--k-max", type=int)
@click.option("--seed", type=int)
@click.option("--all-columns", is_flag=True, default=None,
              help="cluster on every KB column, not just actionable variables")
@click.option("--out-profiles", type=click.Path())
@click.option("--out-profiles-csv", type=click.Path())
@pipeline_command
def cluster(config, model_path, kb_path, k_min, k_max, seed, all_columns,
            out_profiles, out_profiles_csv):
    """Elbow-select k, fit k-means on KB rows and export cluster profiles."""
    cfg = merged_config(config, {
        "model": model_path, "kb": kb_path, "k_min": k_min, "k_max": k_max,
        "cluster_seed": seed, "all_columns": all_columns,
        "out_profiles": out_profiles, "out_profiles_csv": out_profiles_csv,
    })
    model = WeightedNaiveBayes.load(cfg["model"])
    table = load_kb(cfg["kb"], model=model, strict=True)
    columns = None
    if not cfg.get("all_columns"):
        columns = cluster_mod.profile_columns(table, model.preprocessor_.schema)
        if not columns:
            columns = None
    k_lo, k_hi = int(cfg.get("k_min", 2)), int(cfg.get("k_max", 12))
    seed_val = int(cfg.get("cluster_seed", 0))
    chosen, curve, low_conf = cluster_mod.elbow_select(table, k_lo, k_hi, seed_val, columns=columns)
    result = cluster_mod.fit_kmeans(table, chosen, seed_val, columns=columns,
                                    restarts=cluster_mod.DEFAULT_RESTARTS)
    preds = table.base_logit > 0.0  # predicted positive at threshold 0.5
    profs = cluster_mod.profiles(result, table, preds)
    doc = cluster_mod.profiles_to_json(chosen, curve, low_conf, result, table, profs, seed_val)
    if cfg.get("out_profiles"):
        cluster_mod.save_profiles_json(doc, cfg["out_profiles"])
    if cfg.get("out_profiles_csv"):
        with open(cfg["out_profiles_csv"], "w", encoding="utf-8") as fh:
            fh.write(cluster_mod.profiles_to_csv(doc))
    click.echo(f"chosen_k: {chosen}  low_confidence: {low_conf}")
    click.echo(json.dumps({"inertia_curve": doc["inertia_curve"]}, sort_keys=True))


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True), required=True)
@click.option("--kb", "kb_path", type=click.Path(exists=True), required=True)
@click.option("--clusters", "clusters_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
@pipeline_command
def serve(model_path, kb_path, clusters_path, host, port):
    """Start the read-only HTTP service."""
    import uvicorn

    from .service import load_app

    app = load_app(model_path, kb_path, clusters_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
