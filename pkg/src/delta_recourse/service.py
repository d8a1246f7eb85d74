"""Read-only HTTP API over a loaded model, knowledge base and optional
cluster profiles. All numeric fields are the in-process library values;
state is immutable after startup."""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import explain
from .delta import DeltaTable, apply_changes, delta_univariate, validate_changes
from .errors import (
    CellOutOfRange,
    DeltaRecourseError,
    DuplicateVariable,
    FingerprintMismatch,
    InfeasibleConstraints,
    UnknownRowId,
)
from .nbmodel import WeightedNaiveBayes


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def _parse_cells(model: WeightedNaiveBayes, cells) -> tuple:
    if not isinstance(cells, list) or len(cells) != model.n_variables:
        raise CellOutOfRange("<body>", -1, model.n_variables)
    x = tuple(int(c) for c in cells)
    model._check_instance(x)
    return x


def _parse_changes(model: WeightedNaiveBayes, changes) -> list:
    schema = model.preprocessor_.schema
    out = []
    for ch in changes:
        var = ch["variable"]
        i = var if isinstance(var, int) else schema.index_of(var)
        out.append((int(i), int(ch["cell"])))
    validate_changes(out)
    return out


def create_app(model: WeightedNaiveBayes, kb: DeltaTable, clusters: dict | None = None,
               cors_origins=("*",)) -> FastAPI:
    if kb.fingerprint != model.fingerprint():
        raise FingerprintMismatch("knowledge base was not built from the loaded model")

    app = FastAPI(title="delta-recourse service")
    app.add_middleware(
        CORSMiddleware, allow_origins=list(cors_origins),
        allow_methods=["GET", "POST"], allow_headers=["*"],
    )
    app.state.model = model
    app.state.kb = kb
    app.state.clusters = clusters

    @app.exception_handler(DeltaRecourseError)
    async def handle_domain_error(request: Request, exc: DeltaRecourseError):
        if isinstance(exc, UnknownRowId):
            return _error(404, "UnknownRowId", str(exc))
        if isinstance(exc, InfeasibleConstraints):
            return _error(422, "InfeasibleConstraints", str(exc))
        if isinstance(exc, (CellOutOfRange, DuplicateVariable)):
            return _error(400, type(exc).__name__, str(exc))
        return _error(400, type(exc).__name__, str(exc))

    pre = model.preprocessor_
    schema = pre.schema

    @app.get("/schema")
    def get_schema():
        return {
            "target": schema.target,
            "positive_label": schema.positive_label,
            "classes": list(model.classes_),
            "variables": [
                {
                    "name": v.name,
                    "kind": v.kind,
                    "actionable": v.actionable,
                    "weight": float(model.weights_[i]),
                    "cells": pre.cell_labels(i),
                }
                for i, v in enumerate(schema.variables)
            ],
        }

    @app.post("/predict")
    async def predict(request: Request):
        body = await request.json()
        x = _parse_cells(model, body.get("cells"))
        return {
            "prob": model.predict_proba(x),
            "logit": model.score_logit(x),
            "plausibility": model.plausibility(x),
        }

    @app.post("/whatif")
    async def whatif(request: Request):
        body = await request.json()
        x = _parse_cells(model, body.get("cells"))
        changes = _parse_changes(model, body.get("changes", []))
        per_change = [
            {"variable": schema.variables[i].name, "cell": m, "delta": delta_univariate(model, x, i, m)}
            for i, m in changes
        ]
        x_after = apply_changes(x, changes)
        return {
            "delta": sum(c["delta"] for c in per_change),
            "prob_before": model.predict_proba(x),
            "prob_after": model.predict_proba(x_after),
            "plausibility_after": model.plausibility(x_after),
            "per_change": per_change,
        }

    @app.post("/counterfactual")
    async def counterfactual(request: Request):
        body = await request.json()
        if "row_id" in body and body["row_id"] is not None:
            idx = kb.row_index(str(body["row_id"]))
            x = tuple(int(c) for c in kb.factual_cells[idx])
        else:
            x = _parse_cells(model, body.get("cells"))
        constraints = explain.ConstraintSet.from_dict(body.get("constraints") or {})
        threshold = float(body.get("threshold", 0.5))
        mode = body.get("mode", "counterfactual")
        if mode == "preventive":
            result = explain.negative_semifactual(model, x, constraints, steps=int(body.get("steps", 1)))
        else:
            result = explain.greedy_counterfactual(model, x, constraints, threshold=threshold)
        return result.to_dict()

    @app.get("/kb/row/{row_id}")
    def kb_row(row_id: str):
        idx = kb.row_index(row_id)
        return {
            "id": row_id,
            "columns": kb.column_labels(),
            "deltas": [float(v) for v in kb.values[idx]],
            "factual_cells": [int(c) for c in kb.factual_cells[idx]],
            "base_logit": float(kb.base_logit[idx]),
        }

    @app.get("/kb/frontier")
    def kb_frontier(max_steps: int = 1, threshold: float = 0.5):
        ids = [
            rid
            for rid, row, base in zip(kb.row_ids, kb.values, kb.base_logit)
            if (d := explain.frontier_distance(row, kb.columns, float(base), threshold)) is not None
            and d <= max_steps
        ]
        return {"ids": ids}

    @app.get("/clusters")
    def get_clusters():
        if app.state.clusters is None:
            return _error(404, "NoClusters",
                          "no cluster profiles loaded; run the cluster command and pass --clusters")
        return app.state.clusters

    return app


def load_app(model_path, kb_path, clusters_path=None) -> FastAPI:
    from .delta import load_kb

    model = WeightedNaiveBayes.load(model_path)
    kb = load_kb(kb_path, model=model, strict=True)
    clusters = None
    if clusters_path:
        with open(clusters_path, encoding="utf-8") as fh:
            clusters = json.load(fh)
    return create_app(model, kb, clusters)
