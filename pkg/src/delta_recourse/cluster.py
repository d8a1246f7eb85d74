"""Profile creation: k-means (L2) over knowledge-base rows, elbow-based
selection of k, and per-cluster mean-Δ profiles."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .delta import DeltaTable
from .errors import LengthMismatch, TooFewRows

DEFAULT_RESTARTS = 8


def worker_count() -> int:
    """Parallelism cap, honoring DELTA_RECOURSE_THREADS."""
    env = os.environ.get("DELTA_RECOURSE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


@dataclass
class KMeansResult:
    k: int
    centroids: np.ndarray = field(repr=False)
    assignments: np.ndarray = field(repr=False)
    inertia: float = 0.0
    seed: int = 0
    iterations: int = 0
    columns: list | None = None  # KB column indices that were clustered


@dataclass
class ClusterProfile:
    cluster: int
    size_fraction: float
    positive_fraction: float
    mean_delta: np.ndarray = field(repr=False)


def _kmeans_once(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int):
    n = X.shape[0]
    # k-means++ seeding
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centroids[j] = X[rng.integers(n)]
        else:
            centroids[j] = X[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centroids[j]) ** 2).sum(axis=1))

    assign = np.full(n, -1)
    for it in range(1, max_iter + 1):
        dists = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = dists.argmin(axis=1)
        for j in range(k):
            members = X[new_assign == j]
            if len(members) == 0:
                # re-seed an empty cluster to the farthest point
                far = int(dists.min(axis=1).argmax())
                centroids[j] = X[far]
                new_assign[far] = j
            else:
                centroids[j] = members.mean(axis=0)
        if (new_assign == assign).all():
            assign = new_assign
            break
        assign = new_assign
    inertia = float(((X - centroids[assign]) ** 2).sum())
    return centroids, assign, inertia, it


def fit_kmeans(kb: DeltaTable, k: int, seed: int, max_iter: int = 100,
               columns=None, restarts: int = 1) -> KMeansResult:
    """Best of `restarts` seeded k-means++ / Lloyd runs on KB rows.

    `columns` optionally restricts clustering to a subset of KB columns
    (e.g. actionable variables only)."""
    X = kb.values if columns is None else kb.values[:, list(columns)]
    if k < 1 or X.shape[0] < k:
        raise TooFewRows(f"need at least k={k} rows, have {X.shape[0]}")
    best = None
    for r in range(restarts):
        rng = np.random.Generator(np.random.PCG64([seed, k, r]))
        cand = _kmeans_once(X, k, rng, max_iter)
        if best is None or cand[2] < best[2]:
            best = cand
    centroids, assign, inertia, iters = best
    return KMeansResult(k=k, centroids=centroids, assignments=assign, inertia=inertia,
                        seed=seed, iterations=iters,
                        columns=None if columns is None else list(columns))


def elbow_select(kb: DeltaTable, k_min: int, k_max: int, seed: int,
                 columns=None, restarts: int = DEFAULT_RESTARTS, max_iter: int = 100):
    """Sweep k in [k_min, k_max], pick the k maximizing the second
    difference of the inertia curve.

    Returns (chosen_k, inertia_curve, low_confidence). low_confidence is
    set when the range has no interior point or the best second
    difference is under 5% of inertia(k_min)."""
    n = len(kb)
    if not (1 <= k_min < k_max <= n):
        raise TooFewRows(f"invalid k range [{k_min}, {k_max}] for {n} rows")
    ks = list(range(k_min, k_max + 1))
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        fits = list(pool.map(
            lambda k: fit_kmeans(kb, k, seed, max_iter=max_iter, columns=columns, restarts=restarts),
            ks,
        ))
    curve = {k: f.inertia for k, f in zip(ks, fits)}
    interior = ks[1:-1]
    if not interior:
        chosen = min(ks, key=lambda k: curve[k])
        return chosen, curve, True
    second_diff = {k: curve[k - 1] - 2 * curve[k] + curve[k + 1] for k in interior}
    chosen = max(interior, key=lambda k: (second_diff[k], -k))
    low_confidence = max(second_diff.values()) < 0.05 * curve[k_min]
    return chosen, curve, low_confidence


def profiles(result: KMeansResult, kb: DeltaTable, predictions) -> list:
    """Per-cluster size fraction, predicted-positive fraction and mean Δ
    per clustered column."""
    predictions = np.asarray(predictions, dtype=bool)
    if len(predictions) != len(kb):
        raise LengthMismatch("predictions must align with KB rows")
    X = kb.values if result.columns is None else kb.values[:, result.columns]
    out = []
    n = len(kb)
    for j in range(result.k):
        mask = result.assignments == j
        size = int(mask.sum())
        out.append(ClusterProfile(
            cluster=j,
            size_fraction=size / n,
            positive_fraction=float(predictions[mask].mean()) if size else 0.0,
            mean_delta=X[mask].mean(axis=0) if size else np.zeros(X.shape[1]),
        ))
    return out


def profile_columns(kb: DeltaTable, schema, weights=None) -> list:
    """Default clustering columns: actionable variables only."""
    actionable = {v.name for v in schema.variables if v.actionable}
    return [i for i, (var, _) in enumerate(kb.columns) if var in actionable]


def paper_style_labels(kb: DeltaTable, columns=None) -> list:
    """Short labels like '3I2' = third clustered variable, second cell."""
    cols = kb.columns if columns is None else [kb.columns[i] for i in columns]
    var_order = []
    for var, _ in cols:
        if var not in var_order:
            var_order.append(var)
    return [f"{var_order.index(var) + 1}I{cell + 1}" for var, cell in cols]


def profiles_to_json(chosen_k, curve, low_confidence, result: KMeansResult,
                     kb: DeltaTable, profs, seed: int) -> dict:
    columns = kb.columns if result.columns is None else [kb.columns[i] for i in result.columns]
    return {
        "k": chosen_k,
        "seed": seed,
        "low_confidence": bool(low_confidence),
        "inertia_curve": {str(k): v for k, v in curve.items()},
        "columns": [f"{var}:{cell}" for var, cell in columns],
        "short_labels": paper_style_labels(kb, result.columns),
        "profiles": [
            {
                "cluster": p.cluster,
                "size_fraction": p.size_fraction,
                "positive_fraction": p.positive_fraction,
                "mean_delta": [float(v) for v in p.mean_delta],
            }
            for p in profs
        ],
    }


def save_profiles_json(doc: dict, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def profiles_to_csv(doc: dict) -> str:
    header = ["cluster", "size_fraction", "positive_fraction"] + doc["columns"]
    lines = [",".join(header)]
    for p in doc["profiles"]:
        lines.append(",".join(
            [str(p["cluster"]), repr(p["size_fraction"]), repr(p["positive_fraction"])]
            + [repr(v) for v in p["mean_delta"]]
        ))
    return "\n".join(lines) + "\n"
