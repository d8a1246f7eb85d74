"""Serve the two-variable reference model for the frontend end-to-end test.

Self-contained: builds the model from its probability tables, builds a
one-row knowledge base, and serves on the port given as argv[1].
"""

import sys

import uvicorn

from delta_recourse.data import Schema, VariableSpec
from delta_recourse.delta import build_kb
from delta_recourse.nbmodel import WeightedNaiveBayes
from delta_recourse.preprocess import GroupSpec, Preprocessor
from delta_recourse.service import create_app


def build_model():
    schema = Schema(
        variables=(
            VariableSpec("A", "categorical", actionable=True),
            VariableSpec("B", "categorical", actionable=True),
        ),
        target="class",
        positive_label="C2",
    )
    pre = Preprocessor(schema, [
        GroupSpec("A", (frozenset({"a1"}), frozenset({"a2"}))),
        GroupSpec("B", (frozenset({"b1"}), frozenset({"b2"}))),
    ])
    cond = [
        [[0.8, 0.2], [0.2, 0.8]],  # A: columns (C1, C2)
        [[0.6, 0.4], [0.4, 0.6]],
    ]
    return WeightedNaiveBayes.from_probabilities((0.5, 0.5), cond, pre, negative_label="C1")


def main():
    port = int(sys.argv[1]) if len(sys.argv) > 1 else 8321
    model = build_model()
    kb = build_kb(model, [(0, 0)], ["id0"])
    clusters = {
        "k": 1,
        "seed": 0,
        "low_confidence": True,
        "columns": ["A:0", "A:1", "B:0", "B:1"],
        "short_labels": ["1I1", "1I2", "2I1", "2I2"],
        "profiles": [{
            "cluster": 0, "size_fraction": 1.0, "positive_fraction": 0.0,
            "mean_delta": [float(v) for v in kb.values[0]],
        }],
    }
    uvicorn.run(create_app(model, kb, clusters), host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
