import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from delta_recourse.data import Schema, VariableSpec
from delta_recourse.nbmodel import WeightedNaiveBayes
from delta_recourse.preprocess import GroupSpec, Preprocessor

import telco_synth


def _m0_preprocessor(positive_label):
    schema = Schema(
        variables=(
            VariableSpec("A", "categorical", actionable=True),
            VariableSpec("B", "categorical", actionable=True),
        ),
        target="class",
        positive_label=positive_label,
    )
    specs = [
        GroupSpec("A", (frozenset({"a1"}), frozenset({"a2"}))),
        GroupSpec("B", (frozenset({"b1"}), frozenset({"b2"}))),
    ]
    return Preprocessor(schema, specs)


def make_m0(positive="C1"):
    """Reference two-variable model: priors (0.5, 0.5);
    P(a1|C1)=0.8, P(a1|C2)=0.2; P(b1|C1)=0.6, P(b1|C2)=0.4; weights 1."""
    pre = _m0_preprocessor(positive)
    if positive == "C1":
        cond = [
            [[0.2, 0.8], [0.8, 0.2]],  # A rows (a1, a2), columns (neg=C2, pos=C1)
            [[0.4, 0.6], [0.6, 0.4]],
        ]
        negative = "C2"
    else:
        cond = [
            [[0.8, 0.2], [0.2, 0.8]],  # columns (neg=C1, pos=C2)
            [[0.6, 0.4], [0.4, 0.6]],
        ]
        negative = "C1"
    return WeightedNaiveBayes.from_probabilities(
        (0.5, 0.5), cond, pre, negative_label=negative
    )


@pytest.fixture
def m0_pos_c1():
    return make_m0("C1")


@pytest.fixture
def m0_pos_c2():
    return make_m0("C2")


@pytest.fixture(scope="session")
def telco_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("telco")
    csv_path = root / "telco.csv"
    schema_path = root / "schema.json"
    telco_synth.write_files(csv_path, schema_path)
    return csv_path, schema_path
