"""Counterfactual-simulation knowledge base over a weighted naive Bayes
classifier: Δ tables, sparse/constrained counterfactual search,
semi-factuals, trajectories, plausibility and Δ-profile clustering."""

from .data import Dataset, Schema, VariableSpec, load_csv, split
from .delta import DeltaTable, build_kb, delta_set, delta_univariate, load_kb, save_kb
from .explain import (
    CfResult,
    ConstraintSet,
    TrajectoryStep,
    frontier_distance,
    greedy_counterfactual,
    negative_semifactual,
    render_trajectory,
)
from .cluster import KMeansResult, elbow_select, fit_kmeans, profiles
from .nbmodel import WeightedNaiveBayes, auc_score
from .preprocess import (
    BinSpec,
    GroupSpec,
    Preprocessor,
    TablePreprocessor,
    discretize_numeric,
    encode,
    group_categorical,
)

__all__ = [
    "BinSpec", "CfResult", "ConstraintSet", "Dataset", "DeltaTable", "GroupSpec",
    "KMeansResult", "Preprocessor", "Schema", "TablePreprocessor", "TrajectoryStep",
    "VariableSpec", "WeightedNaiveBayes", "auc_score", "build_kb", "delta_set",
    "delta_univariate", "discretize_numeric", "elbow_select", "encode",
    "fit_kmeans", "frontier_distance", "greedy_counterfactual", "group_categorical",
    "load_csv", "load_kb", "negative_semifactual", "profiles", "render_trajectory",
    "save_kb", "split",
]

__version__ = "0.1.0"
