"""Shared test helpers: random model generation and brute-force oracles.

The oracles evaluate the posterior directly (never through the Δ table)
so they stay independent of the code paths they check.
"""

import itertools
import math

import numpy as np

from delta_recourse.data import Schema, VariableSpec
from delta_recourse.nbmodel import WeightedNaiveBayes
from delta_recourse.preprocess import GroupSpec, Preprocessor


def random_model(rng, max_vars=5, max_cells=5, binary_weights=False):
    """Random two-class weighted NB with categorical cell structure."""
    d = int(rng.integers(1, max_vars + 1))
    cells = [int(rng.integers(2, max_cells + 1)) for _ in range(d)]
    variables = tuple(VariableSpec(f"v{i}", "categorical") for i in range(d))
    schema = Schema(variables, target="y", positive_label="pos")
    specs = [
        GroupSpec(f"v{i}", tuple(frozenset({f"v{i}m{q}"}) for q in range(c)))
        for i, c in enumerate(cells)
    ]
    pre = Preprocessor(schema, specs)
    p_pos = float(rng.uniform(0.05, 0.95))
    cond = [rng.dirichlet(np.ones(c), size=2).T for c in cells]  # (cells, 2)
    if binary_weights:
        weights = rng.integers(0, 2, size=d).astype(float)
    else:
        weights = rng.uniform(0.0, 1.0, size=d)
    return WeightedNaiveBayes.from_probabilities(
        (1.0 - p_pos, p_pos), cond, pre, weights=weights, negative_label="neg"
    )


def random_instance(rng, model):
    return tuple(int(rng.integers(t.shape[0])) for t in model.cond_logp_)


def random_changeset(rng, model, x):
    d = model.n_variables
    n_changes = int(rng.integers(0, d + 1))
    variables = rng.permutation(d)[:n_changes]
    return [(int(i), int(rng.integers(model.cond_logp_[i].shape[0]))) for i in variables]


def posterior_direct(model, x):
    """Direct evaluation of the two-class posterior from probability
    tables, independent of score_logit."""
    joint = np.exp(model.log_priors_).copy()
    for w, cell, table in zip(model.weights_, x, model.cond_logp_):
        joint *= np.exp(table[cell, :]) ** w
    return joint[1] / joint.sum()


def brute_force_min_changes(model, x, threshold=0.5):
    """Smallest number of single-variable changes reaching posterior >
    threshold, by exhaustive enumeration. None if unreachable."""
    options = [range(t.shape[0]) for t in model.cond_logp_]
    best = None
    for assignment in itertools.product(*options):
        k = sum(1 for a, b in zip(assignment, x) if a != b)
        if posterior_direct(model, assignment) > threshold:
            if best is None or k < best:
                best = k
    return best


def logit(p):
    return math.log(p / (1.0 - p))
