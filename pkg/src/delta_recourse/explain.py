"""Explanation search over the Δ knowledge base: sparse/constrained
counterfactuals, negative semi-factuals, frontier distance and trajectory
rendering.

All searches change each variable at most once and pick moves by Δ
magnitude; additivity of Δ makes largest-first greedy optimal for
sparsity (the acceptance suite re-verifies this against brute force).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .data import NUMERIC
from .delta import apply_changes, delta_univariate
from .errors import InfeasibleConstraints
from .nbmodel import WeightedNaiveBayes

COUNTERFACTUAL_FOUND = "counterfactual_found"
SEMI_FACTUAL_ONLY = "semi_factual_only"
NO_CHANGE_POSSIBLE = "no_change_possible"


@dataclass(frozen=True)
class ConstraintSet:
    """Business constraints on the search, keyed by variable name."""

    frozen_variables: frozenset = frozenset()
    adjacency_only: frozenset = frozenset()   # numeric variables restricted to neighbor cells
    forced_changes: tuple = ()                # ((variable, cell), ...) applied first, in order
    forbidden_cells: frozenset = frozenset()  # {(variable, cell), ...}
    max_changes: int | None = None

    def __post_init__(self):
        for var, cell in self.forced_changes:
            if var in self.frozen_variables:
                raise InfeasibleConstraints(f"forced change on frozen variable {var!r}")
            if (var, cell) in self.forbidden_cells:
                raise InfeasibleConstraints(f"forced change to forbidden cell {var!r}:{cell}")

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSet":
        return cls(
            frozen_variables=frozenset(d.get("frozen_variables", [])),
            adjacency_only=frozenset(d.get("adjacency_only", [])),
            forced_changes=tuple((c["variable"], int(c["cell"])) for c in d.get("forced_changes", [])),
            forbidden_cells=frozenset((c["variable"], int(c["cell"])) for c in d.get("forbidden_cells", [])),
            max_changes=d.get("max_changes"),
        )


@dataclass(frozen=True)
class TrajectoryStep:
    variable: str
    from_cell: int
    to_cell: int
    delta: float
    prob_after: float


@dataclass
class CfResult:
    status: str
    steps: list
    final_instance: tuple
    initial_prob: float
    final_prob: float
    plausibility_final: float

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "steps": [
                {
                    "variable": s.variable,
                    "from_cell": s.from_cell,
                    "to_cell": s.to_cell,
                    "delta": s.delta,
                    "prob_after": s.prob_after,
                }
                for s in self.steps
            ],
            "final_instance": list(self.final_instance),
            "initial_prob": self.initial_prob,
            "final_prob": self.final_prob,
            "plausibility_final": self.plausibility_final,
        }


def _admissible_cells(model: WeightedNaiveBayes, x, i: int, constraints: ConstraintSet):
    schema = model.preprocessor_.schema
    var = schema.variables[i]
    if var.name in constraints.frozen_variables:
        return []
    cells = model.cond_logp_[i].shape[0]
    factual = int(x[i])
    out = []
    for m in range(cells):
        if m == factual:
            continue
        if (var.name, m) in constraints.forbidden_cells:
            continue
        if var.name in constraints.adjacency_only and var.kind == NUMERIC and abs(m - factual) != 1:
            continue
        out.append(m)
    return out


def _resolve_forced(model, constraints: ConstraintSet):
    schema = model.preprocessor_.schema
    out = []
    for var, cell in constraints.forced_changes:
        i = schema.index_of(var)
        cells = model.cond_logp_[i].shape[0]
        if not (0 <= cell < cells):
            raise InfeasibleConstraints(f"forced cell {cell} out of range for {var!r}")
        out.append((i, cell))
    return out


def greedy_counterfactual(model: WeightedNaiveBayes, x, constraints: ConstraintSet | None = None,
                          threshold: float = 0.5, kb_fingerprint: str | None = None) -> CfResult:
    """Apply the largest admissible Δ per step until the posterior of the
    positive class crosses the threshold, or no positive move remains."""
    from .errors import FingerprintMismatch

    if kb_fingerprint is not None and kb_fingerprint != model.fingerprint():
        raise FingerprintMismatch("knowledge base and model fingerprints differ")
    constraints = constraints or ConstraintSet()
    schema = model.preprocessor_.schema
    x0 = tuple(int(c) for c in x)
    initial_prob = model.predict_proba(x0)

    current = x0
    steps = []
    changed = set()

    def push(i, m):
        nonlocal current
        d = delta_univariate(model, x0, i, m)
        current = apply_changes(current, [(i, m)])
        changed.add(i)
        steps.append(TrajectoryStep(schema.variables[i].name, x0[i], m, d, model.predict_proba(current)))

    for i, m in _resolve_forced(model, constraints):
        if i in changed:
            raise InfeasibleConstraints(f"variable {schema.variables[i].name!r} forced twice")
        push(i, m)

    def result(status):
        return CfResult(status, steps, current, initial_prob,
                        model.predict_proba(current), model.plausibility(current))

    if model.predict_proba(current) > threshold:
        return result(COUNTERFACTUAL_FOUND)

    while constraints.max_changes is None or len(steps) < constraints.max_changes:
        best = None
        for i in range(model.n_variables):
            if i in changed:
                continue
            for m in _admissible_cells(model, x0, i, constraints):
                d = delta_univariate(model, x0, i, m)
                if d <= 0:
                    continue
                if best is None or d > best[0] or (d == best[0] and (i, m) < (best[1], best[2])):
                    best = (d, i, m)
        if best is None:
            break
        push(best[1], best[2])
        if model.predict_proba(current) > threshold:
            return result(COUNTERFACTUAL_FOUND)

    if len(steps) > 0:
        return result(SEMI_FACTUAL_ONLY)
    return result(NO_CHANGE_POSSIBLE)


def negative_semifactual(model: WeightedNaiveBayes, x, constraints: ConstraintSet | None = None,
                         steps: int = 1, kb_fingerprint: str | None = None) -> CfResult:
    """Preventive direction: apply the most-negative admissible Δ per
    variable, up to `steps` changes, moving away from the frontier."""
    from .errors import FingerprintMismatch

    if steps < 1:
        raise ValueError("steps must be >= 1")
    if kb_fingerprint is not None and kb_fingerprint != model.fingerprint():
        raise FingerprintMismatch("knowledge base and model fingerprints differ")
    constraints = constraints or ConstraintSet()
    schema = model.preprocessor_.schema
    x0 = tuple(int(c) for c in x)
    initial_prob = model.predict_proba(x0)

    current = x0
    taken = []
    changed = set()
    for _ in range(steps):
        best = None
        for i in range(model.n_variables):
            if i in changed:
                continue
            for m in _admissible_cells(model, x0, i, constraints):
                d = delta_univariate(model, x0, i, m)
                if d >= 0:
                    continue
                if best is None or d < best[0] or (d == best[0] and (i, m) < (best[1], best[2])):
                    best = (d, i, m)
        if best is None:
            break
        d, i, m = best
        current = apply_changes(current, [(i, m)])
        changed.add(i)
        taken.append(TrajectoryStep(schema.variables[i].name, x0[i], m, d, model.predict_proba(current)))

    status = SEMI_FACTUAL_ONLY if taken else NO_CHANGE_POSSIBLE
    return CfResult(status, taken, current, initial_prob,
                    model.predict_proba(current), model.plausibility(current))


def frontier_distance(kb_row: np.ndarray, columns, base_logit: float, threshold: float = 0.5):
    """Minimal number of single-variable changes whose Δ sum crosses the
    threshold logit, taking each variable's best cell, largest Δ first.
    Returns 0 when already above, None when unreachable."""
    target = math.log(threshold / (1.0 - threshold))
    if base_logit > target:
        return 0
    best_per_var = {}
    for (var, _), d in zip(columns, kb_row):
        if d > best_per_var.get(var, 0.0):
            best_per_var[var] = float(d)
    gains = sorted(best_per_var.values(), reverse=True)
    acc = base_logit
    for k, g in enumerate(gains, start=1):
        acc += g
        if acc > target:
            return k
    return None


@dataclass
class TrajectoryTable:
    """Row-per-step rendering of a trajectory, matching the layout of a
    printed what-if table: initial profile first, changed cells marked."""

    header: list
    rows: list        # list of list of str (cell labels), plus prob column
    changed: list     # parallel mask of booleans (prob column excluded)

    def to_csv(self) -> str:
        buf = io.StringIO()
        import csv as _csv

        writer = _csv.writer(buf)
        writer.writerow(self.header)
        for row, mask in zip(self.rows, self.changed):
            writer.writerow([(f"*{v}" if m else v) for v, m in zip(row[:-1], mask)] + [row[-1]])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [self.header]
        for row, mask in zip(self.rows, self.changed):
            cells.append([(f"*{v}" if m else v) for v, m in zip(row[:-1], mask)] + [row[-1]])
        widths = [max(len(r[c]) for r in cells) for c in range(len(self.header))]
        lines = []
        for r, row in enumerate(cells):
            lines.append(" | ".join(v.ljust(w) for v, w in zip(row, widths)))
            if r == 0:
                lines.append("-+-".join("-" * w for w in widths))
        return "\n".join(lines)


def render_trajectory(result: CfResult, model: WeightedNaiveBayes) -> TrajectoryTable:
    """Initial profile then one row per step; changed cells carry a '*'
    marker and the last column is the positive-class probability."""
    pre = model.preprocessor_
    schema = pre.schema
    header = [v.name for v in schema.variables] + [f"prob {model.classes_[1]!r}"]
    labels = [pre.cell_labels(i) for i in range(len(schema.variables))]

    x0 = list(result.final_instance)
    for s in reversed(result.steps):
        x0[schema.index_of(s.variable)] = s.from_cell

    rows = [[labels[i][c] for i, c in enumerate(x0)] + [repr(result.initial_prob)]]
    changed = [[False] * len(schema.variables)]
    current = list(x0)
    cum_mask = [False] * len(schema.variables)
    for s in result.steps:
        i = schema.index_of(s.variable)
        current[i] = s.to_cell
        cum_mask = list(cum_mask)
        cum_mask[i] = True
        rows.append([labels[j][c] for j, c in enumerate(current)] + [repr(s.prob_after)])
        changed.append(cum_mask)
    return TrajectoryTable(header, rows, changed)
