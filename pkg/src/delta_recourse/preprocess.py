"""Supervised preprocessing: MDLP discretization of numeric variables and
positive-rate grouping of categorical modalities.

The cell structure produced here is what the Δ table enumerates: each
numeric variable becomes a short list of right-closed intervals
(]c_{q-1}, c_q]) and each categorical variable a short list of modality
groups.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .data import CATEGORICAL, NUMERIC, Dataset, Schema
from .errors import SchemaMismatch

MISSING_MODALITY = ""


@dataclass(frozen=True)
class BinSpec:
    """Discretization of one numeric variable.

    Cells 0..len(cut_points) are the intervals; when has_missing_cell is
    set, one extra trailing cell holds missing values. observed_min/max
    are metadata for display only, never used for containment.
    """

    variable: str
    cut_points: tuple
    has_missing_cell: bool = False
    observed_min: float | None = None
    observed_max: float | None = None

    def __post_init__(self):
        if any(a >= b for a, b in zip(self.cut_points, self.cut_points[1:])):
            raise ValueError("cut points must be strictly ascending")

    @property
    def n_cells(self) -> int:
        return len(self.cut_points) + 1 + (1 if self.has_missing_cell else 0)

    def cell_of(self, value) -> int:
        if value is None:
            if not self.has_missing_cell:
                raise ValueError(f"variable {self.variable!r} has no missing cell")
            return self.n_cells - 1
        # right-closed: cell q covers (c_{q-1}, c_q]
        return int(np.searchsorted(self.cut_points, value, side="left"))

    def cell_labels(self) -> list:
        cuts = self.cut_points
        if not cuts:
            labels = ["all values"]
        else:
            lo = repr(self.observed_min) if self.observed_min is not None else "-inf"
            labels = [f"[{lo}-{cuts[0]!r}]"]
            labels += [f"]{a!r}-{b!r}]" for a, b in zip(cuts, cuts[1:])]
            hi = repr(self.observed_max) if self.observed_max is not None else "+inf"
            labels.append(f"]{cuts[-1]!r}-{hi}]")
        if self.has_missing_cell:
            labels.append("missing")
        return labels


@dataclass(frozen=True)
class GroupSpec:
    """Grouping of one categorical variable's modalities."""

    variable: str
    groups: tuple  # tuple of frozensets of modality strings
    fallback_group: int = 0

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            if not g:
                raise ValueError("empty modality group")
            if seen & set(g):
                raise ValueError("modality groups must be disjoint")
            seen |= set(g)
        if not (0 <= self.fallback_group < len(self.groups)):
            raise ValueError("fallback group out of range")

    @property
    def n_cells(self) -> int:
        return len(self.groups)

    def cell_of(self, value) -> int:
        if value is None:
            value = MISSING_MODALITY
        for i, g in enumerate(self.groups):
            if value in g:
                return i
        return self.fallback_group

    def cell_labels(self) -> list:
        return ["{" + ",".join(sorted(m if m else "(missing)" for m in g)) + "}" for g in self.groups]


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def discretize_numeric(values, labels, max_bins: int = 32) -> BinSpec:
    """Recursive entropy-minimizing cuts with the MDL stopping rule.

    Missing values (None) are excluded from the statistics; a dedicated
    missing cell is appended when any are present. Splits are applied
    best-gain-first so the max_bins cap keeps the most informative cuts.
    """
    if max_bins < 1:
        raise ValueError("max_bins must be >= 1")
    name = getattr(values, "name", "")
    pairs = [(v, y) for v, y in zip(values, labels) if v is not None]
    has_missing = len(pairs) < len(values)
    if not pairs:
        return BinSpec("", (), has_missing_cell=has_missing)
    pairs.sort(key=lambda p: p[0])
    vals = np.array([p[0] for p in pairs], dtype=float)
    classes = sorted(set(p[1] for p in pairs))
    cls_index = {c: i for i, c in enumerate(classes)}
    ys = np.array([cls_index[p[1]] for p in pairs], dtype=np.int64)
    k_classes = len(classes)

    # prefix class counts: pref[i] = counts in pairs[:i]
    onehot = np.zeros((len(vals) + 1, k_classes), dtype=np.int64)
    onehot[1:, :] = np.eye(k_classes, dtype=np.int64)[ys]
    pref = np.cumsum(onehot, axis=0)

    def seg_counts(lo, hi):
        return pref[hi] - pref[lo]

    # candidate cut positions: indices where the value changes
    change = np.nonzero(vals[1:] > vals[:-1])[0] + 1  # split before index i

    def best_split(lo, hi):
        """Best accepted (gain, index) for segment [lo, hi) or None."""
        cand = change[(change > lo) & (change < hi)]
        if cand.size == 0:
            return None
        total = seg_counts(lo, hi)
        n = hi - lo
        e_total = _entropy(total)
        left = pref[cand] - pref[lo]
        right = total - left
        nl = left.sum(axis=1)
        nr = n - nl
        with np.errstate(divide="ignore", invalid="ignore"):
            pl = left / nl[:, None]
            pr = right / nr[:, None]
            el = -np.nansum(np.where(pl > 0, pl * np.log2(pl), 0.0), axis=1)
            er = -np.nansum(np.where(pr > 0, pr * np.log2(pr), 0.0), axis=1)
        gain = e_total - (nl * el + nr * er) / n
        best = int(np.argmax(gain))  # leftmost on ties
        g = float(gain[best])
        i = int(cand[best])
        # MDL acceptance (Fayyad & Irani)
        k = int((total > 0).sum())
        k1 = int((left[best] > 0).sum())
        k2 = int((right[best] > 0).sum())
        delta = math.log2(3**k - 2) - (k * e_total - k1 * el[best] - k2 * er[best])
        if g <= (math.log2(n - 1) + delta) / n:
            return None
        return g, i

    cuts = []
    heap = []
    first = best_split(0, len(vals))
    if first is not None:
        g, i = first
        heapq.heappush(heap, (-g, 0, len(vals), i))
    bins = 1
    while heap and bins < max_bins:
        _, lo, hi, i = heapq.heappop(heap)
        cuts.append(float(vals[i - 1] + vals[i]) / 2.0)
        bins += 1
        for a, b in ((lo, i), (i, hi)):
            nxt = best_split(a, b)
            if nxt is not None:
                heapq.heappush(heap, (-nxt[0], a, b, nxt[1]))

    return BinSpec(
        name,
        tuple(sorted(cuts)),
        has_missing_cell=has_missing,
        observed_min=float(vals[0]),
        observed_max=float(vals[-1]),
    )


def group_categorical(values, labels, positive_label, min_support: int = 16, tolerance: float = 0.02) -> GroupSpec:
    """Merge modalities by closeness of their positive-class rate.

    Low-support modalities always join the supported group with the
    nearest rate; supported groups then merge pairwise while their rates
    differ by at most `tolerance`. Deterministic: modalities are visited
    in lexicographic order and ties break on the smallest member name.
    """
    if min_support < 1:
        raise ValueError("min_support must be >= 1")
    name = getattr(values, "name", "")
    stats = {}
    for v, y in zip(values, labels):
        v = MISSING_MODALITY if v is None else v
        cnt, pos = stats.get(v, (0, 0))
        stats[v] = (cnt + 1, pos + (1 if y == positive_label else 0))

    # group state: key = smallest member, value = (members, count, pos)
    groups = {}
    supported = sorted(m for m, (c, _) in stats.items() if c >= min_support)
    weak = sorted(m for m in stats if m not in supported)
    if not supported:
        members = set(stats)
        total = sum(c for c, _ in stats.values())
        pos = sum(p for _, p in stats.values())
        key = min(members)
        groups[key] = (members, total, pos)
    else:
        for m in supported:
            c, p = stats[m]
            groups[m] = ({m}, c, p)
        for m in weak:
            c, p = stats[m]
            rate = p / c
            key = min(groups, key=lambda k: (abs(groups[k][2] / groups[k][1] - rate), k))
            members, gc, gp = groups[key]
            groups[key] = (members | {m}, gc + c, gp + p)

    def rate(k):
        _, c, p = groups[k]
        return p / c

    while len(groups) > 1:
        keys = sorted(groups)
        best = min(
            ((abs(rate(a) - rate(b)), a, b) for i, a in enumerate(keys) for b in keys[i + 1:]),
            key=lambda t: (t[0], t[1], t[2]),
        )
        diff, a, b = best
        if diff > tolerance:
            break
        ma, ca, pa = groups.pop(a)
        mb, cb, pb = groups.pop(b)
        members = ma | mb
        groups[min(members)] = (members, ca + cb, pa + pb)

    ordered = [frozenset(groups[k][0]) for k in sorted(groups)]
    sizes = [groups[k][1] for k in sorted(groups)]
    fallback = int(np.argmax(sizes))
    return GroupSpec(name, tuple(ordered), fallback_group=fallback)


@dataclass
class Preprocessor:
    """Per-variable cell definitions aligned with the schema order."""

    schema: Schema
    specs: list  # BinSpec | GroupSpec per variable

    def __post_init__(self):
        if len(self.specs) != len(self.schema.variables):
            raise SchemaMismatch("one spec per schema variable required")

    @property
    def cell_counts(self) -> list:
        return [s.n_cells for s in self.specs]

    @property
    def total_cells(self) -> int:
        return sum(self.cell_counts)

    def encode_row(self, row) -> tuple:
        return tuple(spec.cell_of(v) for spec, v in zip(self.specs, row))

    def cell_labels(self, i: int) -> list:
        return self.specs[i].cell_labels()

    def to_dict(self) -> dict:
        out = []
        for var, spec in zip(self.schema.variables, self.specs):
            if isinstance(spec, BinSpec):
                out.append({
                    "name": var.name,
                    "kind": NUMERIC,
                    "cut_points": list(spec.cut_points),
                    "has_missing_cell": spec.has_missing_cell,
                    "observed_min": spec.observed_min,
                    "observed_max": spec.observed_max,
                })
            else:
                out.append({
                    "name": var.name,
                    "kind": CATEGORICAL,
                    "groups": [sorted(g) for g in spec.groups],
                    "fallback_group": spec.fallback_group,
                })
        return {"schema": self.schema.to_dict(), "variables": out}

    @classmethod
    def from_dict(cls, d: dict) -> "Preprocessor":
        schema = Schema.from_dict(d["schema"])
        specs = []
        for var, entry in zip(schema.variables, d["variables"]):
            if entry["name"] != var.name:
                raise SchemaMismatch(f"preprocessor entry {entry['name']!r} does not match schema")
            if entry["kind"] == NUMERIC:
                specs.append(BinSpec(
                    var.name,
                    tuple(entry["cut_points"]),
                    has_missing_cell=entry["has_missing_cell"],
                    observed_min=entry.get("observed_min"),
                    observed_max=entry.get("observed_max"),
                ))
            else:
                specs.append(GroupSpec(
                    var.name,
                    tuple(frozenset(g) for g in entry["groups"]),
                    fallback_group=entry["fallback_group"],
                ))
        return cls(schema, specs)


class TablePreprocessor(BaseEstimator, TransformerMixin):
    """sklearn-style wrapper: fit cell definitions on a Dataset, transform
    rows to integer cell indices."""

    def __init__(self, max_bins: int = 32, min_support: int = 16, merge_tolerance: float = 0.02):
        self.max_bins = max_bins
        self.min_support = min_support
        self.merge_tolerance = merge_tolerance

    def fit(self, dataset: Dataset, y=None):
        specs = []
        for i, var in enumerate(dataset.schema.variables):
            col = [r[i] for r in dataset.rows]
            if var.kind == NUMERIC:
                spec = discretize_numeric(col, dataset.labels, max_bins=self.max_bins)
            else:
                spec = group_categorical(
                    col, dataset.labels, dataset.positive_label,
                    min_support=self.min_support, tolerance=self.merge_tolerance,
                )
            # dataclass is frozen; rebuild with the variable name attached
            if isinstance(spec, BinSpec):
                spec = BinSpec(var.name, spec.cut_points, spec.has_missing_cell,
                               spec.observed_min, spec.observed_max)
            else:
                spec = GroupSpec(var.name, spec.groups, spec.fallback_group)
            specs.append(spec)
        self.preprocessor_ = Preprocessor(dataset.schema, specs)
        return self

    def transform(self, dataset: Dataset) -> np.ndarray:
        return encode(dataset, self.preprocessor_)


def encode(dataset: Dataset, preprocessor: Preprocessor) -> np.ndarray:
    """Map raw rows to an (N, d) array of cell indices."""
    if dataset.schema != preprocessor.schema:
        raise SchemaMismatch("dataset and preprocessor schemas differ")
    if not dataset.rows:
        return np.zeros((0, len(preprocessor.specs)), dtype=np.int64)
    return np.array([preprocessor.encode_row(r) for r in dataset.rows], dtype=np.int64)
