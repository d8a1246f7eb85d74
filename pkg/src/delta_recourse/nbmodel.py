"""Weighted (selective) naive Bayes over discretized cells.

Two-class only. The positive class is the class of interest: score_logit
returns L_pos - L_neg, predict_proba the sigmoid of it, plausibility the
weighted mixture density P(X) = sum_k P(C_k) prod_i P(X_i|C_k)^W_i.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np
from scipy.stats import rankdata
from sklearn.base import BaseEstimator

from .errors import CellOutOfRange, EmptyDataset
from .preprocess import Preprocessor

MODEL_FORMAT = "weighted-nb/1"


def auc_score(scores, labels) -> float:
    """Rank-based (Mann-Whitney) AUC with tie averaging."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        return 0.5
    ranks = rankdata(scores)
    return float((ranks[labels == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


class WeightedNaiveBayes(BaseEstimator):
    """Laplace-smoothed naive Bayes with per-variable weights in [0, 1].

    Fitted attributes:
      classes_      (negative_label, positive_label)
      log_priors_   shape (2,), classes_ order
      cond_logp_    list of (cells_i, 2) arrays, log P(cell | class)
      weights_      shape (d,)
    """

    def __init__(self, smoothing: float = 1.0):
        self.smoothing = smoothing

    # ------------------------------------------------------------------ fit

    def fit(self, encoded: np.ndarray, labels, preprocessor: Preprocessor):
        if self.smoothing <= 0:
            raise ValueError("smoothing must be > 0")
        encoded = np.asarray(encoded, dtype=np.int64)
        if encoded.shape[0] == 0:
            raise EmptyDataset("fit requires at least one row")
        positive = preprocessor.schema.positive_label
        distinct = sorted(set(labels))
        if len(distinct) != 2 or positive not in distinct:
            raise EmptyDataset(
                f"two-class fit requires exactly two labels including {positive!r}, got {distinct}"
            )
        negative = next(v for v in distinct if v != positive)
        y = np.fromiter((1 if v == positive else 0 for v in labels), dtype=np.int64, count=len(labels))

        self.preprocessor_ = preprocessor
        self.classes_ = (negative, positive)
        s = self.smoothing
        n_per_class = np.array([(y == 0).sum(), (y == 1).sum()], dtype=float)
        self.log_priors_ = np.log((n_per_class + s) / (len(y) + 2 * s))

        self.cond_logp_ = []
        for i, cells in enumerate(preprocessor.cell_counts):
            counts = np.zeros((cells, 2))
            for k in (0, 1):
                col = encoded[y == k, i]
                counts[:, k] = np.bincount(col, minlength=cells)
            self.cond_logp_.append(np.log((counts + s) / (n_per_class[None, :] + s * cells)))
        self.weights_ = np.ones(len(preprocessor.cell_counts))
        return self

    def select_weights(self, encoded: np.ndarray, labels) -> "WeightedNaiveBayes":
        """Greedy forward selection of binary weights on validation AUC."""
        encoded = np.asarray(encoded, dtype=np.int64)
        if encoded.shape[0] == 0:
            raise EmptyDataset("weight selection needs a non-empty validation set")
        positive = self.classes_[1]
        y = np.fromiter((1 if v == positive else 0 for v in labels), dtype=np.int64, count=len(labels))
        llr = self._llr_matrix(encoded)  # (N, d)
        d = llr.shape[1]
        w = np.zeros(d)
        best_auc = auc_score(llr @ w, y)  # constant scores -> 0.5
        remaining = list(range(d))
        while remaining:
            trials = [(auc_score(llr @ w + llr[:, i], y), i) for i in remaining]
            gain, i = max(trials, key=lambda t: (t[0], -t[1]))
            if gain <= best_auc + 1e-4:
                break
            w[i] = 1.0
            best_auc = gain
            remaining.remove(i)
        self.weights_ = w
        return self

    def set_weights(self, weights) -> "WeightedNaiveBayes":
        weights = np.asarray(weights, dtype=float)
        if weights.shape != self.weights_.shape:
            raise ValueError("weight vector length must match variable count")
        if ((weights < 0) | (weights > 1)).any():
            raise ValueError("weights must lie in [0, 1]")
        self.weights_ = weights
        return self

    # ------------------------------------------------------------ evaluation

    @property
    def n_variables(self) -> int:
        return len(self.cond_logp_)

    def _check_instance(self, x):
        for i, (cell, table) in enumerate(zip(x, self.cond_logp_)):
            if not (0 <= cell < table.shape[0]):
                raise CellOutOfRange(self.preprocessor_.schema.variables[i].name, int(cell), table.shape[0])

    def _llr_matrix(self, encoded: np.ndarray) -> np.ndarray:
        """(N, d) matrix of log P(x_i|pos) - log P(x_i|neg), unweighted."""
        cols = []
        for i, table in enumerate(self.cond_logp_):
            col = encoded[:, i]
            if col.size and (col.min() < 0 or col.max() >= table.shape[0]):
                bad = int(col[(col < 0) | (col >= table.shape[0])][0])
                raise CellOutOfRange(self.preprocessor_.schema.variables[i].name, bad, table.shape[0])
            cols.append(table[col, 1] - table[col, 0])
        return np.column_stack(cols) if cols else np.zeros((encoded.shape[0], 0))

    def score_logit(self, x) -> float:
        """Log-odds of the positive class: L_pos(x) - L_neg(x)."""
        self._check_instance(x)
        logit = self.log_priors_[1] - self.log_priors_[0]
        for w, cell, table in zip(self.weights_, x, self.cond_logp_):
            logit += w * (table[cell, 1] - table[cell, 0])
        return float(logit)

    def score_logit_many(self, encoded: np.ndarray) -> np.ndarray:
        base = self.log_priors_[1] - self.log_priors_[0]
        return base + self._llr_matrix(np.asarray(encoded, dtype=np.int64)) @ self.weights_

    def predict_proba(self, x) -> float:
        """Posterior of the positive class."""
        return float(1.0 / (1.0 + np.exp(-self.score_logit(x))))

    def plausibility(self, x) -> float:
        """Weighted mixture density P(X), the normalizer of the posterior."""
        self._check_instance(x)
        log_joint = self.log_priors_.copy()
        for w, cell, table in zip(self.weights_, x, self.cond_logp_):
            log_joint += w * table[cell, :]
        return float(np.exp(log_joint).sum())

    # --------------------------------------------------------- serialization

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "smoothing": self.smoothing,
            "classes": list(self.classes_),
            "log_priors": self.log_priors_.tolist(),
            "weights": self.weights_.tolist(),
            "cond_logp": [t.tolist() for t in self.cond_logp_],
            "preprocessor": self.preprocessor_.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedNaiveBayes":
        if d.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        model = cls(smoothing=d["smoothing"])
        model.preprocessor_ = Preprocessor.from_dict(d["preprocessor"])
        model.classes_ = tuple(d["classes"])
        model.log_priors_ = np.array(d["log_priors"], dtype=float)
        model.weights_ = np.array(d["weights"], dtype=float)
        model.cond_logp_ = [np.array(t, dtype=float) for t in d["cond_logp"]]
        return model

    @classmethod
    def load(cls, path) -> "WeightedNaiveBayes":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def from_probabilities(cls, priors, cond_probs, preprocessor: Preprocessor,
                           weights=None, negative_label=None):
        """Build a model directly from probability tables (fixtures, tests).

        priors: (P(neg), P(pos)); cond_probs: per variable, (cells, 2)
        arrays of P(cell | class) in (neg, pos) column order.
        """
        model = cls()
        model.preprocessor_ = preprocessor
        schema = preprocessor.schema
        negative = negative_label if negative_label is not None else "not_" + schema.positive_label
        model.classes_ = (negative, schema.positive_label)
        model.log_priors_ = np.log(np.asarray(priors, dtype=float))
        model.cond_logp_ = [np.log(np.asarray(t, dtype=float)) for t in cond_probs]
        model.weights_ = np.ones(len(model.cond_logp_)) if weights is None else np.asarray(weights, dtype=float)
        return model
