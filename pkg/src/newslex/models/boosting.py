"""Gradient-boosted regression trees on logistic loss.

Second-order boosting: each round fits a tree to the gradient/hessian of
the logistic loss, leaf values are -G/(H + lambda), and every split
records its gain (loss reduction) together with the feature used. The
recorded gains back the gain-importance report. Prediction is the
sigmoid of the summed, learning-rate-scaled leaf values, thresholded at
0.5. Training is deterministic: exact greedy splits over midpoints, no
row or column subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from .base import check_features, score_to_label, sigmoid


@dataclass
class BoostNode:
    feature: int | None = None
    threshold: float | None = None
    left: "BoostNode | None" = None
    right: "BoostNode | None" = None
    value: float = 0.0
    gain: float = 0.0

    @property
    def is_leaf(self):
        return self.feature is None

    def to_dict(self):
        if self.is_leaf:
            return {"leaf": True, "value": self.value}
        return {
            "leaf": False,
            "feature": self.feature,
            "threshold": self.threshold,
            "gain": self.gain,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        if data["leaf"]:
            return cls(value=data["value"])
        return cls(
            feature=data["feature"],
            threshold=data["threshold"],
            gain=data["gain"],
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


def _best_gain_split(X, g, h, reg_lambda, min_leaf):
    """Best (feature, threshold, gain) over all midpoint candidates, or
    None. Gain is the standard second-order loss reduction of the split."""
    n = len(g)
    G, H = g.sum(), h.sum()
    parent = G * G / (H + reg_lambda)
    best = None
    for f in range(X.shape[1]):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        if sv[0] == sv[-1]:
            continue
        gl = np.cumsum(g[order])[:-1]
        hl = np.cumsum(h[order])[:-1]
        gr = G - gl
        hr = H - hl
        gain = 0.5 * (gl * gl / (hl + reg_lambda) + gr * gr / (hr + reg_lambda) - parent)
        s = np.arange(1, n)
        valid = (sv[:-1] != sv[1:]) & (s >= min_leaf) & (n - s >= min_leaf)
        if not valid.any():
            continue
        gain = np.where(valid, gain, -np.inf)
        idx = int(np.argmax(gain))
        score = float(gain[idx])
        if best is None or score > best[2]:
            best = (f, float((sv[idx] + sv[idx + 1]) / 2.0), score)
    return best


def _grow_boost_tree(X, g, h, max_depth, reg_lambda, min_leaf, splits_out):
    def build(idx, depth):
        gi, hi = g[idx], h[idx]
        node = BoostNode(value=float(-gi.sum() / (hi.sum() + reg_lambda)))
        if depth >= max_depth or len(idx) < 2 * min_leaf:
            return node
        split = _best_gain_split(X[idx], gi, hi, reg_lambda, min_leaf)
        if split is None or split[2] <= 1e-12:
            return node
        feature, threshold, gain = split
        node.feature = feature
        node.threshold = threshold
        node.gain = gain
        splits_out.append((feature, gain))
        go_left = X[idx, feature] <= threshold
        node.left = build(idx[go_left], depth + 1)
        node.right = build(idx[~go_left], depth + 1)
        return node

    return build(np.arange(len(g)), 0)


def _boost_tree_raw(node: BoostNode, X):
    out = np.empty(len(X), dtype=np.float64)
    for i, row in enumerate(X):
        cur = node
        while not cur.is_leaf:
            cur = cur.left if row[cur.feature] <= cur.threshold else cur.right
        out[i] = cur.value
    return out


class GradientBoostingDetector(BaseEstimator, ClassifierMixin):
    model_kind = "gbdt"

    def __init__(self, n_rounds=100, learning_rate=0.3, max_depth=3,
                 reg_lambda=1.0, min_leaf=1, seed=0):
        self.n_rounds = n_rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.reg_lambda = reg_lambda
        self.min_leaf = min_leaf
        self.seed = seed  # kept for provenance; training is deterministic

    def fit(self, X, y, **ignored):
        if self.n_rounds < 1:
            raise ValueError("n_rounds must be >= 1")
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=np.float64)
        if len(y) == 0:
            raise ValueError("empty dataset")
        self.n_features_in_ = X.shape[1]
        raw = np.zeros(len(y), dtype=np.float64)
        self.trees_ = []
        self.split_records_ = []  # (feature, gain) across all rounds
        for _ in range(self.n_rounds):
            p = sigmoid(raw)
            g = p - y
            h = p * (1.0 - p)
            tree = _grow_boost_tree(
                X, g, h, self.max_depth, self.reg_lambda, self.min_leaf,
                self.split_records_,
            )
            self.trees_.append(tree)
            raw += self.learning_rate * _boost_tree_raw(tree, X)
        return self

    def raw_score(self, X):
        X = check_features(X, self.n_features_in_)
        raw = np.zeros(len(X), dtype=np.float64)
        for tree in self.trees_:
            raw += self.learning_rate * _boost_tree_raw(tree, X)
        return raw

    def predict_score(self, X):
        return sigmoid(self.raw_score(X))

    def predict(self, X):
        return score_to_label(self.predict_score(X))

    def get_state(self):
        return {
            "n_features": self.n_features_in_,
            "trees": [t.to_dict() for t in self.trees_],
            "split_records": [[f, g] for f, g in self.split_records_],
        }

    def set_state(self, state):
        self.n_features_in_ = state["n_features"]
        self.trees_ = [BoostNode.from_dict(t) for t in state["trees"]]
        self.split_records_ = [(f, g) for f, g in state["split_records"]]
        return self


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature average-gain importances, percentages summing to 100,
    sorted descending."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        total = sum(pct for _, pct in self.entries)
        if abs(total - 100.0) > 1e-6:
            raise ValueError(f"importance percentages sum to {total}, expected 100")
        for name, pct in self.entries:
            if not 0.0 <= pct <= 100.0 + 1e-9:
                raise ValueError(f"importance out of range for {name}: {pct}")

    def as_dict(self):
        return dict(self.entries)

    def to_csv(self):
        lines = ["feature,importance_pct"]
        lines += [f"{name},{pct!r}" for name, pct in self.entries]
        return "\n".join(lines) + "\n"


def gain_importance(model: GradientBoostingDetector, feature_names) -> ImportanceReport:
    """Average gain per feature across all splits using it, normalized so
    the percentages sum to 100. Unused features report 0."""
    records = model.split_records_
    if not records:
        raise ValueError("ensemble has no splits; importance is undefined")
    sums = np.zeros(model.n_features_in_)
    counts = np.zeros(model.n_features_in_)
    for feature, gain in records:
        sums[feature] += gain
        counts[feature] += 1
    avg = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    pct = 100.0 * avg / avg.sum()
    # Exact-100 invariant: put rounding residue on the largest entry.
    residue = 100.0 - pct.sum()
    pct[int(np.argmax(pct))] += residue
    entries = sorted(zip(feature_names, pct), key=lambda kv: (-kv[1], kv[0]))
    return ImportanceReport(entries=tuple((name, float(p)) for name, p in entries))
