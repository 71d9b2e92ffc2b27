"""CART-style binary decision tree with greedy Gini splits.

Split candidates are midpoints between consecutive sorted unique values.
Ties are broken toward the lowest feature index, then the lowest
threshold, so training is fully deterministic. Samples with value <=
threshold go left. Leaves store the fraction of fake examples; the
predicted label is probability > 0.5 with ties resolved to not-fake.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from .base import check_features, score_to_label


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    probability_fake: float = 0.0
    n_samples: int = 0

    @property
    def is_leaf(self):
        return self.feature is None

    def depth(self):
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_dict(self):
        if self.is_leaf:
            return {"leaf": True, "p": self.probability_fake, "n": self.n_samples}
        return {
            "leaf": False,
            "feature": self.feature,
            "threshold": self.threshold,
            "n": self.n_samples,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        if data["leaf"]:
            return cls(probability_fake=data["p"], n_samples=data["n"])
        return cls(
            feature=data["feature"],
            threshold=data["threshold"],
            n_samples=data["n"],
            left=cls.from_dict(data["left"]),
            right=cls.from_dict(data["right"]),
        )


def _gini_children(sorted_y, min_leaf):
    """Weighted Gini impurity for every split position of a sorted column.

    Position s means s samples go left. Returns (positions, impurities)
    restricted to min_leaf-feasible positions; uniqueness of the boundary
    values is checked by the caller.
    """
    n = len(sorted_y)
    ones = np.cumsum(sorted_y)
    total_ones = ones[-1]
    s = np.arange(1, n)
    n_left = s.astype(np.float64)
    n_right = n - n_left
    ones_left = ones[:-1].astype(np.float64)
    ones_right = total_ones - ones_left
    gini_left = 1.0 - (ones_left / n_left) ** 2 - ((n_left - ones_left) / n_left) ** 2
    gini_right = 1.0 - (ones_right / n_right) ** 2 - ((n_right - ones_right) / n_right) ** 2
    weighted = (n_left * gini_left + n_right * gini_right) / n
    feasible = (n_left >= min_leaf) & (n_right >= min_leaf)
    return s, weighted, feasible


def best_gini_split(X, y, feature_candidates, min_leaf=1):
    """Exact greedy search over all midpoint thresholds.

    Returns (feature, threshold, weighted_gini) or None when no feasible
    split exists. Deterministic: first feature in the given candidate
    order wins ties, then the lowest threshold.
    """
    best = None
    for f in feature_candidates:
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sv = col[order]
        sy = y[order]
        if sv[0] == sv[-1]:
            continue
        positions, weighted, feasible = _gini_children(sy, min_leaf)
        boundary = sv[positions - 1] != sv[positions]
        valid = feasible & boundary
        if not valid.any():
            continue
        weighted = np.where(valid, weighted, np.inf)
        idx = int(np.argmin(weighted))
        score = float(weighted[idx])
        if best is None or score < best[2]:
            threshold = float((sv[idx] + sv[idx + 1]) / 2.0)
            best = (int(f), threshold, score)
    return best


def _gini(y):
    if len(y) == 0:
        return 0.0
    p = float(np.mean(y))
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


def grow_tree(X, y, max_depth=None, min_leaf=1, feature_indices=None,
              max_features=None, rng=None):
    """Build a tree recursively. ``feature_indices`` restricts the feature
    pool; ``max_features`` draws a per-split subsample from it via ``rng``."""
    pool = np.arange(X.shape[1]) if feature_indices is None else np.asarray(feature_indices)

    def build(idx, depth):
        sub_y = y[idx]
        node = TreeNode(probability_fake=float(np.mean(sub_y)), n_samples=len(idx))
        if max_depth is not None and depth >= max_depth:
            return node
        if len(idx) < 2 * min_leaf or sub_y.min() == sub_y.max():
            return node
        if max_features is not None and max_features < len(pool):
            candidates = np.sort(rng.choice(pool, size=max_features, replace=False))
        else:
            candidates = pool
        split = best_gini_split(X[idx], sub_y, candidates, min_leaf=min_leaf)
        if split is None:
            return node
        feature, threshold, score = split
        if score >= _gini(sub_y) - 1e-12:
            return node  # no strict impurity improvement
        go_left = X[idx, feature] <= threshold
        node.feature = feature
        node.threshold = threshold
        node.left = build(idx[go_left], depth + 1)
        node.right = build(idx[~go_left], depth + 1)
        return node

    return build(np.arange(len(y)), 0)


def tree_scores(root: TreeNode, X) -> np.ndarray:
    out = np.empty(len(X), dtype=np.float64)
    for i, row in enumerate(X):
        node = root
        while not node.is_leaf:
            node = node.left if row[node.feature] <= node.threshold else node.right
        out[i] = node.probability_fake
    return out


class DecisionTreeDetector(BaseEstimator, ClassifierMixin):
    """Greedy Gini decision tree over the 18 linguistic features."""

    model_kind = "decision_tree"

    def __init__(self, max_depth=None, min_leaf=1, feature_indices=None):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.feature_indices = feature_indices

    def fit(self, X, y, **ignored):
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=np.float64)
        if len(y) == 0:
            raise ValueError("empty dataset")
        self.n_features_in_ = X.shape[1]
        self.root_ = grow_tree(
            X, y,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            feature_indices=self.feature_indices,
        )
        return self

    def predict_score(self, X):
        X = check_features(X, self.n_features_in_)
        return tree_scores(self.root_, X)

    def predict(self, X):
        return score_to_label(self.predict_score(X))

    def get_state(self):
        return {"n_features": self.n_features_in_, "root": self.root_.to_dict()}

    def set_state(self, state):
        self.n_features_in_ = state["n_features"]
        self.root_ = TreeNode.from_dict(state["root"])
        return self


class RuleExportError(ValueError):
    """Raised when a tree is too deep for a readable if/else export."""


def _format_threshold(value: float) -> str:
    return repr(float(value))


def export_rule(model, feature_names=None, max_export_depth=3) -> str:
    """Render a decision tree as if/else pseudo-code.

    Each feature used becomes a variable x<i+1> (feature-order index),
    declared before the branching logic; leaves are "return true" for
    fake and "return false" otherwise. A depth-1 tree prints as a single
    if/else with one threshold.
    """
    root = model.root_ if hasattr(model, "root_") else model
    depth = root.depth()
    if depth > max_export_depth:
        raise RuleExportError(
            f"tree depth {depth} exceeds export limit {max_export_depth}"
        )
    if root.is_leaf:
        return f"return {'true' if root.probability_fake > 0.5 else 'false'}\n"

    used = []

    def collect(node):
        if node.is_leaf:
            return
        if node.feature not in used:
            used.append(node.feature)
        collect(node.left)
        collect(node.right)

    collect(root)
    lines = []
    for f in sorted(used):
        name = feature_names[f] if feature_names else f"feature {f}"
        lines.append(f'x{f + 1} <- value of the "{name}" feature')

    def emit(node, indent):
        pad = "    " * indent
        if node.is_leaf:
            if node.probability_fake > 0.5:
                lines.append(f"{pad}return true   # this is a fake news")
            else:
                lines.append(f"{pad}return false  # this is not a fake news")
            return
        lines.append(f"{pad}if x{node.feature + 1} <= {_format_threshold(node.threshold)}:")
        emit(node.left, indent + 1)
        lines.append(f"{pad}else:")
        emit(node.right, indent + 1)

    emit(root, 0)
    return "\n".join(lines) + "\n"
