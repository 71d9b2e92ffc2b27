"""Random forest: bootstrap-sampled Gini trees with per-split feature
subsampling and deterministic per-tree seeding.

Tree seeds are spawned from the run seed with numpy SeedSequence, so the
same (data, hyperparameters, seed) always yields the same forest. The
ensemble predicts by majority vote; the score is the fraction of trees
voting fake, so an even split resolves to not-fake.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from .base import check_features, score_to_label
from .tree import TreeNode, grow_tree, tree_scores


def _resolve_max_features(max_features, n_features):
    if max_features is None:
        return None
    if max_features == "sqrt":
        return max(1, int(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(math.log2(n_features)) if n_features > 1 else 1)
    return int(max_features)


class RandomForestDetector(BaseEstimator, ClassifierMixin):
    model_kind = "random_forest"

    def __init__(self, n_trees=100, max_depth=None, min_leaf=1,
                 max_features="sqrt", bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed

    def fit(self, X, y, **ignored):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        X, y = check_X_y(X, y)
        y = np.asarray(y, dtype=np.float64)
        if len(y) == 0:
            raise ValueError("empty dataset")
        self.n_features_in_ = X.shape[1]
        k = _resolve_max_features(self.max_features, X.shape[1])
        children = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        self.trees_ = []
        # Derivation record: tree i uses SeedSequence(seed).spawn()[i].
        self.tree_seeds_ = [(self.seed, i) for i in range(self.n_trees)]
        n = len(y)
        for child in children:
            rng = np.random.default_rng(child)
            idx = rng.integers(0, n, size=n) if self.bootstrap else np.arange(n)
            root = grow_tree(
                X[idx], y[idx],
                max_depth=self.max_depth,
                min_leaf=self.min_leaf,
                max_features=k,
                rng=rng,
            )
            self.trees_.append(root)
        return self

    def predict_score(self, X):
        X = check_features(X, self.n_features_in_)
        votes = np.zeros(len(X), dtype=np.float64)
        for root in self.trees_:
            votes += tree_scores(root, X) > 0.5
        return votes / len(self.trees_)

    def predict(self, X):
        return score_to_label(self.predict_score(X))

    def get_state(self):
        return {
            "n_features": self.n_features_in_,
            "trees": [t.to_dict() for t in self.trees_],
        }

    def set_state(self, state):
        self.n_features_in_ = state["n_features"]
        self.trees_ = [TreeNode.from_dict(t) for t in state["trees"]]
        self.tree_seeds_ = [(self.seed, i) for i in range(len(self.trees_))]
        return self
