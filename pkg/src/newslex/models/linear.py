"""Linear max-margin classifier trained by deterministic full-batch
subgradient descent on hinge loss with an L2 penalty.

Weights start at zero and every epoch uses the whole dataset, so training
is reproducible with no randomness at all; the seed parameter exists only
for interface symmetry with the other trainers. The decision score is
squashed through a sigmoid so the (label, score) contract matches the
other detectors: label = score > 0.5, i.e. raw margin > 0.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from .base import check_features, score_to_label, sigmoid


class LinearSvmDetector(BaseEstimator, ClassifierMixin):
    model_kind = "linear_svm"

    def __init__(self, regularization=1e-3, epochs=300, seed=0):
        self.regularization = regularization
        self.epochs = epochs
        self.seed = seed

    def fit(self, X, y, **ignored):
        X, y = check_X_y(X, y)
        if len(y) == 0:
            raise ValueError("empty dataset")
        signs = np.where(np.asarray(y, dtype=bool), 1.0, -1.0)
        n, d = X.shape
        lam = float(self.regularization)
        w = np.zeros(d, dtype=np.float64)
        b = 0.0
        for t in range(1, self.epochs + 1):
            margins = signs * (X @ w + b)
            violating = margins < 1.0
            if violating.any():
                grad_w = lam * w - (signs[violating, None] * X[violating]).sum(axis=0) / n
                grad_b = -signs[violating].sum() / n
            else:
                grad_w = lam * w
                grad_b = 0.0
            eta = 1.0 / (lam * t)
            w -= eta * grad_w
            b -= eta * grad_b
        self.weights_ = w
        self.bias_ = float(b)
        self.n_features_in_ = d
        return self

    def raw_score(self, X):
        X = check_features(X, self.n_features_in_)
        return X @ self.weights_ + self.bias_

    def predict_score(self, X):
        return sigmoid(self.raw_score(X))

    def predict(self, X):
        return score_to_label(self.predict_score(X))

    def get_state(self):
        return {
            "n_features": self.n_features_in_,
            "weights": self.weights_.tolist(),
            "bias": self.bias_,
        }

    def set_state(self, state):
        self.n_features_in_ = state["n_features"]
        self.weights_ = np.asarray(state["weights"], dtype=np.float64)
        self.bias_ = float(state["bias"])
        return self
