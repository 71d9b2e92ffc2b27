"""Plain-numpy multilayer perceptron for binary detection.

GELU hidden activations, inverted dropout (training only), softmax
cross-entropy loss and AdamW updates with decoupled weight decay on the
weight matrices. Training shuffles, dropout masks and initialization all
come from one seeded generator, so a given (data, hyperparameters, seed)
always produces identical weights.

Early stopping monitors validation error at a configurable cadence
(every ``validate_every`` optimizer steps, or once per epoch when None,
plus always at the end of training) and restores the best checkpoint.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_X_y

from .base import check_features, score_to_label

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(z):
    return 0.5 * z * (1.0 + erf(z / _SQRT2))


def gelu_grad(z):
    cdf = 0.5 * (1.0 + erf(z / _SQRT2))
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    return cdf + z * pdf


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=1, keepdims=True)


class _AdamW:
    def __init__(self, params, lr, weight_decay, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads, decay_mask):
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            update = (self.m[i] / bc1) / (np.sqrt(self.v[i] / bc2) + self.eps)
            if decay_mask[i]:
                update = update + self.weight_decay * p
            p -= self.lr * update


class MlpDetector(BaseEstimator, ClassifierMixin):
    """MLP detector; the default stack is 3 hidden layers of 128 units."""

    model_kind = "mlp"

    def __init__(self, hidden=(128, 128, 128), dropout=0.1, lr=1e-3,
                 weight_decay=1e-2, batch_size=64, max_epochs=200,
                 patience=10, validate_every=None, seed=0):
        self.hidden = hidden
        self.dropout = dropout
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.validate_every = validate_every
        self.seed = seed

    def _init_params(self, sizes, rng):
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            biases.append(np.zeros(fan_out))
        return weights, biases

    def _forward(self, X, train=False, rng=None):
        """Returns (logits, cache); cache holds pre-activations, layer
        inputs and dropout masks for the backward pass."""
        h = X
        zs, inputs, masks = [], [], []
        n_hidden = len(self.weights_) - 1
        for i in range(n_hidden):
            inputs.append(h)
            z = h @ self.weights_[i] + self.biases_[i]
            zs.append(z)
            h = gelu(z)
            if train and self.dropout > 0.0:
                mask = (rng.random(h.shape) >= self.dropout) / (1.0 - self.dropout)
                h = h * mask
                masks.append(mask)
            else:
                masks.append(None)
        inputs.append(h)
        logits = h @ self.weights_[-1] + self.biases_[-1]
        return logits, (zs, inputs, masks)

    def _backward(self, cache, grad_logits):
        zs, inputs, masks = cache
        grads_w = [None] * len(self.weights_)
        grads_b = [None] * len(self.biases_)
        grad = grad_logits
        grads_w[-1] = inputs[-1].T @ grad
        grads_b[-1] = grad.sum(axis=0)
        grad = grad @ self.weights_[-1].T
        for i in range(len(zs) - 1, -1, -1):
            if masks[i] is not None:
                grad = grad * masks[i]
            grad = grad * gelu_grad(zs[i])
            grads_w[i] = inputs[i].T @ grad
            grads_b[i] = grad.sum(axis=0)
            if i > 0:
                grad = grad @ self.weights_[i].T
        return grads_w, grads_b

    def _val_error(self, X_val, y_val):
        logits, _ = self._forward(X_val, train=False)
        pred = logits[:, 1] > logits[:, 0]
        return float(np.mean(pred != y_val))

    def fit(self, X, y, X_val=None, y_val=None):
        X, y = check_X_y(X, y)
        if len(y) == 0:
            raise ValueError("empty dataset")
        if X_val is None or y_val is None:
            raise ValueError("mlp training requires a validation split")
        X_val = np.asarray(X_val, dtype=np.float64)
        y_val = np.asarray(y_val, dtype=bool)
        y_idx = np.asarray(y, dtype=int)
        rng = np.random.default_rng(self.seed)
        sizes = [X.shape[1], *self.hidden, 2]
        self.n_features_in_ = X.shape[1]
        self.weights_, self.biases_ = self._init_params(sizes, rng)

        params = self.weights_ + self.biases_
        decay_mask = [True] * len(self.weights_) + [False] * len(self.biases_)
        opt = _AdamW(params, lr=self.lr, weight_decay=self.weight_decay)

        best_error = math.inf
        best_weights = [w.copy() for w in self.weights_]
        best_biases = [b.copy() for b in self.biases_]
        stale = 0
        n = len(y_idx)
        step = 0
        stop = False

        def validate():
            nonlocal best_error, best_weights, best_biases, stale
            err = self._val_error(X_val, y_val)
            if err < best_error:
                best_error = err
                best_weights = [w.copy() for w in self.weights_]
                best_biases = [b.copy() for b in self.biases_]
                stale = 0
            else:
                stale += 1
            return stale >= self.patience

        for _ in range(self.max_epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start : start + self.batch_size]
                xb, yb = X[batch], y_idx[batch]
                logits, cache = self._forward(xb, train=True, rng=rng)
                probs = _softmax(logits)
                grad_logits = probs
                grad_logits[np.arange(len(yb)), yb] -= 1.0
                grad_logits /= len(yb)
                grads_w, grads_b = self._backward(cache, grad_logits)
                opt.step(params, grads_w + grads_b, decay_mask)
                step += 1
                if self.validate_every and step % self.validate_every == 0:
                    if validate():
                        stop = True
                        break
            if stop:
                break
            if not self.validate_every:
                if validate():
                    break
        else:
            # Step-based cadences shorter than one epoch's worth of steps
            # would otherwise never see the final checkpoint.
            if self.validate_every:
                validate()
        self.weights_ = best_weights
        self.biases_ = best_biases
        self.best_val_error_ = best_error
        return self

    def predict_score(self, X):
        X = check_features(X, self.n_features_in_)
        logits, _ = self._forward(X, train=False)
        return _softmax(logits)[:, 1]

    def predict(self, X):
        return score_to_label(self.predict_score(X))

    def get_state(self):
        return {
            "n_features": self.n_features_in_,
            "sizes": [self.n_features_in_, *self.hidden, 2],
            "weights": [w.tolist() for w in self.weights_],
            "biases": [b.tolist() for b in self.biases_],
        }

    def set_state(self, state):
        self.n_features_in_ = state["n_features"]
        self.weights_ = [np.asarray(w, dtype=np.float64) for w in state["weights"]]
        self.biases_ = [np.asarray(b, dtype=np.float64) for b in state["biases"]]
        sizes = state["sizes"]
        self.hidden = tuple(sizes[1:-1])
        return self
