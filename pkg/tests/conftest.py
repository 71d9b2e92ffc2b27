"""Shared fixtures and the documented synthetic generators.

The generators double as test oracles: each one's Bayes-optimal error is
computable in closed form or by Monte Carlo on the known generative
model, which is what the classification bounds in the tests are frozen
against.
"""

from __future__ import annotations

import numpy as np
import pytest

from newslex.lexicons import load_bundled_lexicons

N_FEATURES = 18
INFORMATIVE = (0, 1, 2)
PLANTED_SHIFT = 1.2
PLANTED_NOISE = 0.6


def planted_signal(n, seed, shift=PLANTED_SHIFT, noise=PLANTED_NOISE):
    """Near-separable in 3 of 18 features.

    Features 0..2 are shift*sign(y) + noise*N(0,1); the rest are N(0,1).
    Bayes rule is sign(x0+x1+x2); its error is
    Phi(-3*shift / (sqrt(3)*noise)) ~= 0.03% at the defaults.
    """
    rng = np.random.default_rng(seed)
    y = rng.random(n) > 0.5
    X = rng.normal(size=(n, N_FEATURES))
    s = np.where(y, 1.0, -1.0)
    for f in INFORMATIVE:
        X[:, f] = shift * s + noise * rng.normal(size=n)
    return X, y


def planted_bayes_error(X, y):
    """Error of the generative-model-optimal rule on a sample."""
    pred = X[:, list(INFORMATIVE)].sum(axis=1) > 0.0
    return float(np.mean(pred != y))


def random_labels(n, seed):
    """No-signal control: pure noise features, exactly balanced labels in
    random order. Held-out error concentrates at 50%."""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, N_FEATURES))
    y = np.zeros(n, dtype=bool)
    y[: n // 2] = True
    return X, y[rng.permutation(n)]


# Complementary-signal corpus: the text reveals the label through one
# indicative word (flipped with probability TEXT_FLIP), the feature
# vector through two continuous dimensions. An embedding of the text
# sees only the first signal; fusing adds the second.
FAKE_WORDS = ("meteor", "miracle", "exposed", "secret", "shocking", "coverup")
REAL_WORDS = ("report", "official", "study", "figures", "schedule", "review")
FILLER_WORDS = ("the", "about", "city", "today", "people", "news", "said",
                "week", "public", "local")
TEXT_FLIP = 0.15
FEAT_SHIFT = 1.0
FEAT_DIMS = (0, 1)


def complementary_corpus(n, seed):
    """Returns (ids, texts, feature matrix, labels)."""
    rng = np.random.default_rng(seed)
    ids, texts, labels = [], [], []
    X = rng.normal(size=(n, N_FEATURES))
    for i in range(n):
        y = bool(rng.integers(0, 2))
        shown = y if rng.random() >= TEXT_FLIP else not y
        pool = FAKE_WORDS if shown else REAL_WORDS
        word = pool[rng.integers(0, len(pool))]
        tokens = [FILLER_WORDS[rng.integers(0, len(FILLER_WORDS))] for _ in range(6)]
        tokens.append(word)
        perm = rng.permutation(len(tokens))
        texts.append(" ".join(tokens[j] for j in perm))
        s = 1.0 if y else -1.0
        for f in FEAT_DIMS:
            X[i, f] = FEAT_SHIFT * s + rng.normal()
        ids.append(f"d{i:05d}")
        labels.append(y)
    return ids, texts, X, np.asarray(labels, dtype=bool)


def complementary_bayes_errors(n=40000, seed=9999):
    """Monte-Carlo Bayes error of the text-only and the combined view.

    Exact posteriors under the generative model: the word carries
    likelihood ratio (1-flip)/flip; each informative feature dimension
    x ~ N(+/-shift, 1) contributes log-LR 2*shift*x.
    """
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, size=n).astype(bool)
    shown = np.where(rng.random(n) >= TEXT_FLIP, y, ~y)
    word_llr = np.where(shown, 1.0, -1.0) * np.log((1.0 - TEXT_FLIP) / TEXT_FLIP)
    s = np.where(y, 1.0, -1.0)
    feat = FEAT_SHIFT * s[:, None] + rng.normal(size=(n, len(FEAT_DIMS)))
    feat_llr = 2.0 * FEAT_SHIFT * feat.sum(axis=1)
    text_only = float(np.mean((word_llr > 0) != y))
    combined = float(np.mean((word_llr + feat_llr > 0) != y))
    return text_only, combined


@pytest.fixture(scope="session")
def lexicons():
    return load_bundled_lexicons()


def brute_force_category(tokens, lexicon):
    """Independent oracle for the documented matching contract: phrases
    match left to right, longest phrase first at each position, and
    consume their words; surviving non-placeholder tokens are then tested
    one by one against words and prefixes.

    Implemented via regex alternation over the space-joined token string
    (leftmost match wins, earlier alternative wins at equal position),
    mapping matched character spans back to token indices.
    """
    import re as _re

    consumed = [False] * len(tokens)
    matched = 0
    if lexicon.phrases and tokens:
        joined = " ".join(tokens)
        starts = []
        pos = 0
        for tok in tokens:
            starts.append(pos)
            pos += len(tok) + 1
        ordered = sorted(lexicon.phrases, key=lambda p: (-len(p), p))
        pattern = _re.compile(
            r"(?<![^ ])(?:%s)(?![^ ])"
            % "|".join(_re.escape(" ".join(p)) for p in ordered)
        )
        for m in pattern.finditer(joined):
            span_tokens = [
                i for i, s in enumerate(starts)
                if m.start() <= s < m.end()
            ]
            if any(tokens[i].startswith("[") and tokens[i].endswith("]")
                   for i in span_tokens):
                continue
            if starts[span_tokens[0]] != m.start():
                continue
            for i in span_tokens:
                consumed[i] = True
            matched += len(span_tokens)
    for i, token in enumerate(tokens):
        if consumed[i] or (token.startswith("[") and token.endswith("]")):
            continue
        if token in lexicon.words:
            matched += 1
        else:
            for stem in lexicon.prefixes:
                if token.startswith(stem):
                    matched += 1
                    break
    return matched


def brute_force_best_splits(X, y, min_leaf=1):
    """Exhaustive split oracle: weighted Gini of every (feature, midpoint)
    candidate, returning the optimal impurity and the full argmin set."""

    def gini(labels):
        if len(labels) == 0:
            return 0.0
        p = np.mean(labels)
        return 1.0 - p**2 - (1.0 - p) ** 2

    n = len(y)
    best_value = np.inf
    best_set = set()
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            threshold = (lo + hi) / 2.0
            left = y[X[:, f] <= threshold]
            right = y[X[:, f] > threshold]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            weighted = (len(left) * gini(left) + len(right) * gini(right)) / n
            if weighted < best_value - 1e-12:
                best_value = weighted
                best_set = {(f, threshold)}
            elif abs(weighted - best_value) <= 1e-12:
                best_set.add((f, threshold))
    return best_value, best_set
