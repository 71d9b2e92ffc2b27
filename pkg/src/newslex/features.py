"""The 18 linguistic features: tokenization, sentence splitting,
per-category percentages and the structural counts.

Feature values: for each lexicon-backed category, 100 * matched words /
total words. Multiword phrases match greedily (longest first) and consume
their words before single-word and prefix entries are tried; a k-word
phrase contributes k matched words. Placeholder tokens ([URL] etc.) never
match any lexicon but count in the denominator. exclam and qmark are
percentages of '!' / '?' characters per word; wps is words per sentence.
A zero-word document scores 0 everywhere.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .documents import CleanDocument, CorpusError, RawDocument, format_label, parse_label, write_text_atomic
from .lexicons import LEXICAL_CATEGORIES, load_bundled_lexicons, load_lexicons

# Fixed feature order; index i is rendered as x{i+1} in exported rules.
FEATURE_NAMES = (
    "feeling",
    "assent",
    "perception",
    "discrep",
    "certitude",
    "cause",
    "wps",
    "space",
    "auditory",
    "allnone",
    "motion",
    "tone_neg",
    "swear",
    "tone_pos",
    "exclam",
    "qmark",
    "netspeak",
    "conversation",
)
N_FEATURES = len(FEATURE_NAMES)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

_TOKEN_RE = re.compile(r"\[(?:URL|MENTION|HASHTAG|COVID|EMOJI)\]|(?:[^\W_]|['’])+")
_SENTENCE_RE = re.compile(r"[.!?]+")


def tokenize_words(text: str) -> list[str]:
    """Word tokens: maximal runs of letters/digits/apostrophes, with each
    placeholder token kept as a single word."""
    return _TOKEN_RE.findall(text)


def is_placeholder_token(token: str) -> bool:
    return token.startswith("[") and token.endswith("]")


def split_sentences(text: str) -> list[str]:
    """Split on runs of '.', '!' or '?'; whitespace-only segments dropped."""
    return [seg for seg in _SENTENCE_RE.split(text) if seg.strip()]


def count_category_matches(tokens, lexicon) -> int:
    """Matched-word count for one category over a token stream.

    Phrases are tried longest-first at each position and consume their
    words; remaining tokens are tested against single words and prefixes.
    """
    n = len(tokens)
    consumed = [False] * n
    matched = 0
    if lexicon.phrases:
        i = 0
        while i < n:
            hit = False
            for phrase in lexicon.phrases:
                k = len(phrase)
                if i + k > n:
                    continue
                window = tokens[i : i + k]
                if any(is_placeholder_token(t) for t in window):
                    continue
                if tuple(window) == phrase:
                    for j in range(i, i + k):
                        consumed[j] = True
                    matched += k
                    i += k
                    hit = True
                    break
            if not hit:
                i += 1
    for i, token in enumerate(tokens):
        if consumed[i] or is_placeholder_token(token):
            continue
        if lexicon.matches_word(token):
            matched += 1
    return matched


def extract_features(doc, lexicons) -> np.ndarray:
    """Compute the 18-feature vector of one document, in FEATURE_NAMES order."""
    text = doc.text if isinstance(doc, (CleanDocument, RawDocument)) else doc
    tokens = tokenize_words(text)
    total = len(tokens)
    vec = np.zeros(N_FEATURES, dtype=np.float64)
    if total == 0:
        return vec
    for name in LEXICAL_CATEGORIES:
        vec[FEATURE_INDEX[name]] = 100.0 * count_category_matches(tokens, lexicons[name]) / total
    vec[FEATURE_INDEX["exclam"]] = 100.0 * text.count("!") / total
    vec[FEATURE_INDEX["qmark"]] = 100.0 * text.count("?") / total
    vec[FEATURE_INDEX["wps"]] = total / len(split_sentences(text))
    return vec


class LexiconFeatureExtractor(BaseEstimator, TransformerMixin):
    """Transformer: documents -> (n, 18) feature matrix.

    By default expects preprocessed documents; ``use_raw_text=True``
    lowercases and extracts from raw text instead.
    """

    def __init__(self, lexicon_dir=None, use_raw_text=False):
        self.lexicon_dir = lexicon_dir
        self.use_raw_text = use_raw_text

    def fit(self, X=None, y=None):
        if self.lexicon_dir is None:
            self.lexicons_ = load_bundled_lexicons()
        else:
            self.lexicons_ = load_lexicons(self.lexicon_dir)
        return self

    def transform(self, X):
        check_is_fitted(self, "lexicons_")
        rows = []
        for doc in X:
            if self.use_raw_text:
                text = doc.text.lower() if hasattr(doc, "text") else str(doc).lower()
                rows.append(extract_features(text, self.lexicons_))
            else:
                rows.append(extract_features(doc, self.lexicons_))
        return np.asarray(rows) if rows else np.empty((0, N_FEATURES))


@dataclass
class FeatureTable:
    """Feature matrix with document ids and optional labels attached."""

    ids: list[str]
    X: np.ndarray
    labels: list[bool | None]

    def __post_init__(self):
        if len(self.ids) != len(self.X) or len(self.ids) != len(self.labels):
            raise ValueError("ids, X and labels must have equal length")

    def __len__(self):
        return len(self.ids)

    def y(self) -> np.ndarray:
        if any(label is None for label in self.labels):
            raise ValueError("feature table contains unlabeled rows")
        return np.asarray(self.labels, dtype=bool)

    def subset(self, ids):
        index = {doc_id: i for i, doc_id in enumerate(self.ids)}
        rows = [index[i] for i in ids]
        return FeatureTable(
            ids=list(ids),
            X=self.X[rows],
            labels=[self.labels[i] for i in rows],
        )


FEATURES_HEADER = ("id", "label") + FEATURE_NAMES


def write_features_csv(table: FeatureTable, path):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FEATURES_HEADER)
    for doc_id, row, label in zip(table.ids, table.X, table.labels):
        writer.writerow([doc_id, format_label(label)] + [repr(float(v)) for v in row])
    write_text_atomic(path, buf.getvalue())


def read_features_csv(path) -> FeatureTable:
    ids, rows, labels = [], [], []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise CorpusError(f"empty features file: {path}")
        if tuple(header) != FEATURES_HEADER:
            raise CorpusError(f"{path}: unexpected features header {header}")
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(FEATURES_HEADER):
                raise CorpusError(f"{path}: row {row_no} has {len(row)} fields")
            ids.append(row[0])
            labels.append(parse_label(row[1], row=row_no))
            rows.append([float(v) for v in row[2:]])
    if not ids:
        raise CorpusError(f"no feature rows in {path}")
    return FeatureTable(ids=ids, X=np.asarray(rows), labels=labels)
