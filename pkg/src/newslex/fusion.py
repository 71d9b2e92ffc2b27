"""Late fusion of pooled sentence embeddings with the 18 linguistic
features, and the MLP head trained on the concatenation.

The embedding interchange format is line-delimited JSON: line 1 is the
manifest object {"model", "dim", "pooling"}, every following line one
record {"id", "vec"}. This format is the contract with external encoder
exporters; ``toy_encoder`` is a deterministic stand-in (feature-hashed
bag of words) so everything here runs without a deep-learning stack.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .documents import write_text_atomic
from .features import N_FEATURES, tokenize_words
from .harness import RunReport, summarize_errors
from .models.mlp import MlpDetector

POOLING_KINDS = ("mean", "cls")


class EmbeddingFormatError(ValueError):
    """Raised for malformed embedding files (reported with line numbers)."""


@dataclass(frozen=True)
class EmbeddingManifest:
    model: str
    dim: int
    pooling: str

    def __post_init__(self):
        if self.dim <= 0:
            raise EmbeddingFormatError(f"manifest dim must be positive, got {self.dim}")
        if self.pooling not in POOLING_KINDS:
            raise EmbeddingFormatError(
                f"manifest pooling must be one of {POOLING_KINDS}, got {self.pooling!r}"
            )


@dataclass(frozen=True)
class EmbeddingRecord:
    id: str
    vec: np.ndarray


@dataclass(frozen=True)
class FusedExample:
    id: str
    fused: np.ndarray  # embedding first, then the 18 normalized features
    label: bool | None = None


def load_embeddings(path):
    """Parse and validate an embedding file.

    Returns (manifest, dict id -> EmbeddingRecord). Dimension mismatches,
    duplicate ids and malformed lines are errors naming the line.
    """
    records: dict[str, EmbeddingRecord] = {}
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
        if not first.strip():
            raise EmbeddingFormatError(f"{path}:1: missing manifest line")
        try:
            head = json.loads(first)
            manifest = EmbeddingManifest(
                model=head["model"], dim=int(head["dim"]), pooling=head["pooling"]
            )
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise EmbeddingFormatError(f"{path}:1: bad manifest: {exc}") from exc
        for line_no, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                rec_id = raw["id"]
                vec = np.asarray(raw["vec"], dtype=np.float64)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise EmbeddingFormatError(f"{path}:{line_no}: bad record: {exc}") from exc
            if vec.ndim != 1 or len(vec) != manifest.dim:
                raise EmbeddingFormatError(
                    f"{path}:{line_no}: record {rec_id!r} has dim {vec.shape}, "
                    f"manifest says {manifest.dim}"
                )
            if not np.isfinite(vec).all():
                raise EmbeddingFormatError(f"{path}:{line_no}: non-finite value in {rec_id!r}")
            if rec_id in records:
                raise EmbeddingFormatError(f"{path}:{line_no}: duplicate id {rec_id!r}")
            records[rec_id] = EmbeddingRecord(id=rec_id, vec=vec)
    return manifest, records


def write_embeddings(manifest: EmbeddingManifest, records, path):
    lines = [json.dumps({"model": manifest.model, "dim": manifest.dim,
                         "pooling": manifest.pooling}, sort_keys=True)]
    for rec in records:
        lines.append(json.dumps({"id": rec.id, "vec": rec.vec.tolist()},
                                sort_keys=True))
    write_text_atomic(path, "\n".join(lines) + "\n")


def toy_encoder(doc, dim=64) -> EmbeddingRecord:
    """Deterministic stand-in encoder: md5-hashed bag of words, signed
    buckets, L2-normalized. Empty text maps to the zero vector."""
    if dim < 8:
        raise ValueError("toy encoder dim must be >= 8")
    text = doc.text if hasattr(doc, "text") else str(doc)
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokenize_words(text):
        digest = hashlib.md5(token.encode("utf-8")).digest()
        bucket = int.from_bytes(digest[:8], "big") % dim
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[bucket] += sign
    norm = math.sqrt(float(vec @ vec))
    if norm > 0.0:
        vec /= norm
    return EmbeddingRecord(id=getattr(doc, "id", ""), vec=vec)


def encode_corpus(docs, dim=64, model_name="toy-hash"):
    manifest = EmbeddingManifest(model=model_name, dim=dim, pooling="mean")
    return manifest, [toy_encoder(doc, dim=dim) for doc in docs]


def fuse(embedding: EmbeddingRecord, features, label=None, features_id=None) -> FusedExample:
    """Concatenate embedding (first) with the normalized features (last)."""
    if features_id is not None and features_id != embedding.id:
        raise ValueError(f"id mismatch: embedding {embedding.id!r} vs features {features_id!r}")
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1 or len(features) != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features, got shape {features.shape}")
    return FusedExample(
        id=embedding.id,
        fused=np.concatenate([embedding.vec, features]),
        label=label,
    )


def build_matrix(ids, records, table=None):
    """Stack vectors for ``ids``: embedding-only, or fused when a feature
    table is given. Returns (X, y)."""
    rows, labels = [], []
    feature_rows = None
    if table is not None:
        index = {doc_id: i for i, doc_id in enumerate(table.ids)}
        feature_rows = [index[i] for i in ids]
    for pos, doc_id in enumerate(ids):
        if doc_id not in records:
            raise KeyError(f"no embedding for document {doc_id!r}")
        rec = records[doc_id]
        if table is None:
            rows.append(rec.vec)
            labels.append(None)
        else:
            row = feature_rows[pos]
            fused = fuse(rec, table.X[row], label=table.labels[row],
                         features_id=table.ids[row])
            rows.append(fused.fused)
            labels.append(fused.label)
    return np.asarray(rows), labels


DEFAULT_HEAD = dict(hidden=(256, 256), dropout=0.1, max_epochs=10,
                    validate_every=600, patience=10)


def train_fusion_head(X_train, y_train, X_val, y_val, seed=0, **head_params):
    """Train the MLP classification head on fused (or plain) vectors."""
    if len(X_train) == 0 or len(X_val) == 0:
        raise ValueError("empty split")
    params = {**DEFAULT_HEAD, **head_params}
    head = MlpDetector(seed=seed, **params)
    head.fit(np.asarray(X_train), np.asarray(y_train),
             X_val=np.asarray(X_val), y_val=np.asarray(y_val))
    return head


@dataclass(frozen=True)
class ComparisonReport:
    plain: RunReport
    fused: RunReport

    @property
    def improvement_pct(self) -> float:
        return relative_improvement(self.plain.mean, self.fused.mean)


def relative_improvement(mean_plain: float, mean_fused: float) -> float:
    """(plain - fused) / plain * 100; the Improvement column."""
    if mean_plain == 0.0:
        return 0.0
    return (mean_plain - mean_fused) / mean_plain * 100.0


def compare_fusion(records, table, split, runs=5, base_seed=0, **head_params):
    """Train embedding-only and fused heads over seeded runs and report
    mean/best/SD for each plus the relative improvement."""
    if runs < 2:
        raise ValueError("compare_fusion needs at least 2 runs")
    labels = {doc_id: lab for doc_id, lab in zip(table.ids, table.labels)}
    y = {k: np.asarray([labels[i] for i in getattr(split, k)], dtype=bool)
         for k in ("train", "validation", "test")}
    errors = {"plain": [], "fused": []}
    seeds = [base_seed + i for i in range(runs)]
    for variant, feats in (("plain", None), ("fused", table)):
        X_train, _ = build_matrix(split.train, records, feats)
        X_val, _ = build_matrix(split.validation, records, feats)
        X_test, _ = build_matrix(split.test, records, feats)
        for seed in seeds:
            head = train_fusion_head(
                X_train, y["train"], X_val, y["validation"],
                seed=seed, **head_params,
            )
            pred = head.predict(X_test)
            errors[variant].append(100.0 * float(np.mean(pred != y["test"])))
    reports = {}
    for variant in ("plain", "fused"):
        mean, best, sd = summarize_errors(errors[variant])
        reports[variant] = RunReport(
            model=f"fusion-head ({variant})",
            errors=tuple(errors[variant]),
            seeds=tuple(seeds),
            mean=mean,
            best=best,
            sd=sd,
            provenance={"runs": runs, "base_seed": base_seed,
                        "head": {k: list(v) if isinstance(v, tuple) else v
                                 for k, v in {**DEFAULT_HEAD, **head_params}.items()}},
        )
    return ComparisonReport(plain=reports["plain"], fused=reports["fused"])
