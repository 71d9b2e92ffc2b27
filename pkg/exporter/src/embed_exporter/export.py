"""Compute pooled sentence embeddings and emit the fusion JSONL format.

Output: line 1 is the manifest {"model", "dim", "pooling"}, then one
{"id", "vec"} record per corpus row, in corpus order. Inference runs in
eval mode under no_grad, so a given checkpoint and corpus always produce
the same file.
"""

from __future__ import annotations

import json
import os

import torch

from .config import ExporterConfig, ExporterError
from .corpus import load_corpus


def mean_pool(hidden, attention_mask):
    """Average token encodings over non-padding positions."""
    mask = attention_mask.unsqueeze(-1).to(hidden.dtype)
    summed = (hidden * mask).sum(dim=1)
    counts = mask.sum(dim=1).clamp(min=1.0)
    return summed / counts

def cls_pool(hidden, attention_mask=None):
    """First-position (classifier token) encoding."""
    return hidden[:, 0, :]


_POOLERS = {"mean": mean_pool, "cls": cls_pool}


def load_checkpoint(config: ExporterConfig, with_classifier_head=False):
    from transformers import AutoModel, AutoModelForSequenceClassification, AutoTokenizer

    cls = AutoModelForSequenceClassification if with_classifier_head else AutoModel
    kwargs = {"num_labels": 2} if with_classifier_head else {}
    try:
        tokenizer = AutoTokenizer.from_pretrained(config.checkpoint)
        model = cls.from_pretrained(config.checkpoint, **kwargs)
    except (OSError, EnvironmentError, ValueError) as exc:
        raise ExporterError(
            f"checkpoint unavailable: {config.checkpoint!r} ({exc})"
        ) from exc
    return tokenizer, model.to(config.device)


def _encode_batches(texts, tokenizer, encoder, config):
    pooler = _POOLERS[config.pooling]
    encoder.eval()
    vectors = []
    try:
        with torch.no_grad():
            for start in range(0, len(texts), config.batch_size):
                batch = texts[start : start + config.batch_size]
                enc = tokenizer(
                    batch,
                    padding=True,
                    truncation=True,
                    max_length=config.max_length,
                    return_tensors="pt",
                ).to(config.device)
                hidden = encoder(**enc).last_hidden_state
                pooled = pooler(hidden, enc["attention_mask"])
                vectors.extend(pooled.cpu().double().tolist())
    except torch.cuda.OutOfMemoryError as exc:
        raise ExporterError(
            f"out of memory at batch_size={config.batch_size}; retry with a "
            f"smaller --batch-size"
        ) from exc
    except RuntimeError as exc:
        if "out of memory" in str(exc).lower():
            raise ExporterError(
                f"out of memory at batch_size={config.batch_size}; retry with "
                f"a smaller --batch-size"
            ) from exc
        raise
    return vectors


def write_embedding_file(path, model_name, pooling, ids, vectors):
    dim = len(vectors[0])
    lines = [json.dumps({"model": model_name, "dim": dim, "pooling": pooling},
                        sort_keys=True)]
    for doc_id, vec in zip(ids, vectors):
        lines.append(json.dumps({"id": doc_id, "vec": vec}, sort_keys=True))
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return dim


def export_embeddings(corpus_path, config: ExporterConfig, output_path,
                      corpus_format="tsv", encoder=None, tokenizer=None):
    """Embed every corpus document and write the interchange file.

    A fine-tuned encoder/tokenizer pair may be passed in; otherwise the
    checkpoint is loaded fresh. Returns (dim, number of records).
    """
    rows = load_corpus(corpus_path, fmt=corpus_format)
    if encoder is None or tokenizer is None:
        tokenizer, model = load_checkpoint(config)
        encoder = getattr(model, "base_model", model)
    ids = [doc_id for doc_id, _, _ in rows]
    texts = [text for _, text, _ in rows]
    vectors = _encode_batches(texts, tokenizer, encoder, config)
    dim = write_embedding_file(output_path, config.checkpoint, config.pooling,
                               ids, vectors)
    return dim, len(ids)
