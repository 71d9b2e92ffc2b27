"""Optional stage: fine-tune a classifier-headed checkpoint on the
labeled corpus, keep the best validation checkpoint, then export pooled
embeddings from the fine-tuned encoder."""

from __future__ import annotations

import copy
import json

import torch

from .config import ExporterConfig, ExporterError
from .corpus import load_corpus
from .export import export_embeddings, load_checkpoint


def _split_rows(rows, split_file, seed):
    labeled = [(i, t, l) for i, t, l in rows if l is not None]
    if len(labeled) < 4:
        raise ExporterError("fine-tuning needs at least 4 labeled documents")
    if split_file:
        with open(split_file, encoding="utf-8") as handle:
            parts = json.load(handle)
        train_ids = set(parts["train"])
        val_ids = set(parts["validation"])
        train = [r for r in labeled if r[0] in train_ids]
        val = [r for r in labeled if r[0] in val_ids]
        if not train or not val:
            raise ExporterError("split file selects an empty train or validation set")
        return train, val
    order = torch.randperm(
        len(labeled), generator=torch.Generator().manual_seed(seed)
    ).tolist()
    cut = max(1, int(0.8 * len(labeled)))
    if cut == len(labeled):
        cut -= 1
    train = [labeled[i] for i in order[:cut]]
    val = [labeled[i] for i in order[cut:]]
    return train, val


def _batches(rows, batch_size):
    for start in range(0, len(rows), batch_size):
        yield rows[start : start + batch_size]


@torch.no_grad()
def _val_error(model, tokenizer, rows, config):
    model.eval()
    wrong = 0
    for batch in _batches(rows, config.batch_size):
        enc = tokenizer(
            [t for _, t, _ in batch],
            padding=True, truncation=True, max_length=config.max_length,
            return_tensors="pt",
        ).to(config.device)
        logits = model(**enc).logits
        pred = logits.argmax(dim=-1).tolist()
        wrong += sum(int(p != int(l)) for p, (_, _, l) in zip(pred, batch))
    return wrong / len(rows)


def finetune_then_export(corpus_path, config: ExporterConfig, output_path,
                         epochs=10, validate_every=600, lr=2e-5,
                         patience=10, seed=0, split_file=None,
                         corpus_format="tsv"):
    """Fine-tune for up to ``epochs`` with early stopping on validation
    error (checked every ``validate_every`` optimizer steps and at the
    end), restore the best checkpoint, then export embeddings from its
    encoder. Returns (dim, n_records, best validation error)."""
    if epochs < 1:
        raise ExporterError("fine-tuning needs at least 1 epoch")
    rows = load_corpus(corpus_path, fmt=corpus_format)
    train, val = _split_rows(rows, split_file, seed)
    torch.manual_seed(seed)  # head init and shuffling
    tokenizer, model = load_checkpoint(config, with_classifier_head=True)
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr)

    best_error = float("inf")
    best_state = copy.deepcopy(model.state_dict())
    stale = 0
    step = 0
    stop = False
    generator = torch.Generator().manual_seed(seed + 1)

    def validate():
        nonlocal best_error, best_state, stale
        err = _val_error(model, tokenizer, val, config)
        if err < best_error:
            best_error = err
            best_state = copy.deepcopy(model.state_dict())
            stale = 0
        else:
            stale += 1
        return stale >= patience

    for _ in range(epochs):
        order = torch.randperm(len(train), generator=generator).tolist()
        model.train()
        for batch_idx in _batches(order, config.batch_size):
            batch = [train[i] for i in batch_idx]
            enc = tokenizer(
                [t for _, t, _ in batch],
                padding=True, truncation=True, max_length=config.max_length,
                return_tensors="pt",
            ).to(config.device)
            labels = torch.tensor([int(l) for _, _, l in batch],
                                  device=config.device)
            loss = model(**enc, labels=labels).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step += 1
            if validate_every and step % validate_every == 0:
                if validate():
                    stop = True
                    break
            model.train()
        if stop:
            break
    if not stop:
        validate()
    model.load_state_dict(best_state)

    encoder = model.base_model
    dim, count = export_embeddings(
        corpus_path, config, output_path,
        corpus_format=corpus_format, encoder=encoder, tokenizer=tokenizer,
    )
    return dim, count, best_error
