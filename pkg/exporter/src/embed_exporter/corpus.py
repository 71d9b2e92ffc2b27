"""Minimal reader for the corpus interchange format.

Delimited UTF-8 file with columns ``id``, ``text``, ``label``
("real"/"fake"/blank). The exporter consumes the detection pipeline only
through this file format and the embedding JSONL it emits, so the reader
is implemented here independently.
"""

from __future__ import annotations

import csv

from .config import ExporterError

_DELIMITERS = {"tsv": "\t", "csv": ","}


def load_corpus(path, fmt="tsv"):
    """Returns a list of (id, text, label) with label in {True, False, None}."""
    try:
        delim = _DELIMITERS[fmt]
    except KeyError:
        raise ExporterError(f"unknown corpus format {fmt!r}") from None
    rows = []
    seen = set()
    try:
        handle = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise ExporterError(f"corpus file not found: {path}") from None
    with handle:
        reader = csv.DictReader(handle, delimiter=delim)
        if reader.fieldnames is None or {"id", "text"} - set(reader.fieldnames):
            raise ExporterError(f"{path}: expected id/text/label columns")
        for row_no, row in enumerate(reader, start=2):
            doc_id = (row.get("id") or "").strip()
            if not doc_id:
                raise ExporterError(f"{path}: row {row_no}: empty id")
            if doc_id in seen:
                raise ExporterError(f"{path}: row {row_no}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            raw_label = (row.get("label") or "").strip().lower()
            if raw_label == "":
                label = None
            elif raw_label in ("fake", "real"):
                label = raw_label == "fake"
            else:
                raise ExporterError(f"{path}: row {row_no}: unknown label {raw_label!r}")
            rows.append((doc_id, row.get("text") or "", label))
    if not rows:
        raise ExporterError(f"empty corpus: {path}")
    return rows
