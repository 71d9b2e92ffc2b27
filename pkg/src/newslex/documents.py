"""Corpus documents and delimited-file I/O.

A corpus is a UTF-8 delimited file (TSV by default, CSV selectable) with
columns ``id``, ``text`` and ``label``. Labels are "fake"/"real"
(case-insensitive) or blank for unlabeled rows.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field


class CorpusError(ValueError):
    """Raised for malformed corpus files or documents."""


@dataclass(frozen=True)
class RawDocument:
    """One unprocessed document. ``label`` is True for fake news."""

    id: str
    text: str
    label: bool | None = None


@dataclass(frozen=True)
class CleanDocument:
    """Preprocessed document: rewritten text plus placeholder statistics.

    ``placeholder_counts`` maps each placeholder kind (URL, MENTION,
    HASHTAG, COVID, EMOJI) to the number of times its token occurs in
    ``text``. ``unknown_emoji`` counts emoji-like codepoints that had no
    name table entry (a warning, not an error).
    """

    id: str
    text: str
    placeholder_counts: dict[str, int] = field(default_factory=dict)
    label: bool | None = None
    unknown_emoji: int = 0


def parse_label(raw, row=None):
    """Map "fake"/"real" (case-insensitive) to True/False; blank to None."""
    value = (raw or "").strip().lower()
    if value == "":
        return None
    if value == "fake":
        return True
    if value == "real":
        return False
    where = f" (row {row})" if row is not None else ""
    raise CorpusError(f"unknown label {raw!r}{where}: expected 'real' or 'fake'")


def format_label(label):
    if label is None:
        return ""
    return "fake" if label else "real"


_DELIMITERS = {"tsv": "\t", "csv": ","}


def _delimiter(fmt):
    try:
        return _DELIMITERS[fmt]
    except KeyError:
        raise CorpusError(f"unknown corpus format {fmt!r}: expected 'tsv' or 'csv'") from None


def read_corpus(path, fmt="tsv", require_labels=False):
    """Read a corpus file into RawDocuments.

    Validates: header contains id/text/label columns, ids non-empty and
    unique, labels parseable. Errors carry row numbers.
    """
    delim = _delimiter(fmt)
    docs = []
    seen = set()
    try:
        handle = open(path, encoding="utf-8", errors="strict", newline="")
    except FileNotFoundError:
        raise CorpusError(f"corpus file not found: {path}") from None
    with handle:
        try:
            reader = csv.DictReader(handle, delimiter=delim)
            if reader.fieldnames is None:
                raise CorpusError(f"empty corpus file: {path}")
            missing = {"id", "text", "label"} - set(reader.fieldnames)
            if missing:
                raise CorpusError(
                    f"{path}: row 1: missing columns {sorted(missing)} "
                    f"(found {reader.fieldnames}); wrong --in-format?"
                )
            for row_no, row in enumerate(reader, start=2):
                doc_id = (row.get("id") or "").strip()
                if not doc_id:
                    raise CorpusError(f"{path}: empty document id (row {row_no})")
                if doc_id in seen:
                    raise CorpusError(f"{path}: duplicate document id {doc_id!r} (row {row_no})")
                seen.add(doc_id)
                text = row.get("text")
                if text is None:
                    raise CorpusError(f"{path}: malformed row {row_no}: no text field")
                label = parse_label(row.get("label"), row=row_no)
                if require_labels and label is None:
                    raise CorpusError(f"{path}: unlabeled document {doc_id!r} (row {row_no})")
                docs.append(RawDocument(id=doc_id, text=text, label=label))
        except UnicodeDecodeError as exc:
            raise CorpusError(f"{path}: invalid UTF-8: {exc}") from exc
    if not docs:
        raise CorpusError(f"empty corpus file: {path}")
    return docs


def write_corpus(docs, path, fmt="tsv"):
    """Write documents (Raw or Clean) as an id/text/label delimited file."""
    delim = _delimiter(fmt)
    write_text_atomic(path, _render_corpus(docs, delim))


def _render_corpus(docs, delim):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delim, lineterminator="\n")
    writer.writerow(["id", "text", "label"])
    for doc in docs:
        writer.writerow([doc.id, doc.text, format_label(doc.label)])
    return buf.getvalue()


def write_text_atomic(path, data):
    """Write ``data`` to ``path`` via a temp file + rename in the same dir."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as handle:
        handle.write(data)
    os.replace(tmp, path)
