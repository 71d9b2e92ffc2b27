"""Deterministic three-stage preprocessing of raw social-media text.

Stage 1 lowercases, stage 2 rewrites URLs / @mentions / #hashtags /
covid terms to bracketed placeholder tokens, stage 3 replaces each emoji
sequence by its textual name wrapped between two [EMOJI] tokens. The
composition is idempotent: placeholder tokens are never re-rewritten.
"""

from __future__ import annotations

import json
import re
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from sklearn.base import BaseEstimator, TransformerMixin

from .documents import CleanDocument, RawDocument

PLACEHOLDER_KINDS = ("URL", "MENTION", "HASHTAG", "COVID", "EMOJI")

DEFAULT_URL_PATTERN = r"https?://\S+|\b(?:[a-z0-9-]+\.)+[a-z]{2,}/\S*"
DEFAULT_MENTION_PATTERN = r"@\w+"
DEFAULT_HASHTAG_PATTERN = r"#\w+"
DEFAULT_COVID_TERMS = ("covid", "covid19", "covid-19", "coronavirus", "sars-cov-2", "ncov")

_PLACEHOLDER_RE = re.compile(r"\[(?:URL|MENTION|HASHTAG|COVID|EMOJI)\]")


class RewriteError(ValueError):
    """Raised for invalid rewrite rule definitions."""


@dataclass(frozen=True)
class RewriteRules:
    """Match specifications for the special-token rewrite stage."""

    url_pattern: str = DEFAULT_URL_PATTERN
    mention_pattern: str = DEFAULT_MENTION_PATTERN
    hashtag_pattern: str = DEFAULT_HASHTAG_PATTERN
    covid_terms: tuple[str, ...] = DEFAULT_COVID_TERMS

    def __post_init__(self):
        for term in self.covid_terms:
            if not term or term != term.lower():
                raise RewriteError(f"covid terms must be non-empty and lowercase: {term!r}")
        for name in ("url_pattern", "mention_pattern", "hashtag_pattern"):
            pattern = getattr(self, name)
            try:
                compiled = re.compile(pattern)
            except re.error as exc:
                raise RewriteError(f"invalid {name}: {exc}") from exc
            if compiled.match(""):
                raise RewriteError(f"{name} matches the empty string")

    @classmethod
    def from_json(cls, path):
        """Load rules from a JSON file with keys url_pattern, mention_pattern,
        hashtag_pattern, covid_terms. Missing keys fall back to defaults."""
        with open(path, encoding="utf-8") as handle:
            raw = json.load(handle)
        kwargs = {}
        for key in ("url_pattern", "mention_pattern", "hashtag_pattern"):
            if key in raw:
                kwargs[key] = raw[key]
        if "covid_terms" in raw:
            kwargs["covid_terms"] = tuple(raw["covid_terms"])
        return cls(**kwargs)

    def _compiled(self):
        # Longest covid term first so "covid-19" wins over "covid".
        covid = r"\b(?:%s)\b" % "|".join(
            re.escape(t) for t in sorted(self.covid_terms, key=len, reverse=True)
        )
        return (
            ("URL", re.compile(self.url_pattern)),
            ("MENTION", re.compile(self.mention_pattern)),
            ("HASHTAG", re.compile(self.hashtag_pattern)),
            ("COVID", re.compile(covid)),
        )


def uncase(text: str) -> str:
    """Unicode-lowercase a string."""
    return text.lower()


def _uncase_preserving_placeholders(text: str) -> str:
    # Placeholder tokens stay uppercase so a second pass never re-rewrites
    # e.g. "[covid]". Equal to uncase() on placeholder-free input.
    parts = _PLACEHOLDER_RE.split(text)
    tokens = _PLACEHOLDER_RE.findall(text)
    out = [parts[0].lower()]
    for token, part in zip(tokens, parts[1:]):
        out.append(token)
        out.append(part.lower())
    return "".join(out)


def rewrite_special(text: str, rules: RewriteRules | None = None):
    """Rewrite URLs, mentions, hashtags, then covid terms to placeholders.

    Expects uncased text. Returns (rewritten text, substitutions per kind).
    """
    rules = rules or RewriteRules()
    counts = {kind: 0 for kind in PLACEHOLDER_KINDS}
    for kind, pattern in rules._compiled():
        text, n = pattern.subn(f"[{kind}]", text)
        counts[kind] = n
    return text, counts


# Emoji blocks that trigger textualization. Conservative on symbol ranges
# shared with ordinary prose (arrows, (c)/(r), etc. are left alone).
_EMOJI_CORE = (
    "\U0001F300-\U0001F5FF"  # misc symbols & pictographs
    "\U0001F600-\U0001F64F"  # emoticons
    "\U0001F680-\U0001F6FF"  # transport & map
    "\U0001F900-\U0001F9FF"  # supplemental symbols
    "\U0001FA70-\U0001FAFF"  # symbols extended-A
    "☀-⛿"          # misc symbols
    "✀-➿"          # dingbats
    "⬛-⭕"          # squares, star, circle
)
_REGIONAL = "\U0001F1E6-\U0001F1FF"
_TONE_NAMES = {
    0x1F3FB: "light skin tone",
    0x1F3FC: "medium light skin tone",
    0x1F3FD: "medium skin tone",
    0x1F3FE: "medium dark skin tone",
    0x1F3FF: "dark skin tone",
}
_JOINERS = {0x200D, 0xFE0F}

_EMOJI_SEQ_RE = re.compile(
    "(?:[%(core)s](?:[%(tones)s️⃣]|‍[%(core)s])*|[%(reg)s]+)"
    % {
        "core": _EMOJI_CORE,
        "tones": "".join(chr(c) for c in sorted(_TONE_NAMES)),
        "reg": _REGIONAL,
    }
)


def _emoji_name(seq: str):
    """Name an emoji codepoint sequence; returns (name, is_unknown)."""
    first = ord(seq[0])
    if 0x1F1E6 <= first <= 0x1F1FF:
        letters = "".join(chr(ord(ch) - 0x1F1E6 + ord("a")) for ch in seq)
        return "flag " + letters, False
    words = []
    unknown = False
    for ch in seq:
        cp = ord(ch)
        if cp in _JOINERS or cp == 0x20E3:
            continue
        if cp in _TONE_NAMES:
            words.append(_TONE_NAMES[cp])
            continue
        try:
            name = unicodedata.name(ch)
        except ValueError:
            unknown = True
            continue
        words.append(name.lower().replace("_", " ").replace("-", " "))
    if not words:
        return "unknown", True
    return " ".join(words), unknown


def _textualize(text: str):
    """Replace emoji sequences by "[EMOJI] <name> [EMOJI]" with single-space
    separation from surrounding text. Returns (text, n_replaced, n_unknown)."""
    matches = list(_EMOJI_SEQ_RE.finditer(text))
    if not matches:
        return text, 0, 0
    out = []
    last = 0
    unknown_total = 0
    pending_space = False
    for match in matches:
        segment = text[last : match.start()]
        if segment:
            if pending_space and not segment[0].isspace():
                out.append(" ")
            out.append(segment)
            pending_space = False
        name, unknown = _emoji_name(match.group())
        if unknown:
            name = "unknown"
            unknown_total += 1
        if out and not out[-1].endswith((" ", "\t", "\n")):
            out.append(" ")
        out.append(f"[EMOJI] {name} [EMOJI]")
        pending_space = True
        last = match.end()
    tail = text[last:]
    if tail:
        if pending_space and not tail[0].isspace():
            out.append(" ")
        out.append(tail)
    return "".join(out), len(matches), unknown_total


def textualize_emoji(text: str) -> str:
    """Replace each emoji sequence by its lowercased name wrapped between
    two [EMOJI] tokens. Unknown emoji-like codepoints become "unknown"."""
    return _textualize(text)[0]


def preprocess(doc: RawDocument, rules: RewriteRules | None = None) -> CleanDocument:
    """Uncase, rewrite special tokens, then textualize emoji. Idempotent."""
    lowered = _uncase_preserving_placeholders(doc.text)
    rewritten, _ = rewrite_special(lowered, rules)
    text, _, unknown = _textualize(rewritten)
    counts = {kind: text.count(f"[{kind}]") for kind in PLACEHOLDER_KINDS}
    return CleanDocument(
        id=doc.id,
        text=text,
        placeholder_counts=counts,
        label=doc.label,
        unknown_emoji=unknown,
    )


def preprocess_corpus(docs, rules=None, threads=None):
    """Preprocess documents, optionally in parallel. Output order and
    content are independent of the thread count."""
    rules = rules or RewriteRules()
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda d: preprocess(d, rules), docs))
    return [preprocess(doc, rules) for doc in docs]


class TextPreprocessor(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper: transform(RawDocuments) -> CleanDocuments."""

    def __init__(self, rules=None, threads=None):
        self.rules = rules
        self.threads = threads

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return preprocess_corpus(X, rules=self.rules, threads=self.threads)
