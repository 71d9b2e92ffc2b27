"""Category lexicons: the word/phrase/prefix dictionaries behind each
lexicon-backed linguistic feature.

File format: one entry per line, ``#`` starts a comment line, a trailing
``*`` marks a prefix entry (stem length >= 2), internal spaces mark a
multiword phrase. Entries must be lowercase and unique.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

# The 15 lexicon-backed categories, in feature order. The structural
# features (wps, exclam, qmark) need no lexicon.
LEXICAL_CATEGORIES = (
    "feeling",
    "assent",
    "perception",
    "discrep",
    "certitude",
    "cause",
    "space",
    "auditory",
    "allnone",
    "motion",
    "tone_neg",
    "swear",
    "tone_pos",
    "netspeak",
    "conversation",
)


class LexiconError(ValueError):
    """Raised for missing or malformed lexicon files."""


@dataclass(frozen=True)
class CategoryLexicon:
    """Entries for one category, split by kind for matching."""

    name: str
    words: frozenset[str]
    phrases: tuple[tuple[str, ...], ...]  # longest first, then lexicographic
    prefixes: tuple[str, ...]

    def __len__(self):
        return len(self.words) + len(self.phrases) + len(self.prefixes)

    def matches_word(self, token: str) -> bool:
        if token in self.words:
            return True
        return any(token.startswith(stem) for stem in self.prefixes)


def parse_lexicon(lines, name, source="<memory>"):
    """Parse entry lines into a CategoryLexicon, validating as it goes."""
    words: set[str] = set()
    phrases: set[tuple[str, ...]] = set()
    prefixes: set[str] = set()
    seen: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        entry = raw.strip()
        if not entry or entry.startswith("#"):
            continue
        if entry != entry.lower():
            raise LexiconError(f"{source}:{line_no}: entry not lowercase: {entry!r}")
        if entry in seen:
            raise LexiconError(f"{source}:{line_no}: duplicate entry: {entry!r}")
        seen.add(entry)
        if entry.endswith("*"):
            stem = entry[:-1]
            if len(stem) < 2:
                raise LexiconError(f"{source}:{line_no}: prefix stem too short: {entry!r}")
            if " " in stem:
                raise LexiconError(f"{source}:{line_no}: prefix entries cannot be phrases: {entry!r}")
            prefixes.add(stem)
        elif " " in entry:
            parts = tuple(entry.split())
            if len(parts) < 2:
                raise LexiconError(f"{source}:{line_no}: malformed phrase: {entry!r}")
            phrases.add(parts)
        else:
            words.add(entry)
    ordered_phrases = tuple(sorted(phrases, key=lambda p: (-len(p), p)))
    return CategoryLexicon(
        name=name,
        words=frozenset(words),
        phrases=ordered_phrases,
        prefixes=tuple(sorted(prefixes)),
    )


def load_lexicon_file(path, name=None):
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        return parse_lexicon(handle, name or path.stem, source=str(path))


def load_lexicons(directory):
    """Load one <category>.txt per lexical category from ``directory``.

    A missing category file is an error naming the category. Iteration
    order over categories is lexicographic for determinism.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise LexiconError(f"lexicon directory not found: {directory}")
    lexicons = {}
    missing = []
    for name in sorted(LEXICAL_CATEGORIES):
        path = directory / f"{name}.txt"
        if not path.is_file():
            missing.append(name)
            continue
        lexicons[name] = load_lexicon_file(path, name)
    if missing:
        raise LexiconError(f"missing lexicon files in {directory}: {', '.join(missing)}")
    return lexicons


def bundled_lexicon_dir():
    """Directory of the substitute lexicons shipped with the package."""
    return Path(resources.files("newslex")) / "data" / "lexicons"


def load_bundled_lexicons():
    return load_lexicons(bundled_lexicon_dir())
