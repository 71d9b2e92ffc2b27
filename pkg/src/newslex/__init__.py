"""newslex: lexicon-based linguistic features, interpretable detectors
and embedding fusion for fake-news classification."""

from .documents import CleanDocument, CorpusError, RawDocument, read_corpus, write_corpus
from .features import (
    FEATURE_INDEX,
    FEATURE_NAMES,
    FeatureTable,
    LexiconFeatureExtractor,
    extract_features,
    read_features_csv,
    split_sentences,
    tokenize_words,
    write_features_csv,
)
from .lexicons import (
    LEXICAL_CATEGORIES,
    CategoryLexicon,
    LexiconError,
    bundled_lexicon_dir,
    load_bundled_lexicons,
    load_lexicons,
)
from .normalize import EPSILON, FeatureNormalizer
from .textprep import (
    RewriteRules,
    TextPreprocessor,
    preprocess,
    preprocess_corpus,
    rewrite_special,
    textualize_emoji,
    uncase,
)

__version__ = "0.1.0"
