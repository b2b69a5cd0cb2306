"""Text-to-feature chain: username removal, down-casing/tokenizing,
suffix stemming, stop-word removal, short-token removal, and Boolean
word-presence vectorization over a training-derived vocabulary.

The stage order is fixed: stemming runs before stop-word removal, and
the stop-word list itself is stemmed at load so surface-form lists
still work.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import read_wordlist
from .errors import EmptyVocabulary

# Single-pass German suffix rules, longest first.
DEFAULT_SUFFIX_RULES = ("ern", "em", "en", "er", "es", "e", "s")

_DATA_DIR = Path(__file__).parent / "data"
DEFAULT_STOPWORD_FILE = _DATA_DIR / "stopwords_de.txt"
DEFAULT_SUFFIX_FILE = _DATA_DIR / "suffixes_de.txt"
DEFAULT_KEYWORD_FILE = _DATA_DIR / "keywords.txt"

# Maximal runs of alphanumeric characters; underscore is a separator.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class PreprocessConfig:
    """Immutable preprocessing parameters.

    stopwords must already be stemmed; build instances through
    PreprocessConfig.create or .load so that holds by construction.
    """

    stopwords: frozenset[str] = frozenset()
    suffix_rules: tuple[str, ...] = DEFAULT_SUFFIX_RULES
    min_token_len: int = 2
    min_stem_len: int = 3

    def __post_init__(self) -> None:
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        if len(set(self.suffix_rules)) != len(self.suffix_rules):
            raise ValueError("suffix rules must be duplicate-free")

    @classmethod
    def create(
        cls,
        stopwords: Iterable[str] = (),
        suffix_rules: Sequence[str] = DEFAULT_SUFFIX_RULES,
        min_token_len: int = 2,
        min_stem_len: int = 3,
    ) -> "PreprocessConfig":
        """Build a config from surface-form stopwords (stemmed here)."""
        base = cls(
            stopwords=frozenset(),
            suffix_rules=tuple(suffix_rules),
            min_token_len=min_token_len,
            min_stem_len=min_stem_len,
        )
        stemmed = frozenset(stem(w.casefold(), base) for w in stopwords)
        return cls(
            stopwords=stemmed,
            suffix_rules=base.suffix_rules,
            min_token_len=min_token_len,
            min_stem_len=min_stem_len,
        )

    @classmethod
    def load(
        cls,
        stopword_file: str | Path = DEFAULT_STOPWORD_FILE,
        suffix_file: str | Path = DEFAULT_SUFFIX_FILE,
        min_token_len: int = 2,
        min_stem_len: int = 3,
    ) -> "PreprocessConfig":
        """Load stopword and suffix-rule files (one entry per line)."""
        return cls.create(
            stopwords=read_wordlist(stopword_file),
            suffix_rules=read_wordlist(suffix_file),
            min_token_len=min_token_len,
            min_stem_len=min_stem_len,
        )


def default_config() -> PreprocessConfig:
    """Config backed by the bundled German word lists."""
    return PreprocessConfig.load()


def strip_usernames(text: str) -> str:
    """Remove every whitespace-delimited token beginning with '@'."""
    return " ".join(tok for tok in text.split() if not tok.startswith("@"))


def tokenize(text: str) -> list[str]:
    """Case-fold, then split on maximal runs of non-alphanumerics."""
    return _TOKEN_RE.findall(text.casefold())


def stem(token: str, cfg: PreprocessConfig) -> str:
    """Strip the longest matching suffix rule, single pass.

    The strip only happens when the remainder keeps at least
    cfg.min_stem_len characters; otherwise the token stays unchanged.
    """
    best = ""
    for suffix in cfg.suffix_rules:
        if len(suffix) > len(best) and token.endswith(suffix):
            best = suffix
    if best and len(token) - len(best) >= cfg.min_stem_len:
        return token[: -len(best)]
    return token


def preprocess(text: str, cfg: PreprocessConfig) -> list[str]:
    """Full chain; duplicates are retained (vectorization collapses them)."""
    tokens = tokenize(strip_usernames(text))
    stems = [stem(tok, cfg) for tok in tokens]
    kept = [s for s in stems if s not in cfg.stopwords]
    return [s for s in kept if len(s) >= cfg.min_token_len]


@dataclass(frozen=True)
class Vocabulary:
    """Sorted unique term list with its inverse index."""

    terms: tuple[str, ...]
    index: dict[str, int] = field(compare=False)

    @classmethod
    def from_terms(cls, terms: Iterable[str]) -> "Vocabulary":
        ordered = tuple(sorted(set(terms)))
        return cls(terms=ordered, index={t: i for i, t in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.terms)


def build_vocabulary(token_lists: Iterable[Sequence[str]]) -> Vocabulary:
    """Sorted unique tokens of the training records, order-independent.

    Build it from training records only; test-only terms must never
    enter the index.
    """
    terms: set[str] = set()
    for tokens in token_lists:
        terms.update(tokens)
    if not terms:
        raise EmptyVocabulary("no tokens in any training record")
    return Vocabulary.from_terms(terms)


@dataclass(eq=False)
class FeatureVector:
    """Boolean word-presence bits over one vocabulary.

    bits is a uint8 0/1 array whose length equals the vocabulary size
    it was built against. label and instance_id are optional carry-along
    metadata used by training.
    """

    bits: np.ndarray
    label: str | None = None
    instance_id: str | None = None

    def __len__(self) -> int:
        return int(self.bits.shape[0])


def vectorize(tokens: Iterable[str], vocab: Vocabulary) -> FeatureVector:
    """Presence bits for the vocabulary; out-of-vocabulary tokens are
    ignored (unseen test words contribute nothing)."""
    bits = np.zeros(len(vocab), dtype=np.uint8)
    index = vocab.index
    for tok in tokens:
        pos = index.get(tok)
        if pos is not None:
            bits[pos] = 1
    return FeatureVector(bits=bits)
