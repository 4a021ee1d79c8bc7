"""Text analysis pipeline: tokenization, stemming, decompounding, noun gating.

Turns raw requirement or taxonomy text into stemmed noun occurrences. The
default noun-identification strategy is vocabulary gating: a token (or any
of its compound parts) counts as a noun exactly when its stem resolves into
the supplied vocabulary, which is the union of taxonomy-index stems and the
embedding vocabulary. A pluggable tagger callable can replace the gate when
a real part-of-speech model is available.

All operations are pure and deterministic; the module keeps no state.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal, Optional, Sequence

_TOKEN_RE = re.compile(r"[^\W\d_]+")  # letter runs only; digits and _ break tokens

# Suffix stripping never reduces a stem below this many characters.
_MIN_STEM = 3

# Deletion-only noun suffixes per language, longest first. Deletion-only keeps
# stems prefix-compatible with their tokens.
_SV_SUFFIXES = (
    "arnas", "ernas", "ornas",
    "arna", "erna", "orna",
    "ens", "ets",
    "ar", "er", "or", "en", "et",
    "s",
)

Tagger = Callable[[Sequence[str]], Sequence[bool]]


class AnalyzerError(ValueError):
    """Invalid analyzer configuration or input."""


@dataclass(frozen=True)
class AnalyzerConfig:
    """Configuration for the analysis pipeline.

    ``stemmer`` selects the identity stemmer (case folding only) or a
    deletion-only suffix stripper for ``language``. ``linking_morphemes``
    lists morphemes that may be consumed between compound parts.
    """

    language: str = "sv"
    stemmer: Literal["identity", "suffix"] = "suffix"
    stopwords: tuple[str, ...] = ()
    noun_strategy: Literal["vocabulary", "tagger"] = "vocabulary"
    decompound: bool = True
    min_token_length: int = 2
    linking_morphemes: tuple[str, ...] = ("s",)

    def __post_init__(self):
        if self.min_token_length < 1:
            raise AnalyzerError("min_token_length must be >= 1")
        if self.stemmer not in ("identity", "suffix"):
            raise AnalyzerError(f"unknown stemmer: {self.stemmer!r}")
        if self.noun_strategy not in ("vocabulary", "tagger"):
            raise AnalyzerError(f"unknown noun strategy: {self.noun_strategy!r}")
        if any(not w for w in self.stopwords):
            raise AnalyzerError("stopword list contains an empty string")
        if any(not m for m in self.linking_morphemes):
            raise AnalyzerError("linking morpheme list contains an empty string")
        object.__setattr__(self, "stopwords", tuple(self.stopwords))
        object.__setattr__(self, "linking_morphemes", tuple(self.linking_morphemes))

    def to_dict(self) -> dict:
        return {
            "language": self.language,
            "stemmer": self.stemmer,
            "stopwords": list(self.stopwords),
            "noun_strategy": self.noun_strategy,
            "decompound": self.decompound,
            "min_token_length": self.min_token_length,
            "linking_morphemes": list(self.linking_morphemes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AnalyzerConfig":
        kwargs = dict(data)
        for key in ("stopwords", "linking_morphemes"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "AnalyzerConfig":
        return cls.from_dict(json.loads(text))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


def load_stopwords(path: str | Path) -> tuple[str, ...]:
    """Read a one-word-per-line UTF-8 stopword file; blank lines are skipped."""
    words = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            words.append(word)
    return tuple(words)


@dataclass(frozen=True)
class CompoundPart:
    surface: str
    stem: str


@dataclass(frozen=True)
class NounOccurrence:
    """A noun found in text.

    ``surface`` is the exact slice ``text[start:end]``. For a decompounded
    token, one occurrence is emitted per matching part: it spans the whole
    token, carries the part's stem, and ``parts`` lists the full split (so
    concatenating part surfaces, reinserting at most one linking morpheme
    per junction, reproduces the surface).
    """

    surface: str
    start: int
    end: int
    stem: str
    parts: tuple[CompoundPart, ...] = ()
    source: Literal["whole-token", "compound-part"] = "whole-token"


def _language_key(tag: str) -> str:
    return tag.split("-")[0].split("_")[0].casefold()


def _strip_suffixes_en(word: str) -> str:
    while True:
        if word.endswith("sses") and len(word) - 2 >= _MIN_STEM:
            word = word[:-2]
        elif word.endswith(("ies", "ss", "us")):
            return word
        elif word.endswith("s") and len(word) - 1 >= _MIN_STEM:
            word = word[:-1]
        else:
            return word


def _strip_suffixes_sv(word: str) -> str:
    changed = True
    while changed:
        changed = False
        for suffix in _SV_SUFFIXES:
            if word.endswith(suffix) and len(word) - len(suffix) >= _MIN_STEM:
                word = word[: -len(suffix)]
                changed = True
                break
    return word


_SUFFIX_STRIPPERS = {"en": _strip_suffixes_en, "sv": _strip_suffixes_sv}


def stem(token: str, config: AnalyzerConfig) -> str:
    """Stem one token: case-fold, then (optionally) strip suffixes to a fixpoint.

    Deterministic and idempotent; the result is a prefix of the case-folded
    token. Length filtering is the analyzer's job, not the stemmer's.
    """
    if not token:
        raise AnalyzerError("cannot stem an empty token")
    folded = token.casefold()
    if config.stemmer == "identity":
        return folded
    stripper = _SUFFIX_STRIPPERS.get(_language_key(config.language))
    if stripper is None:
        return folded
    return stripper(folded)


def decompound(token: str, vocabulary: set[str] | frozenset[str], config: AnalyzerConfig) -> list[str]:
    """Split a compound token into two or more vocabulary parts.

    A split is valid when every part is at least ``min_token_length`` long
    and its stem is in ``vocabulary``; at most one linking morpheme may be
    consumed between consecutive parts. Among valid splits the one with the
    fewest parts wins, then the longest first part (applied recursively).
    Returns ``[token]`` when no valid split exists; the token being in the
    vocabulary itself does not prevent a split. Parts are returned as
    slices of the original token, so original casing is preserved.
    """
    if not token:
        raise AnalyzerError("cannot decompound an empty token")
    n = len(token)
    min_len = config.min_token_length
    morphemes = tuple(m.casefold() for m in config.linking_morphemes)
    memo: dict[int, Optional[tuple[int, tuple[str, ...]]]] = {}

    def continuations(j: int) -> list[int]:
        starts = [j]
        for m in morphemes:
            k = j + len(m)
            if k < n and token[j:k].casefold() == m:
                starts.append(k)
        return starts

    def best(i: int) -> Optional[tuple[int, tuple[str, ...]]]:
        """Best split of token[i:], allowing a single part."""
        if i in memo:
            return memo[i]
        winner: Optional[tuple[int, tuple[str, ...]]] = None
        winner_key = None
        for j in range(n, i + min_len - 1, -1):
            part = token[i:j]
            if len(part) < min_len or stem(part, config) not in vocabulary:
                continue
            if j == n:
                candidates = [(1, (part,))]
            else:
                candidates = []
                for k in continuations(j):
                    sub = best(k)
                    if sub is not None:
                        candidates.append((1 + sub[0], (part,) + sub[1]))
            for count, parts in candidates:
                key = (count, tuple(-len(p) for p in parts), parts)
                if winner is None or key < winner_key:
                    winner = (count, parts)
                    winner_key = key
        memo[i] = winner
        return winner

    winner: Optional[tuple[int, tuple[str, ...]]] = None
    winner_key = None
    for j in range(n - 1, min_len - 1, -1):  # the first part is a proper prefix
        part = token[:j]
        if len(part) < min_len or stem(part, config) not in vocabulary:
            continue
        for k in continuations(j):
            sub = best(k)
            if sub is None:
                continue
            parts = (part,) + sub[1]
            count = 1 + sub[0]
            key = (count, tuple(-len(p) for p in parts), parts)
            if winner is None or key < winner_key:
                winner = (count, parts)
                winner_key = key
    if winner is None:
        return [token]
    return list(winner[1])


def analyze(
    text: str,
    config: AnalyzerConfig,
    vocabulary: set[str] | frozenset[str] | None = None,
    tagger: Tagger | None = None,
) -> list[NounOccurrence]:
    """Extract noun occurrences from text, in document order.

    With the default vocabulary strategy a token (or any of its compound
    parts) is emitted iff its stem is in ``vocabulary`` and not a stopword;
    a compound whose own stem gates in yields the whole-token occurrence
    first, then one occurrence per gated part. ``vocabulary=None`` disables
    the gate (used when harvesting index terms) and with it decompounding,
    which needs a vocabulary to validate parts. With the tagger strategy,
    tagged tokens are emitted and likewise decompounded.
    """
    if config.noun_strategy == "tagger" and tagger is None:
        raise AnalyzerError("noun_strategy 'tagger' requires a tagger callable")
    matches = list(_TOKEN_RE.finditer(text))
    flags: Sequence[bool] | None = None
    if config.noun_strategy == "tagger":
        flags = list(tagger([m.group() for m in matches]))
        if len(flags) != len(matches):
            raise AnalyzerError("tagger returned a flag list of the wrong length")

    stopset = frozenset(w.casefold() for w in config.stopwords)
    occurrences: list[NounOccurrence] = []
    for i, m in enumerate(matches):
        surface = m.group()
        if len(surface) < config.min_token_length:
            continue
        if surface.casefold() in stopset:
            continue
        if flags is not None and not flags[i]:
            continue
        token_stem = stem(surface, config)
        if token_stem in stopset:
            continue

        split = (
            decompound(surface, vocabulary, config)
            if config.decompound and vocabulary is not None
            else [surface]
        )
        parts = (
            tuple(CompoundPart(p, stem(p, config)) for p in split) if len(split) > 1 else ()
        )
        if flags is not None:
            whole_is_noun = True  # the tagger already said so
        else:
            whole_is_noun = vocabulary is None or token_stem in vocabulary
        if whole_is_noun:
            occurrences.append(
                NounOccurrence(surface, m.start(), m.end(), token_stem, parts, "whole-token")
            )
        for part in parts:
            if part.stem in stopset or part.surface.casefold() in stopset:
                continue
            if vocabulary is not None and part.stem not in vocabulary:
                continue
            occurrences.append(
                NounOccurrence(surface, m.start(), m.end(), part.stem, parts, "compound-part")
            )
    return occurrences
