"""Suggestion engine: predictor scores, confidence ranking, feedback history.

Three predictors score a candidate association between a requirement noun
and a taxonomy object:

* exact match: ``1 / f_noun`` where ``f_noun`` is the number of taxonomy
  objects containing the noun; common nouns discriminate less.
* semantic similarity: a proxy word similar to the noun that occurs in the
  taxonomy scores ``cos / f_proxy`` (default mode). The literal mode
  ``1 / (f_proxy * cos)`` is kept for comparison; it can exceed 1 and is
  not used for ranking by default.
* history: past accepted associations, min-max scaled over the store and
  divided by ``f_noun``. A pair rejected at least ``rejection_threshold``
  times is suppressed and never ranked again.

Scores aggregate into a weighted confidence in [0, 1] (default: equal
weights, i.e. the arithmetic mean of the three slots, with absent
predictors contributing 0). Scoring is pure; the history store has a
single-writer contract and readers work from a snapshot.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Literal, Optional, Protocol

from .annotation_store import Requirement
from .embeddings import EmbeddingStore, top_k_proxies
from .taxonomy import NounIndex, lookup
from .textproc import AnalyzerConfig, NounOccurrence, Tagger, analyze


class RecommenderError(ValueError):
    """Invalid predictor input or configuration."""


class PersistenceError(RuntimeError):
    """The feedback event could not be durably appended."""


class _Suppressed:
    """Sentinel for a suggestion forced out by repeated rejections."""

    _instance: Optional["_Suppressed"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "SUPPRESSED"


SUPPRESSED = _Suppressed()


@dataclass(frozen=True)
class RecommenderConfig:
    k_proxies: int = 10
    rejection_threshold: int = 5
    similarity_mode: Literal["prose-consistent", "literal"] = "prose-consistent"
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    min_proxy_cosine: float = 0.0

    def __post_init__(self):
        if self.k_proxies < 1:
            raise RecommenderError("k_proxies must be >= 1")
        if self.rejection_threshold < 1:
            raise RecommenderError("rejection_threshold must be >= 1")
        if self.similarity_mode not in ("prose-consistent", "literal"):
            raise RecommenderError(f"unknown similarity mode {self.similarity_mode!r}")
        if len(self.weights) != 3 or any(w < 0 for w in self.weights):
            raise RecommenderError("weights must be three non-negative numbers")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise RecommenderError("weights must sum to 1")


@dataclass(frozen=True)
class FeedbackEvent:
    """One accept/reject decision on a (noun stem, object code) pair."""

    timestamp: float
    participant: str
    requirement_id: str
    stem: str
    code: str
    action: Literal["accept", "reject"]

    def __post_init__(self):
        if self.action not in ("accept", "reject"):
            raise RecommenderError(f"unknown feedback action {self.action!r}")

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "participant": self.participant,
            "requirement_id": self.requirement_id,
            "stem": self.stem,
            "code": self.code,
            "action": self.action,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FeedbackEvent":
        return cls(
            timestamp=float(data["timestamp"]),
            participant=str(data["participant"]),
            requirement_id=str(data["requirement_id"]),
            stem=str(data["stem"]),
            code=str(data["code"]),
            action=data["action"],
        )


class HistoryView(Protocol):
    def accepts(self, stem: str, code: str) -> int: ...
    def rejects(self, stem: str, code: str) -> int: ...
    def bounds(self) -> Optional[tuple[int, int]]: ...


@dataclass(frozen=True)
class HistorySnapshot:
    """Immutable point-in-time view of the accept/reject counts."""

    counts: dict[tuple[str, str], tuple[int, int]]

    def accepts(self, stem: str, code: str) -> int:
        return self.counts.get((stem, code), (0, 0))[0]

    def rejects(self, stem: str, code: str) -> int:
        return self.counts.get((stem, code), (0, 0))[1]

    def bounds(self) -> Optional[tuple[int, int]]:
        if not self.counts:
            return None
        values = [a for a, _ in self.counts.values()]
        return min(values), max(values)

    def pairs(self) -> Iterator[tuple[tuple[str, str], tuple[int, int]]]:
        return iter(self.counts.items())


class HistoryStore:
    """Accept/reject ledger per (noun stem, object code) pair.

    Counts only ever increase. When bound to a log path, every event is
    appended and flushed before the in-memory state changes; replaying the
    log reconstructs the store exactly. Mutations serialize through a lock
    (single-writer contract); ``snapshot`` gives readers a consistent view.
    """

    def __init__(self, log_path: str | Path | None = None):
        self._counts: dict[tuple[str, str], list[int]] = {}
        self._last_ts: dict[str, float] = {}
        self._lock = threading.Lock()
        self._log_path = Path(log_path) if log_path is not None else None

    def _validate(self, event: FeedbackEvent) -> None:
        last = self._last_ts.get(event.participant)
        if last is not None and event.timestamp < last:
            raise RecommenderError(
                f"timestamp went backwards for participant {event.participant!r}"
            )

    def _apply(self, event: FeedbackEvent) -> None:
        pair = self._counts.setdefault((event.stem, event.code), [0, 0])
        if event.action == "accept":
            pair[0] += 1
        else:
            pair[1] += 1
        self._last_ts[event.participant] = event.timestamp

    def record(self, event: FeedbackEvent) -> None:
        with self._lock:
            self._validate(event)
            if self._log_path is not None:
                line = json.dumps(event.to_dict(), ensure_ascii=False)
                try:
                    with open(self._log_path, "a", encoding="utf-8") as handle:
                        handle.write(line + "\n")
                        handle.flush()
                        os.fsync(handle.fileno())
                except OSError as exc:
                    raise PersistenceError(f"could not append feedback event: {exc}") from exc
            self._apply(event)

    def accepts(self, stem: str, code: str) -> int:
        return self._counts.get((stem, code), (0, 0))[0]

    def rejects(self, stem: str, code: str) -> int:
        return self._counts.get((stem, code), (0, 0))[1]

    def bounds(self) -> Optional[tuple[int, int]]:
        if not self._counts:
            return None
        values = [a for a, _ in self._counts.values()]
        return min(values), max(values)

    def pairs(self) -> list[tuple[tuple[str, str], tuple[int, int]]]:
        with self._lock:
            return [(pair, (a, r)) for pair, (a, r) in self._counts.items()]

    def snapshot(self) -> HistorySnapshot:
        with self._lock:
            return HistorySnapshot({pair: (a, r) for pair, (a, r) in self._counts.items()})

    @classmethod
    def replay(cls, events: Iterable[FeedbackEvent], log_path: str | Path | None = None) -> "HistoryStore":
        store = cls(log_path=None)
        for event in events:
            store._validate(event)
            store._apply(event)
        store._log_path = Path(log_path) if log_path is not None else None
        return store

    @classmethod
    def load(cls, log_path: str | Path) -> "HistoryStore":
        """Rebuild a store from its append-only event log."""
        events = list(read_event_log(log_path))
        return cls.replay(events, log_path=log_path)


def read_event_log(path: str | Path) -> Iterator[FeedbackEvent]:
    text = Path(path).read_text(encoding="utf-8") if Path(path).exists() else ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield FeedbackEvent.from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError) as exc:
            raise RecommenderError(f"event log line {lineno}: {exc}") from exc


def record_feedback(history: HistoryStore, event: FeedbackEvent) -> HistoryStore:
    """Apply one feedback event; the store is updated only after a durable append."""
    history.record(event)
    return history


def p_exact(f_noun: int) -> float:
    """Exact-match predictor: 1 / f_noun, in (0, 1]."""
    if f_noun < 1:
        raise RecommenderError("exact-match predictor requires f_noun >= 1")
    return 1.0 / f_noun


def p_similarity(
    cos: float,
    f_proxy: int,
    mode: Literal["prose-consistent", "literal"] = "prose-consistent",
) -> float:
    """Semantic-similarity predictor for one proxy hit.

    The default mode ``cos / f_proxy`` grows with similarity and stays in
    (0, 1]. The literal mode ``1 / (f_proxy * cos)`` shrinks with
    similarity and can exceed 1; it is provided for comparison only.
    """
    if f_proxy < 1:
        raise RecommenderError("similarity predictor requires f_proxy >= 1")
    if cos <= 0:
        raise RecommenderError("non-positive-cosine proxies must be discarded upstream")
    if mode == "prose-consistent":
        return cos / f_proxy
    if mode == "literal":
        return 1.0 / (f_proxy * cos)
    raise RecommenderError(f"unknown similarity mode {mode!r}")


def _scale_f_assoc(f_assoc: int, bounds: tuple[int, int]) -> float:
    low, high = bounds
    if high == low:
        return 1.0 if f_assoc >= high else 0.0
    return min(1.0, max(0.0, (f_assoc - low) / (high - low)))


def p_history(
    pair: tuple[str, str],
    store: HistoryView,
    f_noun: int,
    config: RecommenderConfig = RecommenderConfig(),
) -> float | _Suppressed:
    """History predictor: min-max scaled accepted-association count / f_noun.

    Returns SUPPRESSED once the pair has been rejected ``rejection_threshold``
    times. Bounds are global over the store; degenerate bounds scale the
    pair at the bound to 1. An empty store scores 0: no history, no signal.
    """
    if f_noun < 1:
        raise RecommenderError("history predictor requires f_noun >= 1")
    stem_, code = pair
    if store.rejects(stem_, code) >= config.rejection_threshold:
        return SUPPRESSED
    bounds = store.bounds()
    if bounds is None:
        return 0.0
    return _scale_f_assoc(store.accepts(stem_, code), bounds) / f_noun


def combine_confidence(
    pe: Optional[float],
    ps: Optional[float],
    ph: Optional[float] | _Suppressed,
    weights: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3),
) -> float | _Suppressed:
    """Weighted aggregation of the three predictor slots.

    A suppressed history slot dominates; absent slots contribute 0 against
    the full weight mass so missing evidence lowers the confidence.
    """
    if isinstance(ph, _Suppressed):
        return SUPPRESSED
    if pe is None and ps is None and ph is None:
        raise RecommenderError("at least one predictor component must be present")
    w_exact, w_sim, w_hist = weights
    return (
        w_exact * (pe if pe is not None else 0.0)
        + w_sim * (ps if ps is not None else 0.0)
        + w_hist * (ph if ph is not None else 0.0)
    )


@dataclass(frozen=True)
class Suggestion:
    """A ranked candidate association for one noun occurrence."""

    requirement_id: str
    occurrence: NounOccurrence
    code: str
    p_exact: Optional[float]
    p_similarity: Optional[float]
    p_history: Optional[float]
    confidence: float
    proxy: Optional[str] = None

    @property
    def fired(self) -> tuple[str, ...]:
        names = []
        if self.p_exact is not None:
            names.append("exact")
        if self.p_similarity is not None:
            names.append("similarity")
        if self.p_history is not None:
            names.append("history")
        return tuple(names)


def suggest(
    requirement: Requirement,
    index: NounIndex,
    store: Optional[EmbeddingStore],
    history: Optional[HistoryStore],
    config: RecommenderConfig = RecommenderConfig(),
    analyzer: AnalyzerConfig = AnalyzerConfig(),
    tagger: Optional[Tagger] = None,
) -> list[Suggestion]:
    """Rank candidate associations for every noun occurrence of a requirement.

    Candidates come from exact index hits on the occurrence stem and from
    index hits on its top-k embedding proxies above the minimum cosine.
    When several proxies hit the same object, the best-scoring proxy wins.
    Suppressed pairs are removed. Output is sorted by confidence descending,
    ties by object code, then occurrence start offset.
    """
    vocabulary = frozenset(index.entries)
    if store is not None:
        vocabulary = vocabulary | frozenset(store.words)
    occurrences = analyze(requirement.text, analyzer, vocabulary=vocabulary, tagger=tagger)
    snap = history.snapshot() if history is not None else HistorySnapshot({})

    suggestions: list[Suggestion] = []
    for occ in occurrences:
        exact_codes, f_noun = lookup(index, occ.stem)
        exact_score = p_exact(f_noun) if f_noun >= 1 else None

        sim_scores: dict[str, tuple[float, str]] = {}
        if store is not None and occ.stem in store:
            for proxy_word, cos in top_k_proxies(store, occ.stem, config.k_proxies):
                if cos <= config.min_proxy_cosine:
                    continue
                proxy_codes, f_proxy = lookup(index, proxy_word)
                if f_proxy == 0:
                    continue
                score = p_similarity(cos, f_proxy, config.similarity_mode)
                for code in proxy_codes:
                    if code not in sim_scores or score > sim_scores[code][0]:
                        sim_scores[code] = (score, proxy_word)

        for code in sorted(set(exact_codes) | set(sim_scores)):
            pe = exact_score if code in exact_codes else None
            ps, proxy_word = sim_scores.get(code, (None, None))
            if snap.rejects(occ.stem, code) >= config.rejection_threshold:
                continue
            # The history predictor fires only for pairs with recorded events.
            ph: Optional[float] = None
            if f_noun >= 1 and (occ.stem, code) in snap.counts:
                value = p_history((occ.stem, code), snap, f_noun, config)
                assert not isinstance(value, _Suppressed)
                ph = value
            confidence = combine_confidence(pe, ps, ph, config.weights)
            assert not isinstance(confidence, _Suppressed)
            suggestions.append(
                Suggestion(
                    requirement_id=requirement.id,
                    occurrence=occ,
                    code=code,
                    p_exact=pe,
                    p_similarity=ps,
                    p_history=ph,
                    confidence=confidence,
                    proxy=proxy_word,
                )
            )
    suggestions.sort(key=lambda s: (-s.confidence, s.code, s.occurrence.start))
    return suggestions
