"""Domain taxonomy: loading, validation, noun indexing, and search.

The taxonomy file format is UTF-8 JSON lines. The first line is a header
object ``{"format": "taxonomy", "version": 1}``; every following non-empty
line is one object record with fields ``code``, ``label``, ``description``,
``synonyms`` (array) and ``parent_code`` (nullable).

A ``NounIndex`` maps noun stems to the set of object codes whose label,
description or synonyms contain that noun; the size of an entry is the
noun's object frequency used by the scoring predictors. Taxonomy and index
are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping

from .textproc import AnalyzerConfig, analyze

TAXONOMY_FORMAT = "taxonomy"
TAXONOMY_VERSION = 1


class TaxonomyError(ValueError):
    """Malformed taxonomy document or invariant violation."""


@dataclass(frozen=True)
class TaxonomyObject:
    """One taxonomy entry: a coded domain concept with descriptive text."""

    code: str
    label: str
    description: str = ""
    synonyms: tuple[str, ...] = ()
    parent_code: str | None = None

    def __post_init__(self):
        if not self.code:
            raise TaxonomyError("object code must be non-empty")
        if not self.label:
            raise TaxonomyError(f"object {self.code!r} has an empty label")
        object.__setattr__(self, "synonyms", tuple(self.synonyms))

    def text_fields(self) -> Iterator[str]:
        yield self.label
        if self.description:
            yield self.description
        yield from self.synonyms


class Taxonomy:
    """Immutable collection of TaxonomyObject keyed by code."""

    def __init__(self, objects: Iterable[TaxonomyObject]):
        by_code: dict[str, TaxonomyObject] = {}
        for obj in objects:
            if obj.code in by_code:
                raise TaxonomyError(f"duplicate object code {obj.code!r}")
            by_code[obj.code] = obj
        for obj in by_code.values():
            if obj.parent_code is not None and obj.parent_code not in by_code:
                raise TaxonomyError(
                    f"object {obj.code!r} references unknown parent {obj.parent_code!r}"
                )
        self._check_parent_cycles(by_code)
        self._objects = by_code

    @staticmethod
    def _check_parent_cycles(by_code: Mapping[str, TaxonomyObject]) -> None:
        cleared: set[str] = set()
        for code in by_code:
            seen: set[str] = set()
            current: str | None = code
            while current is not None and current not in cleared:
                if current in seen:
                    raise TaxonomyError(f"parent cycle involving object {current!r}")
                seen.add(current)
                current = by_code[current].parent_code
            cleared.update(seen)

    def __len__(self) -> int:
        return len(self._objects)

    def __contains__(self, code: str) -> bool:
        return code in self._objects

    def __iter__(self) -> Iterator[TaxonomyObject]:
        return iter(self._objects.values())

    def get(self, code: str) -> TaxonomyObject:
        try:
            return self._objects[code]
        except KeyError:
            raise KeyError(f"unknown object code {code!r}") from None

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(self._objects)


def _parse_header(line: str) -> None:
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TaxonomyError(f"line 1: malformed header: {exc}") from exc
    if not isinstance(header, dict) or header.get("format") != TAXONOMY_FORMAT:
        raise TaxonomyError("line 1: missing or wrong format header")
    if header.get("version") != TAXONOMY_VERSION:
        raise TaxonomyError(f"line 1: unsupported taxonomy version {header.get('version')!r}")


def load_taxonomy(source: str | Path | IO[str]) -> Taxonomy:
    """Parse and validate a taxonomy document.

    Accepts a path or an open text stream. Errors name the offending code
    and line number.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise TaxonomyError("line 1: missing format header")
    _parse_header(lines[0])

    objects: list[TaxonomyObject] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TaxonomyError(f"line {lineno}: malformed record: {exc}") from exc
        if not isinstance(record, dict):
            raise TaxonomyError(f"line {lineno}: record is not an object")
        try:
            obj = TaxonomyObject(
                code=record.get("code", ""),
                label=record.get("label", ""),
                description=record.get("description", "") or "",
                synonyms=tuple(record.get("synonyms") or ()),
                parent_code=record.get("parent_code"),
            )
        except TaxonomyError as exc:
            raise TaxonomyError(f"line {lineno}: {exc}") from exc
        if obj.code in seen:
            raise TaxonomyError(f"line {lineno}: duplicate object code {obj.code!r}")
        seen.add(obj.code)
        objects.append(obj)
    return Taxonomy(objects)


def dump_taxonomy(taxonomy: Taxonomy) -> str:
    """Serialize a taxonomy back to the line-delimited format."""
    lines = [json.dumps({"format": TAXONOMY_FORMAT, "version": TAXONOMY_VERSION})]
    for obj in taxonomy:
        lines.append(
            json.dumps(
                {
                    "code": obj.code,
                    "label": obj.label,
                    "description": obj.description,
                    "synonyms": list(obj.synonyms),
                    "parent_code": obj.parent_code,
                },
                ensure_ascii=False,
            )
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class NounIndex:
    """Inverted index from noun stem to the codes of objects containing it."""

    entries: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def stems(self) -> frozenset[str]:
        return frozenset(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def build_noun_index(taxonomy: Taxonomy, analyzer: AnalyzerConfig) -> NounIndex:
    """Index every noun stem of every object's label, description and synonyms.

    Two passes: the first harvests all whole-token stems as the working
    vocabulary, the second analyzes with that vocabulary so compounds in
    object text also index under their parts when the parts occur as words
    of their own somewhere in the taxonomy.
    """
    vocabulary: set[str] = set()
    for obj in taxonomy:
        for text in obj.text_fields():
            for occ in analyze(text, analyzer, vocabulary=None):
                vocabulary.add(occ.stem)

    entries: dict[str, set[str]] = {}
    for obj in taxonomy:
        for text in obj.text_fields():
            for occ in analyze(text, analyzer, vocabulary=vocabulary):
                entries.setdefault(occ.stem, set()).add(obj.code)
    return NounIndex({stem: frozenset(codes) for stem, codes in entries.items()})


def lookup(index: NounIndex, stem: str) -> tuple[frozenset[str], int]:
    """Return the object codes indexed under a stem and their count.

    The count is the noun's object frequency; an unknown stem reports
    ``(frozenset(), 0)``. The key is case-folded before lookup.
    """
    codes = index.entries.get(stem.casefold(), frozenset())
    return codes, len(codes)


def search_taxonomy(taxonomy: Taxonomy, query: str, limit: int) -> list[tuple[str, int]]:
    """Token-overlap full-text search over labels, descriptions and synonyms.

    Scores count distinct matched query tokens; ranking prefers more matched
    tokens, then matches in the label over matches only elsewhere, then code
    order. Deterministic across runs.
    """
    if limit < 1:
        raise TaxonomyError("limit must be >= 1")
    tokens = {t.casefold() for t in query.split() if t}
    if not tokens:
        raise TaxonomyError("query must contain at least one token")

    word_re = re.compile(r"\w+")

    def tokenize(text: str) -> set[str]:
        return {t.casefold() for t in word_re.findall(text)}

    scored: list[tuple[int, int, str]] = []
    for obj in taxonomy:
        label_tokens = tokenize(obj.label)
        other_tokens = tokenize(obj.description)
        for synonym in obj.synonyms:
            other_tokens |= tokenize(synonym)
        matched = tokens & (label_tokens | other_tokens)
        if not matched:
            continue
        label_matched = len(tokens & label_tokens)
        scored.append((len(matched), label_matched, obj.code))
    scored.sort(key=lambda item: (-item[0], -item[1], item[2]))
    return [(code, n_matched) for n_matched, _, code in scored[:limit]]
