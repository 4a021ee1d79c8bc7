"""Word-vector store with cosine and top-k proxy queries.

Vectors load from the plain-text interchange format: a header line
``<word-count> <dimension>`` followed by one ``<word> <c1> ... <cd>`` line
per word. The store is immutable after load and safe for concurrent reads.
Training and approximate nearest-neighbor indexing are out of scope; the
store answers exact brute-force queries, which is adequate at the
vocabulary sizes this package targets.
"""

from __future__ import annotations

from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np


class EmbeddingError(ValueError):
    """Malformed vector document or unknown word."""


class EmbeddingStore:
    """Immutable word -> vector map of a fixed dimension."""

    def __init__(self, dimension: int, vectors: Mapping[str, Iterable[float]]):
        if dimension < 1:
            raise EmbeddingError("dimension must be >= 1")
        self._dimension = dimension
        self._words: list[str] = []
        rows: list[np.ndarray] = []
        seen: set[str] = set()
        for word, values in vectors.items():
            if word in seen:
                raise EmbeddingError(f"duplicate word {word!r}")
            seen.add(word)
            row = np.asarray(tuple(values), dtype=np.float64)
            if row.shape != (dimension,):
                raise EmbeddingError(
                    f"word {word!r} has {row.size} components, expected {dimension}"
                )
            if not np.isfinite(row).all():
                raise EmbeddingError(f"word {word!r} has a non-finite component")
            if float(np.linalg.norm(row)) == 0.0:
                raise EmbeddingError(f"word {word!r} has a zero-norm vector")
            self._words.append(word)
            rows.append(row)
        self._matrix = np.vstack(rows) if rows else np.empty((0, dimension))
        self._matrix.setflags(write=False)
        self._norms = np.linalg.norm(self._matrix, axis=1) if rows else np.empty(0)
        self._index = {word: i for i, word in enumerate(self._words)}

    @property
    def dimension(self) -> int:
        return self._dimension

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(self._words)

    def __len__(self) -> int:
        return len(self._words)

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def vector(self, word: str) -> np.ndarray:
        try:
            return self._matrix[self._index[word]]
        except KeyError:
            raise EmbeddingError(f"word {word!r} is not in the vocabulary") from None

    def _row(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise EmbeddingError(f"word {word!r} is not in the vocabulary") from None


def load_embeddings(source: str | Path | IO[str]) -> EmbeddingStore:
    """Parse the plain-text vector format, validating every row."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise EmbeddingError("empty vector document")
    header = lines[0].split()
    if len(header) != 2:
        raise EmbeddingError("malformed header: expected '<word-count> <dimension>'")
    try:
        count, dimension = int(header[0]), int(header[1])
    except ValueError as exc:
        raise EmbeddingError(f"malformed header: {exc}") from exc
    if count != len(lines) - 1:
        raise EmbeddingError(
            f"header declares {count} words but document has {len(lines) - 1} rows"
        )

    vectors: dict[str, list[float]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split()
        word = fields[0]
        if word in vectors:
            raise EmbeddingError(f"line {lineno}: duplicate word {word!r}")
        try:
            values = [float(v) for v in fields[1:]]
        except ValueError as exc:
            raise EmbeddingError(f"line {lineno}: bad component: {exc}") from exc
        if len(values) != dimension:
            raise EmbeddingError(
                f"line {lineno}: word {word!r} has {len(values)} components, expected {dimension}"
            )
        vectors[word] = values
    return EmbeddingStore(dimension, vectors)


def dump_embeddings(store: EmbeddingStore) -> str:
    lines = [f"{len(store)} {store.dimension}"]
    for word in store.words:
        components = " ".join(repr(float(v)) for v in store.vector(word))
        lines.append(f"{word} {components}")
    return "\n".join(lines) + "\n"


def cosine(store: EmbeddingStore, w1: str, w2: str) -> float:
    """Cosine similarity of two stored words, clamped into [-1, 1]."""
    i, j = store._row(w1), store._row(w2)
    value = float(
        np.dot(store._matrix[i], store._matrix[j]) / (store._norms[i] * store._norms[j])
    )
    return max(-1.0, min(1.0, value))


def top_k_proxies(store: EmbeddingStore, word: str, k: int = 10) -> list[tuple[str, float]]:
    """The k most cosine-similar words to ``word``, excluding the word itself.

    Ties break lexicographically; fewer than k results are returned when the
    vocabulary is smaller. Negative-cosine proxies are not filtered here.
    """
    if k < 1:
        raise EmbeddingError("k must be >= 1")
    i = store._row(word)
    sims = store._matrix @ store._matrix[i] / (store._norms * store._norms[i])
    np.clip(sims, -1.0, 1.0, out=sims)
    candidates = [
        (-float(sims[j]), store.words[j]) for j in range(len(store)) if j != i
    ]
    candidates.sort()
    return [(w, -neg) for neg, w in candidates[:k]]
