"""Vocabularies and raw semantic resources.

A Lexicon fixes the noun and adjective orderings that every matrix in the
package indexes into. The loaders here ingest the four precomputed
resources the association metrics consume: co-occurrence counts, word
embeddings, graph relatedness scores, and topic distributions. Loaders
either return a fully validated table or raise DataError; nothing
partially parsed escapes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DataError

_INT_LIMIT = np.iinfo(np.int64).max

# Topic rows whose sum is off by more than this are re-normalized; rows
# already this close to 1 pass through untouched so save/load round-trips
# are exact.
_TOPIC_EXACT_TOL = 1e-12
_TOPIC_RENORM_TOL = 1e-6


@dataclass(frozen=True)
class Lexicon:
    """Ordered noun and adjective vocabularies."""

    nouns: tuple[str, ...]
    adjectives: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "nouns", tuple(self.nouns))
        object.__setattr__(self, "adjectives", tuple(self.adjectives))
        for section, words in (("nouns", self.nouns), ("adjectives", self.adjectives)):
            if not words:
                raise DataError(f"lexicon section '{section}' is empty")
            for word in words:
                if not word or word != word.strip() or any(ch.isspace() for ch in word):
                    raise DataError(f"invalid word {word!r} in '{section}'")
        seen: dict[str, str] = {}
        for section, words in (("nouns", self.nouns), ("adjectives", self.adjectives)):
            for word in words:
                if word in seen:
                    if seen[word] == section:
                        raise DataError(f"word '{word}' duplicated in '{section}'")
                    raise DataError(f"word '{word}' is duplicate across sections")
                seen[word] = section

    @cached_property
    def noun_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.nouns)}

    @cached_property
    def adjective_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.adjectives)}

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.nouns), len(self.adjectives))


def load_lexicon(path: str | Path) -> Lexicon:
    """Parse a [nouns]/[adjectives] sectioned word list.

    One word per line, '#' starts a comment, words are lowercased.
    """
    nouns: list[str] = []
    adjectives: list[str] = []
    section: list[str] | None = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[nouns]":
            section = nouns
            continue
        if line == "[adjectives]":
            section = adjectives
            continue
        if line.startswith("[") and line.endswith("]"):
            raise DataError(f"{path}:{lineno}: unknown section header {line!r}")
        if section is None:
            raise DataError(f"{path}:{lineno}: word before any section header")
        word = line.lower()
        if any(ch.isspace() for ch in word):
            raise DataError(f"{path}:{lineno}: expected one word, got {line!r}")
        section.append(word)
    return Lexicon(tuple(nouns), tuple(adjectives))


def save_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    lines = ["[nouns]"]
    lines.extend(lexicon.nouns)
    lines.append("[adjectives]")
    lines.extend(lexicon.adjectives)
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# labeled matrix files (counts, relatedness)

def read_labeled_matrix(path: str | Path) -> tuple[list[str], list[str], list[list[str]], list[str]]:
    """Read a TSV matrix with a column-label header row and row labels.

    Returns (row_labels, column_labels, cells, comment_lines). Cells are
    kept as strings; callers convert. Leading '#' lines are collected as
    comments, lowercase applied to labels only.
    """
    comments: list[str] = []
    header: list[str] | None = None
    row_labels: list[str] = []
    cells: list[list[str]] = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.lstrip().startswith("#"):
            comments.append(raw.strip())
            continue
        fields = raw.split("\t")
        if header is None:
            if fields[0].strip():
                raise DataError(f"{path}:{lineno}: header must start with an empty cell")
            header = [f.strip().lower() for f in fields[1:]]
            if not header or any(not h for h in header):
                raise DataError(f"{path}:{lineno}: empty column label")
            continue
        if len(fields) != len(header) + 1:
            raise DataError(
                f"{path}:{lineno}: expected {len(header) + 1} fields, got {len(fields)}"
            )
        row_labels.append(fields[0].strip().lower())
        cells.append([f.strip() for f in fields[1:]])
    if header is None:
        raise DataError(f"{path}: no header row")
    return row_labels, header, cells, comments


def _align_rows(
    row_labels: list[str],
    col_labels: list[str],
    cells: list[list[str]],
    lexicon: Lexicon,
    path: str | Path,
):
    """Map file rows/columns onto lexicon order, ignoring extra words.

    Duplicate labels and lexicon words missing from the file are errors;
    words in the file but not the lexicon are dropped with a warning.
    """
    for kind, labels in (("row", row_labels), ("column", col_labels)):
        dupes = {w for w in labels if labels.count(w) > 1}
        if dupes:
            raise DataError(f"{path}: duplicate {kind} label '{sorted(dupes)[0]}'")
    row_pos = {w: i for i, w in enumerate(row_labels)}
    col_pos = {w: i for i, w in enumerate(col_labels)}
    for noun in lexicon.nouns:
        if noun not in row_pos:
            raise DataError(f"{path}: noun '{noun}' absent")
    for adj in lexicon.adjectives:
        if adj not in col_pos:
            raise DataError(f"{path}: adjective '{adj}' absent")
    extra = (len(row_labels) - len(lexicon.nouns)) + (len(col_labels) - len(lexicon.adjectives))
    if extra:
        warnings.warn(f"{path}: ignoring {extra} word(s) outside the lexicon", stacklevel=3)
    picked = [
        [cells[row_pos[n]][col_pos[a]] for a in lexicon.adjectives] for n in lexicon.nouns
    ]
    return picked


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class CooccurrenceCounts:
    """Noun x adjective co-occurrence counts from one corpus source."""

    lexicon: Lexicon
    z: np.ndarray
    source: str

    def __post_init__(self):
        z = np.asarray(self.z)
        if z.shape != self.lexicon.shape:
            raise DataError(f"count table shape {z.shape} != lexicon shape {self.lexicon.shape}")
        if not np.issubdtype(z.dtype, np.integer):
            raise DataError("counts must be integers")
        if (z < 0).any():
            raise DataError("negative count")
        object.__setattr__(self, "z", _freeze(z.astype(np.int64)))


def load_counts(path: str | Path, lexicon: Lexicon, source: str | None = None) -> CooccurrenceCounts:
    row_labels, col_labels, cells, _ = read_labeled_matrix(path)
    picked = _align_rows(row_labels, col_labels, cells, lexicon, path)
    z = np.zeros(lexicon.shape, dtype=np.int64)
    for i, noun in enumerate(lexicon.nouns):
        for j, adj in enumerate(lexicon.adjectives):
            text = picked[i][j]
            try:
                value = int(text)
            except ValueError:
                raise DataError(
                    f"{path}: non-integer count {text!r} at ('{noun}', '{adj}')"
                ) from None
            if value < 0:
                raise DataError(f"{path}: negative count {value} at ('{noun}', '{adj}')")
            if value > _INT_LIMIT:
                raise DataError(f"{path}: count overflow at ('{noun}', '{adj}')")
            z[i, j] = value
    if source is None:
        source = Path(path).stem
    return CooccurrenceCounts(lexicon, z, source)


def save_counts(counts: CooccurrenceCounts, path: str | Path) -> None:
    _write_labeled_matrix(path, counts.lexicon, counts.z, fmt=str, comments=[f"# source: {counts.source}"])


@dataclass(frozen=True, eq=False)
class RelatednessTable:
    """Noun x adjective relatedness scores from a semantic graph."""

    lexicon: Lexicon
    scores: np.ndarray

    def __post_init__(self):
        scores = np.array(self.scores, dtype=float)
        if scores.shape != self.lexicon.shape:
            raise DataError(
                f"relatedness shape {scores.shape} != lexicon shape {self.lexicon.shape}"
            )
        if not np.isfinite(scores).all():
            raise DataError("non-finite relatedness score")
        if (scores < 0).any():
            raise DataError("negative relatedness score")
        object.__setattr__(self, "scores", _freeze(scores))


def load_relatedness(path: str | Path, lexicon: Lexicon) -> RelatednessTable:
    row_labels, col_labels, cells, _ = read_labeled_matrix(path)
    picked = _align_rows(row_labels, col_labels, cells, lexicon, path)
    scores = np.zeros(lexicon.shape)
    for i, noun in enumerate(lexicon.nouns):
        for j, adj in enumerate(lexicon.adjectives):
            text = picked[i][j]
            try:
                scores[i, j] = float(text)
            except ValueError:
                raise DataError(
                    f"{path}: non-numeric score {text!r} at ('{noun}', '{adj}')"
                ) from None
    return RelatednessTable(lexicon, scores)


def save_relatedness(table: RelatednessTable, path: str | Path) -> None:
    _write_labeled_matrix(path, table.lexicon, table.scores, fmt=lambda x: repr(float(x)))


def _write_labeled_matrix(path, lexicon, matrix, fmt, comments=()) -> None:
    lines = list(comments)
    lines.append("\t" + "\t".join(lexicon.adjectives))
    for i, noun in enumerate(lexicon.nouns):
        lines.append(noun + "\t" + "\t".join(fmt(v) for v in matrix[i]))
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# word-keyed vector files (embeddings, topic distributions)

def _read_vector_file(path: str | Path) -> dict[str, np.ndarray]:
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if not raw.strip():
            continue
        fields = raw.split()
        if len(fields) < 2:
            raise DataError(f"{path}:{lineno}: expected a word and at least one value")
        word = fields[0].lower()
        try:
            values = np.array([float(f) for f in fields[1:]])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric value for '{word}'") from None
        if not np.isfinite(values).all():
            raise DataError(f"{path}:{lineno}: non-finite value for '{word}'")
        if dimension is None:
            dimension = values.size
        elif values.size != dimension:
            raise DataError(
                f"{path}:{lineno}: '{word}' has {values.size} values, expected {dimension}"
            )
        if word in vectors:
            raise DataError(f"{path}:{lineno}: duplicate entry for '{word}'")
        vectors[word] = values
    if not vectors:
        raise DataError(f"{path}: no entries")
    return vectors


def _lexicon_words(lexicon: Lexicon) -> tuple[str, ...]:
    return lexicon.nouns + lexicon.adjectives


def _pick_vectors(all_vectors, lexicon, path):
    picked = {}
    for word in _lexicon_words(lexicon):
        if word not in all_vectors:
            raise DataError(f"{path}: word '{word}' absent")
        picked[word] = all_vectors[word]
    extra = len(all_vectors) - len(picked)
    if extra:
        warnings.warn(f"{path}: ignoring {extra} word(s) outside the lexicon", stacklevel=3)
    return picked


@dataclass(frozen=True, eq=False)
class EmbeddingTable:
    """Dense word vectors for every lexicon word."""

    lexicon: Lexicon
    dimension: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dimension < 1:
            raise DataError("embedding dimension must be positive")
        frozen = {}
        for word in _lexicon_words(self.lexicon):
            if word not in self.vectors:
                raise DataError(f"word '{word}' has no vector")
            vec = np.array(self.vectors[word], dtype=float)
            if vec.shape != (self.dimension,):
                raise DataError(f"vector for '{word}' has shape {vec.shape}")
            if not np.isfinite(vec).all():
                raise DataError(f"non-finite vector for '{word}'")
            if not vec.any():
                raise DataError(f"zero vector for '{word}'")
            frozen[word] = _freeze(vec)
        object.__setattr__(self, "vectors", frozen)

    def matrix(self, words) -> np.ndarray:
        return np.stack([self.vectors[w] for w in words])


def load_embeddings(path: str | Path, lexicon: Lexicon) -> EmbeddingTable:
    all_vectors = _read_vector_file(path)
    picked = _pick_vectors(all_vectors, lexicon, path)
    dimension = next(iter(picked.values())).size
    return EmbeddingTable(lexicon, dimension, picked)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    _write_vector_file(path, table.lexicon, table.vectors)


@dataclass(frozen=True, eq=False)
class TopicTable:
    """Per-word distributions over a shared set of topics."""

    lexicon: Lexicon
    topic_count: int
    distributions: dict[str, np.ndarray]

    def __post_init__(self):
        if self.topic_count < 1:
            raise DataError("topic count must be positive")
        frozen = {}
        for word in _lexicon_words(self.lexicon):
            if word not in self.distributions:
                raise DataError(f"word '{word}' has no topic distribution")
            vec = np.array(self.distributions[word], dtype=float)
            if vec.shape != (self.topic_count,):
                raise DataError(f"distribution for '{word}' has shape {vec.shape}")
            if (vec < 0).any():
                raise DataError(f"negative topic mass for '{word}'")
            total = float(vec.sum())
            if abs(total - 1.0) > 1e-9:
                raise DataError(f"distribution for '{word}' sums to {total:g}")
            frozen[word] = _freeze(vec)
        object.__setattr__(self, "distributions", frozen)


def load_topics(path: str | Path, lexicon: Lexicon) -> TopicTable:
    """Load topic distributions; rows off by at most 1e-6 are re-normalized."""
    all_vectors = _read_vector_file(path)
    picked = _pick_vectors(all_vectors, lexicon, path)
    cleaned = {}
    for word, vec in picked.items():
        if (vec < 0).any():
            raise DataError(f"{path}: negative topic mass for '{word}'")
        total = float(vec.sum())
        if abs(total - 1.0) <= _TOPIC_EXACT_TOL:
            cleaned[word] = vec
        elif abs(total - 1.0) <= _TOPIC_RENORM_TOL:
            cleaned[word] = vec / total
        else:
            raise DataError(f"{path}: distribution for '{word}' sums to {total:g}")
    topic_count = next(iter(cleaned.values())).size
    return TopicTable(lexicon, topic_count, cleaned)


def save_topics(table: TopicTable, path: str | Path) -> None:
    _write_vector_file(path, table.lexicon, table.distributions)


def _write_vector_file(path, lexicon, vectors) -> None:
    lines = []
    for word in _lexicon_words(lexicon):
        lines.append(word + " " + " ".join(repr(float(v)) for v in vectors[word]))
    Path(path).write_text("\n".join(lines) + "\n")
