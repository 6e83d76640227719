"""Noun-adjective association matrices and quantile normalization.

Four metrics, one shape: every metric reduces its resource to a
|nouns| x |adjectives| matrix of raw association scores where larger
means more associated. Quantile normalization then maps every matrix
onto a shared (0, 1] scale so downstream agents can treat the metrics
interchangeably. Cells flagged as unobserved are floored to ZERO_FLOOR
after ranking.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import DataError
from .lexicon import (
    CooccurrenceCounts,
    EmbeddingTable,
    Lexicon,
    RelatednessTable,
    TopicTable,
    read_labeled_matrix,
)

METRIC_BIGRAM = "bigram"
METRIC_EMBEDDING = "embedding-cosine"
METRIC_RELATEDNESS = "graph-relatedness"
METRIC_TOPIC = "topic-distance"
METRICS = (METRIC_BIGRAM, METRIC_EMBEDDING, METRIC_RELATEDNESS, METRIC_TOPIC)

# Value written into masked (unobserved) cells after normalization.
ZERO_FLOOR = 1e-7


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    """Raw metric scores with a mask of unobserved cells."""

    metric: str
    lexicon: Lexicon
    raw: np.ndarray
    zero_mask: np.ndarray | None = None

    def __post_init__(self):
        if not self.metric:
            raise DataError("empty metric id")
        raw = np.array(self.raw, dtype=float)
        if self.zero_mask is None:
            mask = np.zeros(raw.shape, dtype=bool)
        else:
            mask = np.array(self.zero_mask, dtype=bool)
        if raw.shape != self.lexicon.shape:
            raise DataError(f"matrix shape {raw.shape} != lexicon shape {self.lexicon.shape}")
        if mask.shape != raw.shape:
            raise DataError(f"zero-mask shape {mask.shape} != matrix shape {raw.shape}")
        if not np.isfinite(raw).all():
            raise DataError("non-finite association score")
        object.__setattr__(self, "raw", _freeze(raw))
        object.__setattr__(self, "zero_mask", _freeze(mask))


@dataclass(frozen=True, eq=False)
class NormalizedAssociation:
    """Quantile-normalized scores: every unmasked cell in (0, 1],
    every masked cell exactly ZERO_FLOOR."""

    metric: str
    lexicon: Lexicon
    values: np.ndarray
    zero_mask: np.ndarray

    def __post_init__(self):
        if not self.metric:
            raise DataError("empty metric id")
        values = np.array(self.values, dtype=float)
        mask = np.array(self.zero_mask, dtype=bool)
        if values.shape != self.lexicon.shape:
            raise DataError(f"matrix shape {values.shape} != lexicon shape {self.lexicon.shape}")
        if mask.shape != values.shape:
            raise DataError(f"zero-mask shape {mask.shape} != matrix shape {values.shape}")
        if not np.isfinite(values).all():
            raise DataError("non-finite normalized score")
        unmasked = values[~mask]
        if unmasked.size and ((unmasked <= 0).any() or (unmasked > 1).any()):
            raise DataError("normalized scores must lie in (0, 1]")
        if (values[mask] != ZERO_FLOOR).any():
            raise DataError(f"masked cells must equal {ZERO_FLOOR!r}")
        object.__setattr__(self, "values", _freeze(values))
        object.__setattr__(self, "zero_mask", _freeze(mask))


# ---------------------------------------------------------------------------
# metrics

def bigram_association(counts: CooccurrenceCounts) -> AssociationMatrix:
    """Pointwise co-occurrence lift: P(adjective | noun) / P(adjective).

    P(adjective) is the marginal over the in-vocabulary count table.
    A noun with no observations at all has no conditional and is an
    error; an adjective never observed yields score 0 in its column,
    and every zero-count cell is masked.
    """
    z = counts.z.astype(float)
    noun_totals = z.sum(axis=1)
    for i, total in enumerate(noun_totals):
        if total == 0:
            raise DataError(f"noun '{counts.lexicon.nouns[i]}' has no observations")
    adj_totals = z.sum(axis=0)
    grand = z.sum()
    p_adj_given_noun = z / noun_totals[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        p_adj = adj_totals / grand
        lift = p_adj_given_noun / p_adj[None, :]
    lift[:, adj_totals == 0] = 0.0
    return AssociationMatrix(METRIC_BIGRAM, counts.lexicon, lift, counts.z == 0)


def cosine_association(embeddings: EmbeddingTable) -> AssociationMatrix:
    """Cosine similarity between noun and adjective vectors."""
    lex = embeddings.lexicon
    noun_mat = embeddings.matrix(lex.nouns)
    adj_mat = embeddings.matrix(lex.adjectives)
    noun_norms = np.linalg.norm(noun_mat, axis=1)
    adj_norms = np.linalg.norm(adj_mat, axis=1)
    sims = (noun_mat @ adj_mat.T) / (noun_norms[:, None] * adj_norms[None, :])
    return AssociationMatrix(METRIC_EMBEDDING, lex, sims, np.zeros(lex.shape, dtype=bool))


def relatedness_association(table: RelatednessTable) -> AssociationMatrix:
    """Graph relatedness passes through; a score of 0 marks an absent edge."""
    return AssociationMatrix(
        METRIC_RELATEDNESS, table.lexicon, table.scores.copy(), table.scores == 0
    )


def topic_association(topics: TopicTable) -> AssociationMatrix:
    """Negated Euclidean distance between topic distributions.

    Negation keeps the "larger is more associated" orientation; distance
    0 (identical distributions) is the strongest score, so nothing is
    masked.
    """
    lex = topics.lexicon
    noun_mat = np.stack([topics.distributions[w] for w in lex.nouns])
    adj_mat = np.stack([topics.distributions[w] for w in lex.adjectives])
    diffs = noun_mat[:, None, :] - adj_mat[None, :, :]
    dists = np.sqrt((diffs**2).sum(axis=2))
    return AssociationMatrix(METRIC_TOPIC, lex, -dists, np.zeros(lex.shape, dtype=bool))


# ---------------------------------------------------------------------------
# normalization and lookups

def quantile_normalize(assoc: AssociationMatrix) -> NormalizedAssociation:
    """Map raw scores onto (0, 1] by pooled quantile rank.

    All cells are pooled, ranked ascending with average ranks for ties,
    and each cell becomes rank / cell_count. Masked cells are overwritten
    with ZERO_FLOOR afterwards, so the mask wins over the rank.
    """
    flat = assoc.raw.ravel()
    ranks = rankdata(flat, method="average")
    values = (ranks / flat.size).reshape(assoc.raw.shape)
    values[assoc.zero_mask] = ZERO_FLOOR
    return NormalizedAssociation(assoc.metric, assoc.lexicon, values, assoc.zero_mask.copy())


def pair_association(norm: NormalizedAssociation, noun1: int, noun2: int, adjective: int) -> float:
    """Association between an unordered noun pair and one adjective:
    the product of the two per-noun scores."""
    n_nouns, n_adjs = norm.lexicon.shape
    for noun in (noun1, noun2):
        if not 0 <= noun < n_nouns:
            raise DataError(f"noun index {noun} out of range")
    if not 0 <= adjective < n_adjs:
        raise DataError(f"adjective index {adjective} out of range")
    if noun1 == noun2:
        raise DataError(f"degenerate pair ({noun1}, {noun2})")
    return float(norm.values[noun1, adjective] * norm.values[noun2, adjective])


def sparsity_report(norm: NormalizedAssociation, configurations) -> float:
    """Fraction of cell references falling on masked cells.

    A speaker configuration references its two target nouns crossed with
    every scenario adjective; a listener configuration references its
    clue adjective crossed with every scenario noun. References are
    counted with multiplicity across configurations.
    """
    configurations = list(configurations)
    if not configurations:
        raise DataError("no configurations given")
    mask = norm.zero_mask
    total = 0
    masked = 0
    for config in configurations:
        scenario = config.scenario
        if config.role == "speaker":
            i, j = config.index
            for adj in scenario.adjectives:
                for noun in (scenario.nouns[i], scenario.nouns[j]):
                    total += 1
                    masked += bool(mask[noun, adj])
        else:
            adj = scenario.adjectives[config.index]
            for noun in scenario.nouns:
                total += 1
                masked += bool(mask[noun, adj])
    return masked / total


# ---------------------------------------------------------------------------
# serialization

_STAGE_RAW = "raw"
_STAGE_NORMALIZED = "normalized"


def _mask_spec(mask: np.ndarray) -> str:
    rows, cols = np.nonzero(mask)
    return ";".join(f"{r},{c}" for r, c in zip(rows, cols))


def _parse_mask_spec(spec: str, shape: tuple[int, int], path) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    spec = spec.strip()
    if not spec:
        return mask
    for part in spec.split(";"):
        try:
            r_text, c_text = part.split(",")
            r, c = int(r_text), int(c_text)
        except ValueError:
            raise DataError(f"{path}: malformed zero-mask entry {part!r}") from None
        if not (0 <= r < shape[0] and 0 <= c < shape[1]):
            raise DataError(f"{path}: zero-mask entry {part!r} out of range")
        mask[r, c] = True
    return mask


def _write_matrix(metric, lexicon, matrix, mask, stage, path) -> None:
    lines = [
        f"# metric: {metric}",
        f"# stage: {stage}",
        f"# zero-mask: {_mask_spec(mask)}",
        "\t" + "\t".join(lexicon.adjectives),
    ]
    for i, noun in enumerate(lexicon.nouns):
        lines.append(noun + "\t" + "\t".join(repr(float(v)) for v in matrix[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def save_association(assoc: AssociationMatrix, path: str | Path) -> None:
    _write_matrix(assoc.metric, assoc.lexicon, assoc.raw, assoc.zero_mask, _STAGE_RAW, path)


def save_normalized(norm: NormalizedAssociation, path: str | Path) -> None:
    _write_matrix(norm.metric, norm.lexicon, norm.values, norm.zero_mask, _STAGE_NORMALIZED, path)


def _read_matrix(path: str | Path, expect_stage: str):
    row_labels, col_labels, cells, comments = read_labeled_matrix(path)
    metric = None
    mask_spec = None
    stage = None
    for comment in comments:
        body = comment.lstrip("#").strip()
        for key in ("metric", "stage", "zero-mask"):
            prefix = key + ":"
            if body.startswith(prefix):
                value = body[len(prefix):].strip()
                if key == "metric":
                    metric = value
                elif key == "stage":
                    stage = value
                else:
                    mask_spec = value
    if metric is None:
        raise DataError(f"{path}: missing '# metric:' line")
    if stage is not None and stage != expect_stage:
        raise DataError(f"{path}: stage '{stage}' where '{expect_stage}' expected")
    lexicon = Lexicon(tuple(row_labels), tuple(col_labels))
    matrix = np.zeros(lexicon.shape)
    for i, row in enumerate(cells):
        for j, text in enumerate(row):
            try:
                matrix[i, j] = float(text)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {text!r}") from None
    mask = _parse_mask_spec(mask_spec or "", lexicon.shape, path)
    return metric, lexicon, matrix, mask


def load_association(path: str | Path) -> AssociationMatrix:
    metric, lexicon, matrix, mask = _read_matrix(path, _STAGE_RAW)
    return AssociationMatrix(metric, lexicon, matrix, mask)


def load_normalized(path: str | Path) -> NormalizedAssociation:
    metric, lexicon, matrix, mask = _read_matrix(path, _STAGE_NORMALIZED)
    return NormalizedAssociation(metric, lexicon, matrix, mask)
