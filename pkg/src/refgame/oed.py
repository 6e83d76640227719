"""Information-driven search for discriminating game items.

A configuration is informative when the candidate models disagree about
how to answer it. With a uniform prior over models, the expected
information gained from observing an answer is the mutual information
(in bits) between model identity and the response. Scenario-level
search scores a whole scenario by the geometric mean of its
configuration utilities, so one uninformative configuration drags the
whole scenario down.

Search is plain Monte Carlo over uniformly sampled scenarios with
deduplication; candidate keys come from the seed sequence alone, so the
result is deterministic no matter how the evaluations are scheduled.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .association import NormalizedAssociation
from .errors import DataError
from .rsa import (
    LISTENER,
    SPEAKER,
    Configuration,
    ModelSpec,
    PredictionDistribution,
    Scenario,
    configuration_from_record,
    configuration_record,
    noun_pairs,
    predict,
    scenario_from_record,
    scenario_record,
)

MODE_SEPARATE_SPEAKER = "separate-speaker"
MODE_SEPARATE_LISTENER = "separate-listener"
MODE_JOINT = "joint"
MODES = (MODE_SEPARATE_SPEAKER, MODE_SEPARATE_LISTENER, MODE_JOINT)

THREADS_VAR = "REFGAME_THREADS"


@dataclass(frozen=True)
class ModelSet:
    """The candidate models under comparison; all must share one role."""

    models: tuple[ModelSpec, ...]

    def __post_init__(self):
        models = tuple(self.models)
        if not models:
            raise DataError("empty model set")
        roles = {m.role for m in models}
        if len(roles) != 1:
            raise DataError(f"model set mixes roles {sorted(roles)}")
        object.__setattr__(self, "models", models)

    @property
    def role(self) -> str:
        return self.models[0].role

    def __len__(self) -> int:
        return len(self.models)


@dataclass(frozen=True)
class SearchSettings:
    """Monte Carlo search knobs."""

    nouns: int
    adjectives: int
    mode: str
    iterations: int = 100_000
    seed: int = 0
    top_k: int = 500

    def __post_init__(self):
        if self.nouns < 2:
            raise DataError("need at least two nouns per scenario")
        if self.adjectives < 1:
            raise DataError("need at least one adjective per scenario")
        if self.mode not in MODES:
            raise DataError(f"unknown search mode {self.mode!r}")
        if self.iterations < 1:
            raise DataError("iterations must be positive")
        if self.top_k < 1:
            raise DataError("top_k must be positive")


@dataclass(frozen=True)
class DesignCandidate:
    """A scored design: a scenario, and in separate modes the single
    configuration (role plus index) the utility belongs to."""

    scenario: Scenario
    role: str | None
    index: object
    utility: float

    def __post_init__(self):
        if not self.utility >= 0:
            raise DataError(f"utility must be non-negative, got {self.utility!r}")

    @property
    def configuration(self) -> Configuration | None:
        if self.role is None:
            return None
        return Configuration(self.scenario, self.role, self.index)


def _as_tables(tables) -> Mapping[str, NormalizedAssociation]:
    if isinstance(tables, NormalizedAssociation):
        return {tables.metric: tables}
    return tables


def _table_for(tables: Mapping[str, NormalizedAssociation], metric: str) -> NormalizedAssociation:
    try:
        return tables[metric]
    except KeyError:
        raise DataError(f"no matrix supplied for metric '{metric}'") from None


def response_probability(
    tables, config: Configuration, models: ModelSet
) -> tuple[tuple[PredictionDistribution, ...], PredictionDistribution]:
    """Each model's answer distribution plus their uniform mixture."""
    tables = _as_tables(tables)
    if models.role != config.role:
        raise DataError(f"model set role '{models.role}' != configuration role '{config.role}'")
    dists = tuple(predict(_table_for(tables, m.metric), config, m) for m in models.models)
    stacked = np.stack([d.probs for d in dists])
    return dists, PredictionDistribution(dists[0].support, stacked.mean(axis=0))


def model_information_bits(prediction_probs) -> float:
    """Mutual information (bits) between model identity and the answer.

    Rows are per-model answer distributions; the model prior is uniform.
    Zero-probability answers contribute nothing. Clamped at 0 to absorb
    float rounding on identical rows.
    """
    probs = np.asarray(prediction_probs, dtype=float)
    if probs.ndim != 2:
        raise DataError("prediction matrix must be 2-d")
    n_models = probs.shape[0]
    if n_models < 2:
        warnings.warn("fewer than two models: utility is identically 0", stacklevel=2)
        return 0.0
    mixture = probs.mean(axis=0)
    total = 0.0
    for y in np.nonzero(mixture > 0)[0]:
        posterior = probs[:, y] / (n_models * mixture[y])
        live = posterior > 0
        total += mixture[y] * float(np.sum(posterior[live] * np.log2(posterior[live] * n_models)))
    return max(total, 0.0)


def configuration_utility(tables, config: Configuration, models: ModelSet) -> float:
    """Expected information (bits) one answer to config carries about
    which model generated it."""
    if len(models) < 2:
        warnings.warn("fewer than two models: utility is identically 0", stacklevel=2)
        return 0.0
    dists, _ = response_probability(tables, config, models)
    return model_information_bits(np.stack([d.probs for d in dists]))


def _geometric_mean(values) -> float:
    values = list(values)
    if any(v == 0 for v in values):
        return 0.0
    product = math.prod(values)
    if product > 0:
        return product ** (1.0 / len(values))
    # product underflowed; fall back to the log-domain mean
    return math.exp(sum(math.log(v) for v in values) / len(values))


def scenario_joint_utility(
    tables, scenario: Scenario, speaker_models: ModelSet, listener_models: ModelSet
) -> float:
    """Geometric mean of every configuration utility in the scenario:
    all C(k,2) speaker targets and all m listener clues."""
    if speaker_models.role != SPEAKER:
        raise DataError("speaker_models must hold speaker models")
    if listener_models.role != LISTENER:
        raise DataError("listener_models must hold listener models")
    tables = _as_tables(tables)
    utilities = [
        configuration_utility(tables, Configuration(scenario, SPEAKER, pair), speaker_models)
        for pair in scenario.pairs
    ]
    utilities.extend(
        configuration_utility(tables, Configuration(scenario, LISTENER, a), listener_models)
        for a in range(scenario.m)
    )
    return _geometric_mean(utilities)


# ---------------------------------------------------------------------------
# Monte Carlo search

def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        if threads < 1:
            raise DataError("thread count must be positive")
        return threads
    env = os.environ.get(THREADS_VAR)
    if env is None:
        return 1
    try:
        parsed = int(env)
    except ValueError:
        raise DataError(f"{THREADS_VAR} must be an integer, got {env!r}") from None
    if parsed < 1:
        raise DataError(f"{THREADS_VAR} must be positive, got {env!r}")
    return parsed


def _search_lexicon(tables: Mapping[str, NormalizedAssociation]):
    lexicons = list({id(t.lexicon): t.lexicon for t in tables.values()}.values())
    if not lexicons:
        raise DataError("no matrices supplied")
    first = lexicons[0]
    for other in lexicons[1:]:
        if other.nouns != first.nouns or other.adjectives != first.adjectives:
            raise DataError("matrices disagree on the lexicon")
    return first


def monte_carlo_search(
    tables,
    models,
    settings: SearchSettings,
    threads: int | None = None,
) -> list[DesignCandidate]:
    """Sample scenarios uniformly, score them, return the top_k.

    In the separate modes `models` is one ModelSet and each iteration
    also samples the prompted item, scoring a single configuration; in
    joint mode `models` is a (speaker_set, listener_set) pair and the
    whole scenario is scored. Duplicates sampled twice are evaluated
    once. Results are sorted by utility descending, ties by first
    generation, truncated to top_k.
    """
    tables = _as_tables(tables)
    lexicon = _search_lexicon(tables)
    n_nouns, n_adjs = lexicon.shape
    if settings.nouns > n_nouns:
        raise DataError(f"scenario wants {settings.nouns} nouns, lexicon has {n_nouns}")
    if settings.adjectives > n_adjs:
        raise DataError(f"scenario wants {settings.adjectives} adjectives, lexicon has {n_adjs}")

    if settings.mode == MODE_JOINT:
        try:
            speaker_models, listener_models = models
        except (TypeError, ValueError):
            raise DataError("joint mode needs a (speaker, listener) model set pair") from None
        if speaker_models.role != SPEAKER or listener_models.role != LISTENER:
            raise DataError("joint mode needs a speaker set and a listener set, in that order")
    else:
        if not isinstance(models, ModelSet):
            raise DataError("separate mode needs a single model set")
        wanted = SPEAKER if settings.mode == MODE_SEPARATE_SPEAKER else LISTENER
        if models.role != wanted:
            raise DataError(f"mode '{settings.mode}' needs {wanted} models")

    rng = np.random.default_rng(settings.seed)
    pairs = noun_pairs(settings.nouns)
    first_seen: dict[tuple, int] = {}
    # Keys are drawn for every iteration up front; evaluation order can
    # then never affect the outcome.
    for iteration in range(settings.iterations):
        nouns = tuple(sorted(rng.choice(n_nouns, size=settings.nouns, replace=False).tolist()))
        adjs = tuple(sorted(rng.choice(n_adjs, size=settings.adjectives, replace=False).tolist()))
        if settings.mode == MODE_SEPARATE_SPEAKER:
            key = (nouns, adjs, pairs[int(rng.integers(len(pairs)))])
        elif settings.mode == MODE_SEPARATE_LISTENER:
            key = (nouns, adjs, int(rng.integers(settings.adjectives)))
        else:
            key = (nouns, adjs, None)
        if key not in first_seen:
            first_seen[key] = iteration

    def evaluate(key) -> float:
        nouns, adjs, index = key
        scenario = Scenario(nouns, adjs)
        if settings.mode == MODE_JOINT:
            return scenario_joint_utility(tables, scenario, speaker_models, listener_models)
        role = SPEAKER if settings.mode == MODE_SEPARATE_SPEAKER else LISTENER
        return configuration_utility(tables, Configuration(scenario, role, index), models)

    keys = list(first_seen)
    worker_count = _resolve_threads(threads)
    if worker_count > 1 and len(keys) > 1:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            utilities = list(pool.map(evaluate, keys, chunksize=64))
    else:
        utilities = [evaluate(key) for key in keys]

    scored = sorted(
        zip(keys, utilities), key=lambda item: (-item[1], first_seen[item[0]])
    )[: settings.top_k]
    candidates = []
    for (nouns, adjs, index), utility in scored:
        scenario = Scenario(nouns, adjs)
        if settings.mode == MODE_JOINT:
            candidates.append(DesignCandidate(scenario, None, None, utility))
        else:
            role = SPEAKER if settings.mode == MODE_SEPARATE_SPEAKER else LISTENER
            candidates.append(DesignCandidate(scenario, role, index, utility))
    return candidates


# ---------------------------------------------------------------------------
# filters

def _word_set(candidate: DesignCandidate) -> frozenset:
    # Tag by part of speech so a noun index can never collide with an
    # adjective index.
    return frozenset(
        [("n", n) for n in candidate.scenario.nouns]
        + [("a", a) for a in candidate.scenario.adjectives]
    )


def _word_difference(a: frozenset, b: frozenset) -> int:
    return max(len(a - b), len(b - a))


def filter_candidates(
    candidates,
    min_word_difference: int = 2,
    max_word_occurrence: int = 20,
) -> list[DesignCandidate]:
    """Greedy diversity filter over a utility-descending candidate list.

    Walk the list once; keep a candidate only if it differs from every
    kept one by at least min_word_difference words (per side) and none
    of its words has already been used max_word_occurrence times among
    kept candidates.
    """
    candidates = list(candidates)
    if min_word_difference < 0:
        raise DataError("min_word_difference must be non-negative")
    if max_word_occurrence < 1:
        raise DataError("max_word_occurrence must be positive")
    for earlier, later in zip(candidates, candidates[1:]):
        if earlier.utility < later.utility:
            raise DataError("candidates must be sorted by utility descending")
    kept: list[DesignCandidate] = []
    kept_sets: list[frozenset] = []
    occurrences: dict = {}
    for candidate in candidates:
        words = _word_set(candidate)
        if any(_word_difference(words, other) < min_word_difference for other in kept_sets):
            continue
        if any(occurrences.get(w, 0) >= max_word_occurrence for w in words):
            continue
        kept.append(candidate)
        kept_sets.append(words)
        for w in words:
            occurrences[w] = occurrences.get(w, 0) + 1
    return kept


def candidate_to_record(candidate: DesignCandidate, lexicon) -> dict:
    """Word-level record form: {scenario, role?, target_pair|clue?, utility}."""
    record = {"scenario": scenario_record(candidate.scenario, lexicon)}
    if candidate.role is not None:
        config_rec = configuration_record(candidate.configuration, lexicon)
        record["role"] = candidate.role
        if candidate.role == SPEAKER:
            record["target_pair"] = config_rec["target_pair"]
        else:
            record["clue"] = config_rec["clue"]
    record["utility"] = float(candidate.utility)
    return record


def candidate_from_record(record: dict, lexicon) -> DesignCandidate:
    try:
        scenario = scenario_from_record(record["scenario"], lexicon)
        utility = float(record["utility"])
    except (KeyError, TypeError):
        raise DataError(f"malformed candidate record {record!r}") from None
    if record.get("role") is None:
        return DesignCandidate(scenario, None, None, utility)
    config = configuration_from_record(record, lexicon)
    return DesignCandidate(scenario, config.role, config.index, utility)


def confidence_filter(rated) -> list:
    """Keep the items whose mean confidence is strictly above the grand
    mean. Input is (item, mean_confidence) pairs with confidences on the
    1..5 scale."""
    rated = list(rated)
    if not rated:
        raise DataError("no rated entries")
    confidences = np.array([c for _, c in rated], dtype=float)
    if not np.isfinite(confidences).all():
        raise DataError("non-finite confidence")
    if ((confidences < 1) | (confidences > 5)).any():
        raise DataError("confidence outside the 1..5 scale")
    grand = confidences.mean()
    return [item for (item, c) in rated if c > grand]
