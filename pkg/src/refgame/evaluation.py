"""Scoring model predictions against responses, and analytic gameplay.

Two per-trial scores: tie-tolerant top-answer match (did the modal
response land in the model's argmax set) and Spearman rank correlation
between predicted probabilities and response counts. Aggregation is
mean plus standard error. Gameplay success for a speaker-listener pair
is computed analytically by summing over clue choices instead of
sampling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from scipy import stats

from .association import NormalizedAssociation
from .errors import DataError
from .rsa import (
    LISTENER,
    SPEAKER,
    TIE_TOL,
    Configuration,
    ModelSpec,
    PredictionDistribution,
    Scenario,
    answer_support,
    configuration_from_record,
    configuration_record,
    parse_model_spec,
    predict,
)


@dataclass(frozen=True, eq=True)
class ResponseRecord:
    """Observed answers for one configuration: per-answer counts plus the
    responders' 1..5 confidence ratings."""

    configuration: Configuration
    counts: dict
    confidences: tuple[int, ...] = ()

    def __post_init__(self):
        support = answer_support(self.configuration)
        counts = dict(self.counts)
        for answer, count in counts.items():
            if answer not in support:
                raise DataError(f"answer {answer!r} not a valid answer here")
            if not isinstance(count, (int, np.integer)) or count < 0:
                raise DataError(f"bad count {count!r} for answer {answer!r}")
        if sum(counts.values()) < 1:
            raise DataError("response record has no responses")
        confidences = tuple(int(c) for c in self.confidences)
        if any(not 1 <= c <= 5 for c in confidences):
            raise DataError("confidence outside the 1..5 scale")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "confidences", confidences)

    @property
    def total(self) -> int:
        return int(sum(self.counts.values()))

    def count_vector(self) -> np.ndarray:
        support = answer_support(self.configuration)
        return np.array([self.counts.get(answer, 0) for answer in support], dtype=float)

    def modal_answers(self) -> tuple:
        vector = self.count_vector()
        top = vector.max()
        support = answer_support(self.configuration)
        return tuple(a for a, c in zip(support, vector) if c == top)


def top_answer(prediction: PredictionDistribution, record: ResponseRecord) -> int:
    """1 if the modal response intersects the model's argmax set (ties
    within TIE_TOL count), else 0."""
    support = answer_support(record.configuration)
    if tuple(prediction.support) != support:
        raise DataError("prediction support does not match the configuration")
    predicted = set(prediction.argmax_answers())
    observed = set(record.modal_answers())
    return int(bool(predicted & observed))


def spearman(x, y) -> float:
    """Spearman correlation via descending average ranks.

    Either vector constant yields 0 by convention (no ranking signal,
    not an error).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("rank correlation needs two equal-length vectors")
    if x.size < 2:
        raise DataError("rank correlation needs at least two entries")
    rank_x = stats.rankdata(-x, method="average")
    rank_y = stats.rankdata(-y, method="average")
    if (rank_x == rank_x[0]).all() or (rank_y == rank_y[0]).all():
        return 0.0
    rank_x = rank_x - rank_x.mean()
    rank_y = rank_y - rank_y.mean()
    return float((rank_x @ rank_y) / np.sqrt((rank_x @ rank_x) * (rank_y @ rank_y)))


def rank_correlation(prediction: PredictionDistribution, record: ResponseRecord) -> float:
    support = answer_support(record.configuration)
    if tuple(prediction.support) != support:
        raise DataError("prediction support does not match the configuration")
    return spearman(prediction.probs, record.count_vector())


def aggregate(scores) -> tuple[float, float]:
    """Mean and standard error (ddof=1). All-equal scores give SEM
    exactly 0.0."""
    scores = np.asarray(list(scores), dtype=float)
    if scores.size < 2:
        raise DataError("aggregation needs at least two scores")
    mean = float(scores.mean())
    if (scores == scores[0]).all():
        return mean, 0.0
    sem = float(scores.std(ddof=1) / np.sqrt(scores.size))
    return mean, sem


@dataclass(frozen=True)
class ScoreReport:
    """Per-trial scores for one model over a response set, aggregated."""

    model: ModelSpec
    top_answers: tuple[int, ...]
    rank_correlations: tuple[float, ...]
    top_mean: float
    top_sem: float
    rank_mean: float
    rank_sem: float


def score_responses(tables, model, records) -> ScoreReport:
    """Score a model against every response record.

    `model` is a ModelSpec or a "metric:depth[:alpha]" string; a string
    is bound to each record's role, so one string can score a mixed-role
    response file. `tables` maps metric ids to normalized matrices.
    """
    records = list(records)
    if not records:
        raise DataError("no response records")
    if isinstance(tables, NormalizedAssociation):
        tables = {tables.metric: tables}
    tops = []
    ranks = []
    for record in records:
        if isinstance(model, ModelSpec):
            spec = model
        else:
            spec = parse_model_spec(model, record.configuration.role)
        if spec.metric not in tables:
            raise DataError(f"no matrix supplied for metric '{spec.metric}'")
        prediction = predict(tables[spec.metric], record.configuration, spec)
        tops.append(top_answer(prediction, record))
        ranks.append(rank_correlation(prediction, record))
    top_mean, top_sem = aggregate(tops)
    rank_mean, rank_sem = aggregate(ranks)
    if isinstance(model, ModelSpec):
        spec_out = model
    else:
        spec_out = parse_model_spec(model, records[0].configuration.role)
    return ScoreReport(
        spec_out, tuple(tops), tuple(ranks), top_mean, top_sem, rank_mean, rank_sem
    )


# ---------------------------------------------------------------------------
# analytic gameplay

def distribution_from_counts(record: ResponseRecord) -> PredictionDistribution:
    """Relative answer frequencies as a distribution (for estimating
    gameplay terms from observed responses)."""
    vector = record.count_vector()
    return PredictionDistribution(answer_support(record.configuration), vector / vector.sum())


def average_success(
    scenario: Scenario,
    target: tuple[int, int],
    speaker_dist: PredictionDistribution,
    listener_dists: Mapping,
) -> float:
    """Probability the listener recovers the target when the speaker
    samples a clue: sum over clues of P(clue) * P(target | clue)."""
    if target not in scenario.pairs:
        raise DataError(f"target {target!r} is not a pair of this scenario")
    if tuple(speaker_dist.support) != tuple(range(scenario.m)):
        raise DataError("speaker distribution does not cover the scenario's adjectives")
    total = 0.0
    for answer, p_clue in zip(speaker_dist.support, speaker_dist.probs):
        if p_clue == 0:
            continue
        if answer not in listener_dists:
            raise DataError(f"no listener distribution for clue {answer!r} with positive mass")
        listener = listener_dists[answer]
        if tuple(listener.support) != scenario.pairs:
            raise DataError("listener distribution does not cover the scenario's pairs")
        total += float(p_clue) * listener.prob(target)
    return float(total)


@dataclass(frozen=True)
class GameplayReport:
    """Pair success for every (scenario, target pair), with per-scenario
    means and the overall mean plus SEM."""

    scenarios: tuple[Scenario, ...]
    successes: tuple[tuple[float, ...], ...]
    scenario_means: tuple[float, ...]
    mean: float
    sem: float


def simulate_gameplay(tables, scenarios, speaker_spec, listener_spec) -> GameplayReport:
    """Play every target pair of every scenario analytically.

    Model specs are ModelSpec values or "metric:depth[:alpha]" strings.
    """
    scenarios = tuple(scenarios)
    if not scenarios:
        raise DataError("no scenarios to play")
    if not isinstance(speaker_spec, ModelSpec):
        speaker_spec = parse_model_spec(speaker_spec, SPEAKER)
    if not isinstance(listener_spec, ModelSpec):
        listener_spec = parse_model_spec(listener_spec, LISTENER)
    if speaker_spec.role != SPEAKER:
        raise DataError("speaker_spec must be a speaker model")
    if listener_spec.role != LISTENER:
        raise DataError("listener_spec must be a listener model")
    if isinstance(tables, NormalizedAssociation):
        tables = {tables.metric: tables}
    for spec in (speaker_spec, listener_spec):
        if spec.metric not in tables:
            raise DataError(f"no matrix supplied for metric '{spec.metric}'")
    all_successes = []
    scenario_means = []
    flat = []
    for scenario in scenarios:
        listener_dists = {
            a: predict(
                tables[listener_spec.metric],
                Configuration(scenario, LISTENER, a),
                listener_spec,
            )
            for a in range(scenario.m)
        }
        row = []
        for pair in scenario.pairs:
            speaker_dist = predict(
                tables[speaker_spec.metric],
                Configuration(scenario, SPEAKER, pair),
                speaker_spec,
            )
            row.append(average_success(scenario, pair, speaker_dist, listener_dists))
        all_successes.append(tuple(row))
        scenario_means.append(float(np.mean(row)))
        flat.extend(row)
    mean, sem = aggregate(flat)
    return GameplayReport(scenarios, tuple(all_successes), tuple(scenario_means), mean, sem)


# ---------------------------------------------------------------------------
# model and metric comparison

def metric_rank_correlation(a: NormalizedAssociation, b: NormalizedAssociation) -> float:
    """Spearman correlation between two metrics' normalized cells."""
    if a.lexicon.nouns != b.lexicon.nouns or a.lexicon.adjectives != b.lexicon.adjectives:
        raise DataError("matrices disagree on the lexicon")
    return spearman(a.values.ravel(), b.values.ravel())


def model_agreement(spec_a, spec_b, tables, configurations) -> tuple[float, float]:
    """How often two models pick the same top answer, and the mean rank
    correlation of their distributions, over configurations.

    Specs are ModelSpec values or strings bound to the configurations'
    shared role.
    """
    configurations = list(configurations)
    if not configurations:
        raise DataError("no configurations given")
    roles = {config.role for config in configurations}
    if len(roles) > 1:
        raise DataError("configurations mix roles")
    role = configurations[0].role
    if not isinstance(spec_a, ModelSpec):
        spec_a = parse_model_spec(spec_a, role)
    if not isinstance(spec_b, ModelSpec):
        spec_b = parse_model_spec(spec_b, role)
    if spec_a.role != spec_b.role or spec_a.role != role:
        raise DataError(
            f"model roles ({spec_a.role}, {spec_b.role}) do not match the "
            f"configurations' role '{role}'"
        )
    if isinstance(tables, NormalizedAssociation):
        tables = {tables.metric: tables}
    matches = []
    correlations = []
    for config in configurations:
        dist_a = predict(_lookup(tables, spec_a.metric), config, spec_a)
        dist_b = predict(_lookup(tables, spec_b.metric), config, spec_b)
        tops_a = set(dist_a.argmax_answers())
        tops_b = set(dist_b.argmax_answers())
        matches.append(int(bool(tops_a & tops_b)))
        correlations.append(spearman(dist_a.probs, dist_b.probs))
    return float(np.mean(matches)), float(np.mean(correlations))


def _lookup(tables, metric):
    try:
        return tables[metric]
    except KeyError:
        raise DataError(f"no matrix supplied for metric '{metric}'") from None


def confidence_ttest(group_a, group_b) -> tuple[float, float]:
    """Welch's t-test (two-sided) on two confidence samples.

    Both groups zero-variance: equal means give (0.0, 1.0), unequal
    means give (signed infinity, 0.0).
    """
    a = np.asarray(list(group_a), dtype=float)
    b = np.asarray(list(group_b), dtype=float)
    if a.size < 2 or b.size < 2:
        raise DataError("each group needs at least two values")
    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    mean_a = float(a.mean())
    mean_b = float(b.mean())
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return 0.0, 1.0
        return float(np.sign(mean_a - mean_b)) * float("inf"), 0.0
    se_sq = var_a / a.size + var_b / b.size
    t = (mean_a - mean_b) / float(np.sqrt(se_sq))
    df = se_sq**2 / (
        (var_a / a.size) ** 2 / (a.size - 1) + (var_b / b.size) ** 2 / (b.size - 1)
    )
    p = 2.0 * float(stats.t.sf(abs(t), df))
    return t, p


# ---------------------------------------------------------------------------
# response files (JSONL)

def response_to_record(response: ResponseRecord, lexicon) -> dict:
    config = response.configuration
    answers = []
    for answer, count in response.counts.items():
        if config.role == LISTENER:
            i, j = answer
            answers.append(
                [[lexicon.nouns[config.scenario.nouns[i]], lexicon.nouns[config.scenario.nouns[j]]], count]
            )
        else:
            answers.append([lexicon.adjectives[config.scenario.adjectives[answer]], count])
    answers.sort(key=lambda item: json.dumps(item[0]))
    return {
        "configuration": configuration_record(config, lexicon),
        "answers": answers,
        "confidences": list(response.confidences),
    }


def response_from_record(record: dict, lexicon) -> ResponseRecord:
    try:
        config = configuration_from_record(record["configuration"], lexicon)
        answer_items = record["answers"]
        confidences = record.get("confidences", [])
    except (KeyError, TypeError):
        raise DataError(f"malformed response record {record!r}") from None
    scenario = config.scenario
    counts = {}
    for item in answer_items:
        try:
            answer_words, count = item
        except (TypeError, ValueError):
            raise DataError(f"malformed answer entry {item!r}") from None
        if config.role == LISTENER:
            positions = []
            for word in answer_words:
                if word not in lexicon.noun_index:
                    raise DataError(f"noun '{word}' absent")
                lex_idx = lexicon.noun_index[word]
                if lex_idx not in scenario.nouns:
                    raise DataError(f"answer noun '{word}' not in scenario")
                positions.append(scenario.nouns.index(lex_idx))
            answer: object = tuple(sorted(positions))
        else:
            if answer_words not in lexicon.adjective_index:
                raise DataError(f"adjective '{answer_words}' absent")
            lex_idx = lexicon.adjective_index[answer_words]
            if lex_idx not in scenario.adjectives:
                raise DataError(f"answer adjective '{answer_words}' not in scenario")
            answer = scenario.adjectives.index(lex_idx)
        if answer in counts:
            raise DataError(f"duplicate answer entry {answer_words!r}")
        counts[answer] = int(count)
    return ResponseRecord(config, counts, tuple(int(c) for c in confidences))


def save_responses(responses, lexicon, path: str | Path) -> None:
    lines = [
        json.dumps(response_to_record(r, lexicon), sort_keys=True) for r in responses
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_responses(path: str | Path, lexicon) -> list[ResponseRecord]:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            raise DataError(f"{path}:{lineno}: malformed JSON") from None
        records.append(response_from_record(record, lexicon))
    if not records:
        raise DataError(f"{path}: no response records")
    return records


# ---------------------------------------------------------------------------
# report rendering

def _format_float(x: float) -> str:
    return repr(float(x))


def render_score_reports(reports, fmt: str = "tsv") -> str:
    """Render ScoreReports as TSV or an aligned table."""
    rows = [
        (
            r.model.spec_string(),
            r.top_mean,
            r.top_sem,
            r.rank_mean,
            r.rank_sem,
        )
        for r in reports
    ]
    header = ("model", "top_mean", "top_sem", "rank_mean", "rank_sem")
    if fmt == "tsv":
        lines = ["# " + "\t".join(header)]
        for row in rows:
            lines.append("\t".join([row[0]] + [_format_float(v) for v in row[1:]]))
        return "\n".join(lines) + "\n"
    if fmt == "table":
        text_rows = [[row[0]] + [f"{v:.3f}" for v in row[1:]] for row in rows]
        return _aligned_table([list(header)] + text_rows)
    raise DataError(f"unknown format {fmt!r}")


def render_matrix(labels, matrix, fmt: str = "tsv", title: str | None = None) -> str:
    """Render a square comparison matrix with row/column labels."""
    matrix = np.asarray(matrix, dtype=float)
    lines = []
    if title is not None:
        lines.append(f"# {title}")
    if fmt == "tsv":
        lines.append("# \t" + "\t".join(labels))
        for label, row in zip(labels, matrix):
            lines.append(label + "\t" + "\t".join(_format_float(v) for v in row))
        return "\n".join(lines) + "\n"
    if fmt == "table":
        text_rows = [[""] + list(labels)]
        for label, row in zip(labels, matrix):
            text_rows.append([label] + [f"{v:.3f}" for v in row])
        return ("\n".join(lines) + "\n" if lines else "") + _aligned_table(text_rows)
    raise DataError(f"unknown format {fmt!r}")


def _aligned_table(rows: list[list[str]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
