"""Command-line front end.

Subcommands: ingest, normalize, predict, oed, score, compare, simulate.
Every file-writing command also writes a <output>.manifest.json recording
the command, resolved settings, seed, and sha256 digests of its inputs,
so any output can be reproduced exactly. Exit codes: 0 success, 1 domain
error in the data, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .association import (
    AssociationMatrix,
    NormalizedAssociation,
    bigram_association,
    cosine_association,
    load_association,
    load_normalized,
    quantile_normalize,
    relatedness_association,
    save_association,
    save_normalized,
    topic_association,
)
from .errors import DataError
from .evaluation import (
    load_responses,
    model_agreement,
    metric_rank_correlation,
    render_matrix,
    render_score_reports,
    score_responses,
    simulate_gameplay,
)
from .lexicon import (
    load_counts,
    load_embeddings,
    load_lexicon,
    load_relatedness,
    load_topics,
)
from .oed import (
    MODE_JOINT,
    MODES,
    ModelSet,
    SearchSettings,
    candidate_to_record,
    filter_candidates,
    monte_carlo_search,
)
from .rsa import (
    LISTENER,
    SPEAKER,
    configuration_from_record,
    parse_model_spec,
    scenario_from_record,
)

_LITERAL_ALL = (
    "bigram:literal",
    "embedding-cosine:literal",
    "graph-relatedness:literal",
    "topic-distance:literal",
)

# Experiment presets: scenario shape, search mode, and model set.
PRESETS = {
    "exp1": {"nouns": 5, "adjectives": 8, "mode": "joint", "models": _LITERAL_ALL},
    "exp2-speaker": {
        "nouns": 3,
        "adjectives": 4,
        "mode": "separate-speaker",
        "models": _LITERAL_ALL,
    },
    "exp2-listener": {
        "nouns": 3,
        "adjectives": 4,
        "mode": "separate-listener",
        "models": _LITERAL_ALL,
    },
    "exp3": {
        "nouns": 3,
        "adjectives": 3,
        "mode": "joint",
        "models": (
            "bigram:literal",
            "embedding-cosine:literal",
            "graph-relatedness:literal",
        ),
    },
    "exp4": {
        "nouns": 3,
        "adjectives": 3,
        "mode": "joint",
        "models": ("bigram:literal", "bigram:pragmatic:1.0"),
    },
}

_INGEST_KINDS = ("counts", "embeddings", "relatedness", "topics")


class _UsageError(Exception):
    """Bad flag values detected after argparse: exit code 2."""


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility sidecar for one command invocation."""

    command: str
    settings: dict
    seed: int | None
    inputs: dict
    version: str

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "settings": self.settings,
            "seed": self.seed,
            "inputs": self.inputs,
            "version": self.version,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_manifest(output: str, command: str, settings: dict, seed: int | None, inputs) -> None:
    manifest = RunManifest(
        command=command,
        settings=settings,
        seed=seed,
        inputs={str(p): _sha256(p) for p in inputs},
        version=__version__,
    )
    Path(str(output) + ".manifest.json").write_text(manifest.to_json())


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _parse_spec(text: str, role: str):
    # Bad model strings are usage errors (exit 2), not data errors.
    try:
        return parse_model_spec(text, role)
    except DataError as exc:
        raise _UsageError(str(exc)) from None


def _load_matrices(entries) -> dict[str, NormalizedAssociation]:
    """Load --matrix flags ("metric=path" or bare path) into a metric map."""
    tables: dict[str, NormalizedAssociation] = {}
    for entry in entries:
        label = None
        path = entry
        if "=" in entry:
            label, path = entry.split("=", 1)
            label = label.strip()
        norm = load_normalized(path)
        if label and label != norm.metric:
            raise DataError(f"matrix {path} holds metric '{norm.metric}', not '{label}'")
        if norm.metric in tables:
            raise DataError(f"metric '{norm.metric}' supplied twice")
        tables[norm.metric] = norm
    if not tables:
        raise _UsageError("at least one --matrix is required")
    lexicons = [t.lexicon for t in tables.values()]
    first = lexicons[0]
    for other in lexicons[1:]:
        if other.nouns != first.nouns or other.adjectives != first.adjectives:
            raise DataError("matrices disagree on the lexicon")
    return tables


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc})") from None


def _load_jsonl(path: str) -> list:
    records = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError:
            raise DataError(f"{path}:{lineno}: malformed JSON") from None
    if not records:
        raise DataError(f"{path}: empty record file")
    return records


# ---------------------------------------------------------------------------
# subcommands

def cmd_ingest(args) -> int:
    lexicon = load_lexicon(args.lexicon)
    if args.kind == "counts":
        assoc = bigram_association(load_counts(args.input, lexicon))
    elif args.kind == "embeddings":
        assoc = cosine_association(load_embeddings(args.input, lexicon))
    elif args.kind == "relatedness":
        assoc = relatedness_association(load_relatedness(args.input, lexicon))
    else:
        assoc = topic_association(load_topics(args.input, lexicon))
    save_association(assoc, args.output)
    _write_manifest(
        args.output,
        "ingest",
        {"kind": args.kind, "input": args.input, "lexicon": args.lexicon, "output": args.output},
        None,
        [args.input, args.lexicon],
    )
    return 0


def cmd_normalize(args) -> int:
    assoc = load_association(args.input)
    save_normalized(quantile_normalize(assoc), args.output)
    _write_manifest(
        args.output,
        "normalize",
        {"input": args.input, "output": args.output},
        None,
        [args.input],
    )
    return 0


def cmd_predict(args) -> int:
    tables = _load_matrices(args.matrix)
    lexicon = next(iter(tables.values())).lexicon
    config = configuration_from_record(_load_json(args.config), lexicon)
    spec = _parse_spec(args.model, config.role)
    if spec.metric not in tables:
        raise DataError(f"no matrix supplied for metric '{spec.metric}'")
    from .rsa import predict as run_predict

    dist = run_predict(tables[spec.metric], config, spec)
    lines = ["# answer\tprobability"]
    for answer, prob in zip(dist.support, dist.probs):
        if config.role == LISTENER:
            i, j = answer
            name = f"{lexicon.nouns[config.scenario.nouns[i]]},{lexicon.nouns[config.scenario.nouns[j]]}"
        else:
            name = lexicon.adjectives[config.scenario.adjectives[answer]]
        lines.append(f"{name}\t{repr(float(prob))}")
    _emit("\n".join(lines) + "\n", args.output)
    if args.output:
        _write_manifest(
            args.output,
            "predict",
            {
                "matrix": list(args.matrix),
                "config": args.config,
                "model": args.model,
                "output": args.output,
            },
            None,
            [e.split("=", 1)[-1] for e in args.matrix] + [args.config],
        )
    return 0


def _resolve_oed_settings(args) -> dict:
    resolved = {"nouns": None, "adjectives": None, "mode": None, "models": None}
    if args.preset:
        if args.preset not in PRESETS:
            raise _UsageError(
                f"unknown preset {args.preset!r} (have {', '.join(sorted(PRESETS))})"
            )
        resolved.update(PRESETS[args.preset])
    if args.nouns is not None:
        resolved["nouns"] = args.nouns
    if args.adjectives is not None:
        resolved["adjectives"] = args.adjectives
    if args.mode is not None:
        resolved["mode"] = args.mode
    if args.model:
        resolved["models"] = tuple(args.model)
    for key in ("nouns", "adjectives", "mode", "models"):
        if resolved[key] is None:
            raise _UsageError(f"--{key if key != 'models' else 'model'} required without a preset")
    return resolved


def cmd_oed(args) -> int:
    resolved = _resolve_oed_settings(args)
    tables = _load_matrices(args.matrix)
    lexicon = next(iter(tables.values())).lexicon
    settings = SearchSettings(
        nouns=resolved["nouns"],
        adjectives=resolved["adjectives"],
        mode=resolved["mode"],
        iterations=args.iterations,
        seed=args.seed,
        top_k=args.top,
    )
    if settings.mode == MODE_JOINT:
        models = (
            ModelSet(tuple(_parse_spec(s, SPEAKER) for s in resolved["models"])),
            ModelSet(tuple(_parse_spec(s, LISTENER) for s in resolved["models"])),
        )
        specs = models[0].models + models[1].models
    else:
        role = SPEAKER if settings.mode == "separate-speaker" else LISTENER
        models = ModelSet(tuple(_parse_spec(s, role) for s in resolved["models"]))
        specs = models.models
    for spec in specs:
        if spec.metric not in tables:
            raise DataError(f"no matrix supplied for metric '{spec.metric}'")
    candidates = monte_carlo_search(tables, models, settings)
    if args.filter:
        candidates = filter_candidates(
            candidates,
            min_word_difference=args.min_word_diff,
            max_word_occurrence=args.max_word_occurrence,
        )
    lines = [json.dumps(candidate_to_record(c, lexicon), sort_keys=True) for c in candidates]
    Path(args.output).write_text("\n".join(lines) + ("\n" if lines else ""))
    _write_manifest(
        args.output,
        "oed",
        {
            "matrix": list(args.matrix),
            "preset": args.preset,
            "nouns": settings.nouns,
            "adjectives": settings.adjectives,
            "mode": settings.mode,
            "models": list(resolved["models"]),
            "iterations": settings.iterations,
            "top": settings.top_k,
            "filter": bool(args.filter),
            "min_word_diff": args.min_word_diff,
            "max_word_occurrence": args.max_word_occurrence,
            "output": args.output,
        },
        settings.seed,
        [e.split("=", 1)[-1] for e in args.matrix],
    )
    return 0


def cmd_score(args) -> int:
    tables = _load_matrices(args.matrix)
    lexicon = next(iter(tables.values())).lexicon
    records = load_responses(args.responses, lexicon)
    reports = [score_responses(tables, model, records) for model in args.model]
    _emit(render_score_reports(reports, fmt=args.format), args.output)
    if args.output:
        _write_manifest(
            args.output,
            "score",
            {
                "matrix": list(args.matrix),
                "responses": args.responses,
                "models": list(args.model),
                "format": args.format,
                "output": args.output,
            },
            None,
            [e.split("=", 1)[-1] for e in args.matrix] + [args.responses],
        )
    return 0


def cmd_compare(args) -> int:
    tables = _load_matrices(args.matrix)
    lexicon = next(iter(tables.values())).lexicon
    metrics = sorted(tables)
    sections = []

    corr = [[metric_rank_correlation(tables[a], tables[b]) for b in metrics] for a in metrics]
    sections.append(render_matrix(metrics, corr, fmt=args.format, title="metric rank correlation"))

    if args.configs:
        records = _load_jsonl(args.configs)
        configs = [configuration_from_record(r, lexicon) for r in records]
        by_role: dict[str, list] = {}
        for config in configs:
            by_role.setdefault(config.role, []).append(config)
        for role in sorted(by_role):
            role_configs = by_role[role]
            if args.model:
                specs = [_parse_spec(s, role) for s in args.model]
            else:
                specs = [_parse_spec(f"{m}:literal", role) for m in metrics]
            for spec in specs:
                if spec.metric not in tables:
                    raise DataError(f"no matrix supplied for metric '{spec.metric}'")
            labels = [s.spec_string() for s in specs]
            tops = [[0.0] * len(specs) for _ in specs]
            ranks = [[0.0] * len(specs) for _ in specs]
            for i, spec_a in enumerate(specs):
                for j, spec_b in enumerate(specs):
                    top, rank = model_agreement(spec_a, spec_b, tables, role_configs)
                    tops[i][j] = top
                    ranks[i][j] = rank
            sections.append(
                render_matrix(labels, tops, fmt=args.format, title=f"{role} top-answer agreement")
            )
            sections.append(
                render_matrix(
                    labels, ranks, fmt=args.format, title=f"{role} prediction rank correlation"
                )
            )

    _emit("\n".join(sections), args.output)
    if args.output:
        inputs = [e.split("=", 1)[-1] for e in args.matrix]
        if args.configs:
            inputs.append(args.configs)
        _write_manifest(
            args.output,
            "compare",
            {
                "matrix": list(args.matrix),
                "configs": args.configs,
                "models": list(args.model or []),
                "format": args.format,
                "output": args.output,
            },
            None,
            inputs,
        )
    return 0


def cmd_simulate(args) -> int:
    tables = _load_matrices(args.matrix)
    lexicon = next(iter(tables.values())).lexicon
    records = _load_jsonl(args.scenarios)
    scenarios = []
    for record in records:
        # accept bare scenario records and oed candidate records
        if "scenario" in record:
            record = record["scenario"]
        scenarios.append(scenario_from_record(record, lexicon))
    speaker_spec = _parse_spec(args.speaker, SPEAKER)
    listener_spec = _parse_spec(args.listener, LISTENER)
    report = simulate_gameplay(tables, scenarios, speaker_spec, listener_spec)
    if args.format == "tsv":
        lines = ["# nouns\tadjectives\tmean_success"]
        for scenario, mean in zip(report.scenarios, report.scenario_means):
            nouns = " ".join(lexicon.nouns[n] for n in scenario.nouns)
            adjs = " ".join(lexicon.adjectives[a] for a in scenario.adjectives)
            lines.append(f"{nouns}\t{adjs}\t{repr(float(mean))}")
        lines.append(f"# overall\tmean={repr(report.mean)}\tsem={repr(report.sem)}")
        text = "\n".join(lines) + "\n"
    else:
        rows = [["nouns", "adjectives", "mean_success"]]
        for scenario, mean in zip(report.scenarios, report.scenario_means):
            rows.append(
                [
                    " ".join(lexicon.nouns[n] for n in scenario.nouns),
                    " ".join(lexicon.adjectives[a] for a in scenario.adjectives),
                    f"{mean:.3f}",
                ]
            )
        rows.append(["overall", "", f"{report.mean:.3f} (SEM {report.sem:.3f})"])
        from .evaluation import _aligned_table

        text = _aligned_table(rows)
    _emit(text, args.output)
    if args.output:
        _write_manifest(
            args.output,
            "simulate",
            {
                "matrix": list(args.matrix),
                "scenarios": args.scenarios,
                "speaker": args.speaker,
                "listener": args.listener,
                "format": args.format,
                "output": args.output,
            },
            None,
            [e.split("=", 1)[-1] for e in args.matrix] + [args.scenarios],
        )
    return 0


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="refgame",
        description="Reference-game toolkit: semantic metrics, RSA agents, design search, scoring.",
    )
    parser.add_argument("--version", action="version", version=f"refgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a raw association matrix from a resource file")
    p.add_argument("kind", choices=_INGEST_KINDS)
    p.add_argument("input")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("normalize", help="quantile-normalize a raw matrix")
    p.add_argument("input")
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_normalize)

    p = sub.add_parser("predict", help="run one model on one configuration")
    p.add_argument("--matrix", action="append", required=True, metavar="[METRIC=]PATH")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True, metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("oed", help="search for informative scenarios or configurations")
    p.add_argument("--matrix", action="append", required=True, metavar="[METRIC=]PATH")
    p.add_argument("--model", action="append", metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--nouns", type=int)
    p.add_argument("--adjectives", type=int)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--iterations", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top", type=int, default=500)
    p.add_argument("--filter", action="store_true", help="apply the diversity filter")
    p.add_argument("--min-word-diff", type=int, default=2)
    p.add_argument("--max-word-occurrence", type=int, default=20)
    p.add_argument("--output", required=True)
    p.set_defaults(handler=cmd_oed)

    p = sub.add_parser("score", help="score models against response records")
    p.add_argument("--matrix", action="append", required=True, metavar="[METRIC=]PATH")
    p.add_argument("--responses", required=True)
    p.add_argument("--model", action="append", required=True, metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--format", choices=("tsv", "table"), default="tsv")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_score)

    p = sub.add_parser("compare", help="metric-vs-metric and model-vs-model agreement matrices")
    p.add_argument("--matrix", action="append", required=True, metavar="[METRIC=]PATH")
    p.add_argument("--configs", help="JSONL of configuration records")
    p.add_argument("--model", action="append", metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--format", choices=("tsv", "table"), default="tsv")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("simulate", help="analytic speaker-listener gameplay over scenarios")
    p.add_argument("--matrix", action="append", required=True, metavar="[METRIC=]PATH")
    p.add_argument("--scenarios", required=True, help="JSONL of scenario or candidate records")
    p.add_argument("--speaker", required=True, metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--listener", required=True, metavar="METRIC:DEPTH[:ALPHA]")
    p.add_argument("--format", choices=("tsv", "table"), default="tsv")
    p.add_argument("--output")
    p.set_defaults(handler=cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        name = exc.filename if exc.filename else exc
        print(f"error: no such input: {name}", file=sys.stderr)
        return 2
    except (IsADirectoryError, PermissionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
