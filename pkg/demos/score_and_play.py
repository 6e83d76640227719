"""Score rival models against synthetic responses, then let agents play.

Responses are sampled from a pragmatic listener, so the pragmatic
model should win the scoring table; gameplay success is computed
analytically for every speaker-listener pairing.
"""

import numpy as np

from refgame import (
    AssociationMatrix,
    Configuration,
    Lexicon,
    ResponseRecord,
    Scenario,
    answer_support,
    confidence_ttest,
    parse_model_spec,
    predict,
    quantile_normalize,
    render_score_reports,
    score_responses,
    simulate_gameplay,
)

rng = np.random.default_rng(21)
nouns = tuple(f"noun{i}" for i in range(8))
adjs = tuple(f"adj{j}" for j in range(8))
lexicon = Lexicon(nouns, adjs)
norm = quantile_normalize(AssociationMatrix("bigram", lexicon, rng.normal(size=(8, 8))))
tables = {"bigram": norm}

print("=== synthesize 40 listener trials from a pragmatic responder ===")
truth = parse_model_spec("bigram:pragmatic:1.0", "listener")
records = []
for _ in range(40):
    noun_set = tuple(sorted(rng.choice(8, size=3, replace=False).tolist()))
    adj_set = tuple(sorted(rng.choice(8, size=3, replace=False).tolist()))
    config = Configuration(Scenario(noun_set, adj_set), "listener", int(rng.integers(3)))
    dist = predict(norm, config, truth)
    support = answer_support(config)
    draws = rng.choice(len(support), size=12, p=dist.probs)
    counts = {}
    for d in draws:
        counts[support[d]] = counts.get(support[d], 0) + 1
    confidences = tuple(int(c) for c in rng.integers(2, 6, size=12))
    records.append(ResponseRecord(config, counts, confidences))

reports = [
    score_responses(tables, spec, records)
    for spec in ("bigram:literal", "bigram:pragmatic:0.1",
                 "bigram:pragmatic:1.0", "bigram:pragmatic:5.0")
]
print(render_score_reports(reports, fmt="table"))

print("=== do speakers rate the task harder than listeners? ===")
speaker_conf = rng.integers(1, 4, size=30)           # lower ratings
listener_conf = np.concatenate([r.confidences for r in records[:10]])
t, p = confidence_ttest(speaker_conf, listener_conf)
print(f"welch t = {t:.2f}, p = {p:.4f}")

print("\n=== analytic gameplay: who plays well with whom? ===")
scenarios = []
for _ in range(12):
    noun_set = tuple(sorted(rng.choice(8, size=3, replace=False).tolist()))
    adj_set = tuple(sorted(rng.choice(8, size=3, replace=False).tolist()))
    scenarios.append(Scenario(noun_set, adj_set))

pairings = [
    ("bigram:literal", "bigram:literal"),
    ("bigram:literal", "bigram:pragmatic:1.0"),
    ("bigram:pragmatic:1.0", "bigram:literal"),
    ("bigram:pragmatic:1.0", "bigram:pragmatic:1.0"),
]
print(f"{'speaker':24s} {'listener':24s} success (chance 0.333)")
for speaker, listener in pairings:
    report = simulate_gameplay(tables, scenarios, speaker, listener)
    print(f"{speaker:24s} {listener:24s} {report.mean:.3f} +- {report.sem:.3f}")
