"""Literal and pragmatic agents on a worked example.

Reproduces the hand-computable 2x2 chain, then shows the
renormalization flip: a clue whose best literal interpretation and
best pragmatic interpretation are different noun pairs.
"""

from itertools import combinations

import numpy as np

from refgame import (
    AssociationMatrix,
    Configuration,
    Lexicon,
    Scenario,
    listener_probs,
    parse_model_spec,
    predict,
    quantile_normalize,
    speaker_probs,
)

print("=== the worked 2x2 chain ===")
# rows: candidate pairs, columns: adjectives; association scores
scores = np.array([[0.9, 0.5],
                   [0.1, 0.5]])
print("scores:\n", scores)
print("literal listener, clue 0:   ", listener_probs(scores, clue=0))
print("pragmatic listener, alpha 1:", listener_probs(scores, clue=0, alpha=1.0))
# hand chain: L0 = (0.9, 0.1); S1 rows renormalize over both clues;
# the second pair answers clue 1 almost always, which drains mass from
# its clue-0 column; exact result is (27/34, 7/34)
print("exact fractions:            ", np.array([27 / 34, 7 / 34]))
print("pragmatic speaker, target 0:", speaker_probs(scores, target=0, alpha=1.0))
print("exact fractions:            ", np.array([45 / 62, 17 / 62]))

print("\n=== a renormalization flip in a bigger table ===")
rng = np.random.default_rng(0)
nouns = tuple(f"noun{i}" for i in range(8))
adjs = tuple(f"adj{j}" for j in range(8))
lexicon = Lexicon(nouns, adjs)
norm = quantile_normalize(AssociationMatrix("bigram", lexicon, rng.normal(size=(8, 8))))

literal = parse_model_spec("bigram:literal", "listener")
pragmatic = parse_model_spec("bigram:pragmatic:1.0", "listener")

flip = None
for noun_set in combinations(range(8), 3):
    scenario = Scenario(noun_set, (0, 1, 2))
    for clue in range(3):
        config = Configuration(scenario, "listener", clue)
        lit = predict(norm, config, literal)
        prag = predict(norm, config, pragmatic)
        if not set(lit.argmax_answers()) & set(prag.argmax_answers()):
            flip = (config, lit, prag)
            break
    if flip:
        break

config, lit, prag = flip
scenario = config.scenario
pair_names = [
    f"({nouns[scenario.nouns[i]]}, {nouns[scenario.nouns[j]]})" for i, j in scenario.pairs
]
print("scenario nouns:", [nouns[n] for n in scenario.nouns])
print("clue:", adjs[scenario.adjectives[config.index]])
for name, p_lit, p_prag in zip(pair_names, lit.probs, prag.probs):
    print(f"  {name:22s} literal {p_lit:.3f}  pragmatic {p_prag:.3f}")
print("literal top:  ", pair_names[scenario.pairs.index(lit.argmax_answers()[0])])
print("pragmatic top:", pair_names[scenario.pairs.index(prag.argmax_answers()[0])])

print("\n=== alpha sharpens the speaker ===")
spk_config = Configuration(scenario, "speaker", scenario.pairs[0])
for alpha in (0.1, 1.0, 5.0):
    spec = parse_model_spec(f"bigram:pragmatic:{alpha}", "speaker")
    dist = predict(norm, spk_config, spec)
    shown = ", ".join(f"{adjs[scenario.adjectives[a]]}={p:.3f}"
                      for a, p in zip(dist.support, dist.probs))
    print(f"alpha {alpha:>4}: {shown}")
