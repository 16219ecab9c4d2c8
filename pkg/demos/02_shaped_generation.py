#!/usr/bin/env python3
"""Reveal / neutral / conceal generation side by side.

Builds a small two-topic world (a harbor topic and a desert topic), a pool
of revealing, mildly topical, and topic-free lines, then generates one
greedy dialogue per mode from the same seed line. Revealing dialogue drives
the posterior entropy toward zero; concealing dialogue holds it at ln 2.
"""

import numpy as np

from narrative_arc import LabeledDocument, ShapingConfig, Utterance, generate_dialogue
from narrative_arc.conversation import RandomProvider
from narrative_arc.universe import train

docs = [
    LabeledDocument("east", "harbor tide gull mast anchor salt brine wharf sail compass"),
    LabeledDocument("east", "tide harbor sail mast brine compass wharf gull"),
    LabeledDocument("west", "canyon mesa cactus dust coyote ridge butte sagebrush trail sand"),
    LabeledDocument("west", "mesa canyon trail dust ridge sand cactus coyote"),
]
model = train(docs, remove_stopwords=False)

strong = ["harbor tide mast anchor", "sail compass wharf brine",
          "canyon mesa cactus dust", "coyote ridge butte trail"]
mild = ["harbor mumble jumble thing", "maybe mesa something else",
        "sail mumble who knows", "ridge thing whatever now"]
neutral = [f"mumble jumble things stuff okay fine {i:02d}" for i in range(40)]
pool = [Utterance(f"{t} {i:02d}") for i, t in enumerate(strong * 5 + mild * 5)] \
    + [Utterance(t) for t in neutral]
provider = RandomProvider(pool)

seed_line = "maybe harbor something else okay"
for mode, alpha in (("reveal", 20.0), ("neutral", 0.0), ("conceal", -25.0)):
    config = ShapingConfig.default_for(alpha, len(model.universe_set))
    dialogue, arc = generate_dialogue(
        [seed_line], 10, model, provider, config,
        np.random.default_rng(11), method="greedy", k=16,
    )
    print(f"--- {mode} (alpha={alpha:+.0f}) ---")
    for utt, point in zip(dialogue.utterances, arc.points[1:]):
        print(f"  [H={point.entropy:.3f}] {utt.text}")
    print(f"  final entropy: {arc.final_entropy:.4f}\n")
