#!/usr/bin/env python3
"""Narrative arc of a fixed scene.

Loads the bundled 20-line public-domain scene and the bundled 3-topic toy
model, runs the recursive belief update line by line, and prints the arc:
per-step posterior over topics, entropy, and each line's entropy change.
Writes the same arc as JSON and CSV next to this script.
"""

from importlib import resources
from pathlib import Path

from narrative_arc import compute_arc, load_script
from narrative_arc.universe import load_model

data = resources.files("narrative_arc.data")
dialogue = load_script(str(data.joinpath("sample_script.txt")))
model = load_model(str(data.joinpath("toy_model.json")))

arc = compute_arc(dialogue, model)

labels = model.labels
print(f"universes: {', '.join(labels)}")
print(f"{'step':>4}  {'entropy':>8}  {'delta':>8}  posterior")
for point in arc.points:
    bar = "  ".join(f"{lab}={p:.3f}" for lab, p in zip(labels, point.distribution))
    text = f"  | {point.utterance_text}" if point.utterance_text else ""
    print(f"{point.step:>4}  {point.entropy:>8.4f}  {point.delta:>+8.4f}  {bar}{text}")

out = Path(__file__).with_suffix("")
Path(f"{out}.json").write_text(__import__("json").dumps(arc.to_dict(), indent=2))
Path(f"{out}.csv").write_text(arc.to_csv())
print(f"\nwrote {out}.json and {out}.csv")
