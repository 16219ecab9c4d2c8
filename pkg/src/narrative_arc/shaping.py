"""Modulated dialogue generation.

Candidates from a base conversation model carry weights q; the universe
model turns each candidate's hypothetical belief update into an entropy
change delta and a score sigma = exp(alpha * delta) clipped at M. The
modulated weight is

    q_tilde(x) proportional to q(x) * sigma(x)

Greedy selection takes the argmax of q_tilde. Rejection selection draws
x ~ q and accepts with probability sigma(x)/M, which samples exactly from
the normalized q_tilde without computing its normalizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arc import (
    ArcPoint,
    BeliefState,
    NarrativeArc,
    ShapingConfig,
    entropy,
    entropy_change,
    init_belief,
    score,
    update_belief,
)
from .corpus import Dialogue, Utterance
from .conversation import Candidate
from .universe import NaiveBayesModel, classify

__all__ = [
    "ScoredCandidate",
    "GenerationSession",
    "score_candidates",
    "greedy_select",
    "rejection_select",
    "generate_dialogue",
]


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: Candidate
    delta: float
    sigma: float
    q_tilde: float

    @property
    def utterance(self) -> Utterance:
        return self.candidate.utterance


class GenerationSession:
    """Mutable state for one generation run: the dialogue so far, the belief
    it implies, and the models driving selection.

    Scoring is hypothetical and never mutates the session; ``commit``
    absorbs a chosen utterance into the dialogue, belief, and arc. Single
    writer: do not share one session across threads.
    """

    def __init__(self, model: NaiveBayesModel, provider, config: ShapingConfig,
                 rng: np.random.Generator):
        self.model = model
        self.provider = provider
        self.config = config
        self.rng = rng
        self.utterances: list[Utterance] = []
        self.belief: BeliefState = init_belief(model.universe_set)
        self.arc_points: list[ArcPoint] = [
            ArcPoint(
                step=0,
                distribution=self.belief.distribution,
                entropy=entropy(self.belief.distribution),
                delta=0.0,
            )
        ]

    @property
    def dialogue(self) -> Dialogue:
        return Dialogue(tuple(self.utterances))

    @property
    def last_utterance(self) -> Utterance | None:
        return self.utterances[-1] if self.utterances else None

    def arc(self) -> NarrativeArc:
        return NarrativeArc(universe_set=self.model.universe_set,
                            points=tuple(self.arc_points))

    def commit(self, utterance: Utterance) -> ArcPoint:
        """Absorb an utterance: update belief and append an arc point."""
        z = classify(self.model, utterance)
        new = update_belief(self.belief, z)
        point = ArcPoint(
            step=new.step,
            distribution=new.distribution,
            entropy=entropy(new.distribution),
            delta=entropy_change(self.belief, new),
            utterance_text=utterance.text,
        )
        self.belief = new
        self.utterances.append(utterance)
        self.arc_points.append(point)
        return point


def score_one(session: GenerationSession, candidate: Candidate) -> ScoredCandidate:
    z = classify(session.model, candidate.utterance)
    hypothetical = update_belief(session.belief, z)
    delta = entropy_change(session.belief, hypothetical)
    sigma = score(delta, session.config)
    return ScoredCandidate(
        candidate=candidate,
        delta=delta,
        sigma=sigma,
        q_tilde=candidate.q_score * sigma,
    )


def score_candidates(session: GenerationSession, candidates) -> list[ScoredCandidate]:
    """Score candidates against the current belief without mutating it."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidates to score")
    return [score_one(session, c) for c in candidates]


def greedy_select(scored) -> ScoredCandidate:
    """Argmax over q_tilde; exact ties go to the earlier-listed candidate."""
    scored = list(scored)
    if not scored:
        raise ValueError("no scored candidates")
    best = scored[0]
    for sc in scored[1:]:
        if sc.q_tilde > best.q_tilde:
            best = sc
    return best


def rejection_select(session: GenerationSession, candidate_source) -> ScoredCandidate:
    """Draw from the modulated distribution by rejection.

    ``candidate_source`` draws one candidate x ~ q per call. Each draw is
    accepted with probability sigma(x)/M. If the sample budget S runs out,
    the rejected candidate with the highest sigma is returned so generation
    always progresses.
    """
    config = session.config
    best_rejected: ScoredCandidate | None = None
    seen: dict[Candidate, ScoredCandidate] = {}  # belief is fixed within one selection
    for _ in range(config.max_samples):
        cand = candidate_source()
        sc = seen.get(cand)
        if sc is None:
            sc = score_one(session, cand)
            seen[cand] = sc
        r = session.rng.uniform()
        if r <= sc.sigma / config.max_score:
            return sc
        if best_rejected is None or sc.sigma > best_rejected.sigma:
            best_rejected = sc
    assert best_rejected is not None
    return best_rejected


def _sampler_from(candidates: list[Candidate], rng: np.random.Generator):
    weights = np.array([c.q_score for c in candidates])
    weights = weights / weights.sum()

    def draw() -> Candidate:
        return candidates[rng.choice(len(candidates), p=weights)]

    return draw


def generate_dialogue(
    seed_lines,
    n: int,
    model: NaiveBayesModel,
    provider,
    config: ShapingConfig,
    rng: np.random.Generator,
    method: str = "greedy",
    k: int = 32,
) -> tuple[Dialogue, NarrativeArc]:
    """Generate a dialogue of n total lines from seed lines.

    Seeds are absorbed into the belief first (their arc points recorded),
    then each remaining turn draws k candidates from the provider on the
    last line and selects per ``method``. Deterministic under a fixed rng.
    """
    seed_lines = [Utterance(s) if isinstance(s, str) else s for s in seed_lines]
    if not seed_lines:
        raise ValueError("need at least one seed line")
    if n < len(seed_lines):
        raise ValueError(f"n={n} is smaller than the {len(seed_lines)} seed lines")
    if method not in ("greedy", "rejection"):
        raise ValueError(f"unknown method: {method!r}")

    session = GenerationSession(model, provider, config, rng)
    for utt in seed_lines:
        session.commit(utt)

    for _ in range(n - len(seed_lines)):
        candidates = provider.propose(session.last_utterance, k, rng)
        if not candidates:
            raise RuntimeError("conversation model returned no candidates")
        if method == "greedy":
            chosen = greedy_select(score_candidates(session, candidates))
        else:
            chosen = rejection_select(session, _sampler_from(candidates, rng))
        session.commit(chosen.utterance)

    return session.dialogue, session.arc()


def transcript_dict(
    dialogue: Dialogue,
    arc: NarrativeArc,
    config: ShapingConfig,
    method: str,
    seed: int,
    n_seed_lines: int,
) -> dict:
    """Transcript JSON: config, per-line provenance, and the full arc."""
    lines = []
    for i, utt in enumerate(dialogue.utterances):
        point = arc.points[i + 1]
        lines.append(
            {
                "text": utt.text,
                "source": "seed" if i < n_seed_lines else "generated",
                "delta": point.delta,
                "sigma": score(point.delta, config),
            }
        )
    return {
        "config": {
            "alpha": config.alpha,
            "M": config.max_score,
            "S": config.max_samples,
            "method": method,
            "seed": seed,
        },
        "lines": lines,
        "arc": arc.to_dict(),
    }
