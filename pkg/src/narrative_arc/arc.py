"""The information-theoretic core.

A belief over universes starts uniform and is updated once per utterance:

    p_t(u) = p_{t-1}(u) * z(u|x_t) / sum_u' p_{t-1}(u') * z(u'|x_t)

where z is the universe classifier's output for the new utterance alone.
Entropy is measured in nats. The entropy change of an utterance is

    delta = H(p_{t-1}) - H(p_t)

(positive = revealing, negative = concealing), and its score is

    sigma = min(exp(alpha * delta), M)

with M a max-score clip so that bounded-support rejection sampling works.
The sequence of belief states over a dialogue is the narrative arc.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corpus import Dialogue
from .universe import (
    NaiveBayesModel,
    UniverseSet,
    classify,
    floor_and_normalize,
    validate_distribution,
)

__all__ = [
    "BeliefState",
    "ArcPoint",
    "NarrativeArc",
    "ShapingConfig",
    "init_belief",
    "update_belief",
    "entropy",
    "entropy_change",
    "score",
    "compute_arc",
]

MAX_SCORE_CAP = 10.0


@dataclass(frozen=True)
class BeliefState:
    """A point on the universe simplex after absorbing ``step`` utterances."""

    distribution: np.ndarray
    step: int


@dataclass(frozen=True)
class ArcPoint:
    step: int
    distribution: np.ndarray
    entropy: float
    delta: float    # H(previous) - H(this); stored as 0.0 at step 0
    utterance_text: str | None = None


@dataclass(frozen=True)
class NarrativeArc:
    universe_set: UniverseSet
    points: tuple[ArcPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def final_entropy(self) -> float:
        return self.points[-1].entropy

    def to_dict(self) -> dict:
        return {
            "labels": list(self.universe_set.labels),
            "points": [
                {
                    "step": p.step,
                    "probs": [float(x) for x in p.distribution],
                    "entropy": p.entropy,
                    "delta": p.delta,
                    "utterance_text": p.utterance_text,
                }
                for p in self.points
            ],
        }

    def to_csv(self) -> str:
        header = ["step", *self.universe_set.labels, "entropy", "delta"]
        rows = [",".join(header)]
        for p in self.points:
            cells = [str(p.step)]
            cells += [repr(float(x)) for x in p.distribution]
            cells += [repr(p.entropy), repr(p.delta)]
            rows.append(",".join(cells))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class ShapingConfig:
    """Modulation parameters: exponent alpha, score clip M, sampler budget S.

    When alpha == 0 the score is identically 1, so M is forced to 1 and the
    acceptance test r <= sigma/M always passes: neutral mode is a true
    pass-through of the base conversation model.
    """

    alpha: float
    max_score: float = MAX_SCORE_CAP
    max_samples: int = 64

    def __post_init__(self):
        if self.alpha == 0.0:
            object.__setattr__(self, "max_score", 1.0)
        if self.max_score < 1:
            raise ValueError("max_score must be >= 1")
        if self.max_samples < 1:
            raise ValueError("max_samples must be >= 1")

    @classmethod
    def default_for(cls, alpha: float, n_universes: int, max_samples: int = 64) -> "ShapingConfig":
        """M = exp(|alpha| * ln(n_universes)), the exact bound on sigma given
        |delta| <= ln(n_universes), capped at MAX_SCORE_CAP for efficiency."""
        if alpha == 0.0:
            return cls(alpha=0.0, max_samples=max_samples)
        bound = math.exp(abs(alpha) * math.log(n_universes))
        return cls(alpha=alpha, max_score=min(bound, MAX_SCORE_CAP), max_samples=max_samples)


def init_belief(universe_set: UniverseSet) -> BeliefState:
    """Uniform belief at step 0."""
    k = len(universe_set)
    if k < 2:
        raise ValueError("need at least 2 universes")
    return BeliefState(distribution=np.full(k, 1.0 / k), step=0)


def update_belief(prior: BeliefState, z: np.ndarray) -> BeliefState:
    """One multiplicative belief update; the result is floored and
    renormalized so no universe ever reaches exactly zero."""
    k = len(prior.distribution)
    z = validate_distribution(z, k)
    joint = prior.distribution * z
    total = joint.sum()
    if total <= 0.0:
        raise RuntimeError("belief update denominator underflowed")
    return BeliefState(
        distribution=floor_and_normalize(joint / total),
        step=prior.step + 1,
    )


def entropy(distribution: np.ndarray) -> float:
    """Shannon entropy in nats, with 0*ln(0) taken as 0."""
    p = np.asarray(distribution, dtype=float)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def entropy_change(prior: BeliefState, posterior: BeliefState) -> float:
    """H(prior) - H(posterior): positive for revealing utterances."""
    if posterior.step != prior.step + 1:
        raise ValueError(
            f"posterior step {posterior.step} does not follow prior step {prior.step}"
        )
    return entropy(prior.distribution) - entropy(posterior.distribution)


def score(delta: float, config: ShapingConfig) -> float:
    """sigma = exp(alpha * delta), clipped at the configured max score."""
    return min(math.exp(config.alpha * delta), config.max_score)


def compute_arc(dialogue: Dialogue, model: NaiveBayesModel) -> NarrativeArc:
    """Run the belief update over a whole dialogue.

    Returns len(dialogue) + 1 points; point 0 is the uniform prior.
    """
    belief = init_belief(model.universe_set)
    points = [
        ArcPoint(
            step=0,
            distribution=belief.distribution,
            entropy=entropy(belief.distribution),
            delta=0.0,
        )
    ]
    for utt in dialogue.utterances:
        z = classify(model, utt)
        new = update_belief(belief, z)
        points.append(
            ArcPoint(
                step=new.step,
                distribution=new.distribution,
                entropy=entropy(new.distribution),
                delta=entropy_change(belief, new),
                utterance_text=utt.text,
            )
        )
        belief = new
    return NarrativeArc(universe_set=model.universe_set, points=tuple(points))
