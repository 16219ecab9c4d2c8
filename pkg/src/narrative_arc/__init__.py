"""Belief tracking over discrete universes for dialogue.

A universe classifier turns each utterance into a distribution over topics,
a recursive update folds these into a posterior belief across a dialogue
(the narrative arc), and an entropy-change score modulates retrieval-based
conversation models toward revealing or concealing the universe.
"""

__version__ = "0.1.0"

from .arc import (
    ArcPoint,
    BeliefState,
    NarrativeArc,
    ShapingConfig,
    compute_arc,
    entropy,
    entropy_change,
    init_belief,
    score,
    update_belief,
)
from .corpus import (
    Dialogue,
    LabeledDocument,
    TfidfModel,
    Utterance,
    build_tfidf,
    load_labeled_corpus,
    load_script,
    load_utterance_pool,
    tokenize,
)
from .conversation import (
    Candidate,
    RandomProvider,
    RetrievalIndex,
    RetrievalProvider,
    build_index,
    nn_candidates,
    random_candidates,
    unigram_score,
)
from .harness import (
    Episode,
    EvalResult,
    alpha_sweep,
    build_episodes,
    evaluate,
    rank_episode,
    select_alpha,
    wps_stats,
)
from .shaping import (
    GenerationSession,
    ScoredCandidate,
    generate_dialogue,
    greedy_select,
    rejection_select,
    score_candidates,
)
from .universe import (
    NaiveBayesModel,
    UniverseSet,
    classify,
    load_model,
    save_model,
    train,
)
