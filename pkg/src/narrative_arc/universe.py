"""Universe models: probabilistic topic classifiers producing a distribution
z(u|x) over a fixed set of discrete universes for a single utterance.

The classifier is a multinomial naive Bayes fit on TF-IDF-weighted token
counts with additive smoothing. Priors are forced uniform over universes
regardless of document counts, because the recursive belief update assumes a
uniform classifier prior; empirical class frequencies would double-count the
prior across a dialogue.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import TfidfModel, build_tfidf, tokenize

__all__ = [
    "UniverseSet",
    "NaiveBayesModel",
    "PROB_FLOOR",
    "train",
    "classify",
    "save_model",
    "load_model",
]

# Classifier outputs (and belief states downstream) never report an exact
# zero: a single utterance must not be able to kill a universe forever in
# the multiplicative belief update.
PROB_FLOOR = 1e-12

MODEL_VERSION = 1


@dataclass(frozen=True)
class UniverseSet:
    """Ordered, distinct universe labels. Order is fixed at training time."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ValueError("need at least 2 universes")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate universe labels")

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


def floor_and_normalize(probs: np.ndarray, floor: float = PROB_FLOOR) -> np.ndarray:
    """Clamp entries to at least ``floor`` and renormalize to the simplex."""
    p = np.maximum(np.asarray(probs, dtype=float), floor)
    return p / p.sum()


def validate_distribution(probs: np.ndarray, n: int, tol: float = 1e-9) -> np.ndarray:
    p = np.asarray(probs, dtype=float)
    if p.shape != (n,):
        raise ValueError(f"distribution has shape {p.shape}, expected ({n},)")
    if (p < 0).any():
        raise ValueError("distribution has negative entries")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"distribution sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class NaiveBayesModel:
    universe_set: UniverseSet
    log_prior: np.ndarray          # shape (U,); uniform, kept explicit for serialization
    log_likelihood: np.ndarray     # shape (U, V); rows are smoothed multinomial logs
    smoothing: float
    tfidf: TfidfModel

    @property
    def labels(self) -> tuple[str, ...]:
        return self.universe_set.labels


def train(
    docs,
    label_map: dict[str, str] | None = None,
    smoothing: float = 1.0,
    remove_stopwords: bool = True,
) -> NaiveBayesModel:
    """Fit a naive Bayes universe classifier on labeled documents.

    ``label_map`` aggregates raw corpus labels into universe labels (for
    example mapping 20 fine-grained newsgroup topics onto 5 umbrella
    universes); when omitted, raw labels are the universes. Universe label
    order is sorted, so training is deterministic. Every universe named by
    the map must receive at least one document.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    docs = list(docs)
    if not docs:
        raise ValueError("no training documents")

    if label_map is not None:
        missing = sorted({d.label for d in docs} - set(label_map))
        if missing:
            raise ValueError(f"raw label not covered by label map: {missing[0]}")
        universe_of = lambda raw: label_map[raw]
        declared = set(label_map.values())
    else:
        universe_of = lambda raw: raw
        declared = {d.label for d in docs}

    labels = tuple(sorted(declared))
    universe_set = UniverseSet(labels)
    label_idx = {lab: i for i, lab in enumerate(labels)}

    tokenized = [tokenize(d.text, remove_stopwords=remove_stopwords) for d in docs]
    tfidf = build_tfidf(tokenized)

    counts = np.zeros((len(labels), len(tfidf.vocabulary)))
    ndocs = np.zeros(len(labels), dtype=int)
    for doc, tokens in zip(docs, tokenized):
        u = label_idx[universe_of(doc.label)]
        ndocs[u] += 1
        for idx, w in tfidf.weights(tokens).items():
            counts[u, idx] += w

    for lab, n in zip(labels, ndocs):
        if n == 0:
            raise ValueError(f"universe has no training documents: {lab}")

    vocab_size = counts.shape[1]
    totals = counts.sum(axis=1, keepdims=True) + smoothing * vocab_size
    log_likelihood = np.log(counts + smoothing) - np.log(totals)
    log_prior = np.full(len(labels), -np.log(len(labels)))

    return NaiveBayesModel(
        universe_set=universe_set,
        log_prior=log_prior,
        log_likelihood=log_likelihood,
        smoothing=smoothing,
        tfidf=tfidf,
    )


def classify_weights(model: NaiveBayesModel, weights: dict[int, float]) -> np.ndarray:
    """Distribution over universes for a sparse TF-IDF weight vector.

    Softmax of log_prior + sum_t w_t * log_likelihood[:, t], computed with
    max subtraction. An empty weight vector gives the uniform distribution.
    """
    k = len(model.universe_set)
    if not weights:
        return np.full(k, 1.0 / k)
    ids = np.fromiter(weights.keys(), dtype=int, count=len(weights))
    w = np.fromiter(weights.values(), dtype=float, count=len(weights))
    scores = model.log_prior + model.log_likelihood[:, ids] @ w
    scores -= scores.max()
    z = np.exp(scores)
    return floor_and_normalize(z / z.sum())


def classify(model: NaiveBayesModel, utterance, remove_stopwords: bool = True) -> np.ndarray:
    """z(u|x): distribution over universes for one utterance.

    Accepts an Utterance or a plain string. Out-of-vocabulary tokens are
    ignored; an empty or fully unknown input yields the uniform distribution.
    """
    text = utterance.text if hasattr(utterance, "text") else utterance
    tokens = tokenize(text, remove_stopwords=remove_stopwords)
    return classify_weights(model, model.tfidf.weights(tokens))


def save_model(model: NaiveBayesModel, path) -> None:
    id_to_token = sorted(model.tfidf.vocabulary, key=model.tfidf.vocabulary.get)
    payload = {
        "version": MODEL_VERSION,
        "labels": list(model.labels),
        "log_prior": model.log_prior.tolist(),
        "vocab": id_to_token,
        "idf": list(model.tfidf.idf),
        "doc_count": model.tfidf.doc_count,
        "log_likelihood": [row.tolist() for row in model.log_likelihood],
        "smoothing": model.smoothing,
    }
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, separators=(",", ":")), encoding="utf-8"
    )


def load_model(path) -> NaiveBayesModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: corrupt model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("version") != MODEL_VERSION:
        raise ValueError(
            f"{path}: unsupported model version: {payload.get('version')!r}"
        )
    vocab = {tok: i for i, tok in enumerate(payload["vocab"])}
    tfidf = TfidfModel(
        vocabulary=vocab,
        idf=tuple(float(x) for x in payload["idf"]),
        doc_count=int(payload["doc_count"]),
    )
    return NaiveBayesModel(
        universe_set=UniverseSet(tuple(payload["labels"])),
        log_prior=np.asarray(payload["log_prior"], dtype=float),
        log_likelihood=np.asarray(payload["log_likelihood"], dtype=float),
        smoothing=float(payload["smoothing"]),
        tfidf=tfidf,
    )
