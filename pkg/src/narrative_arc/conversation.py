"""Base conversation models: candidate providers with unnormalized weights q.

Three providers cover the desk-scale setups: uniform random draws from an
utterance pool, exact TF-IDF cosine retrieval, and perplexity tables scored
by an external language model. A unigram context language model supplies a
self-contained perplexity scorer for the prediction harness.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .corpus import TfidfModel, Utterance, tokenize

__all__ = [
    "Candidate",
    "RetrievalIndex",
    "ExternalScoreTable",
    "random_candidates",
    "build_index",
    "nn_candidates",
    "unigram_score",
    "load_external_scores",
    "load_embeddings",
    "EmbeddingIndex",
    "build_embedding_index",
    "nn_candidates_embedded",
    "RandomProvider",
    "RetrievalProvider",
]


@dataclass(frozen=True)
class Candidate:
    utterance: Utterance
    q_score: float

    def __post_init__(self):
        if self.q_score <= 0:
            raise ValueError("q_score must be positive")


def random_candidates(pool, k: int, rng: np.random.Generator) -> list[Candidate]:
    """k distinct pool utterances, uniformly without replacement.

    Each candidate carries q = 1/|pool|, the probability of the draw that
    produced it.
    """
    pool = list(pool)
    if k > len(pool):
        raise ValueError(f"k={k} exceeds pool size {len(pool)}")
    idx = rng.choice(len(pool), size=k, replace=False)
    q = 1.0 / len(pool)
    return [Candidate(pool[i], q) for i in idx]


@dataclass(frozen=True)
class RetrievalIndex:
    pool: tuple[Utterance, ...]
    matrix: sparse.csr_matrix     # rows L2-normalized; zero rows stay zero
    tfidf: TfidfModel
    remove_stopwords: bool


def _tfidf_row(tfidf: TfidfModel, utt: Utterance, remove_stopwords: bool) -> dict[int, float]:
    tokens = tokenize(utt.text, remove_stopwords=remove_stopwords)
    return tfidf.weights(tokens)


def build_index(pool, tfidf: TfidfModel, remove_stopwords: bool = False) -> RetrievalIndex:
    """Precompute L2-normalized TF-IDF vectors for a pool of utterances."""
    pool = tuple(pool)
    if not pool:
        raise ValueError("cannot index an empty pool")
    rows, cols, vals = [], [], []
    for r, utt in enumerate(pool):
        for c, v in _tfidf_row(tfidf, utt, remove_stopwords).items():
            rows.append(r)
            cols.append(c)
            vals.append(v)
    mat = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(len(pool), len(tfidf.vocabulary))
    )
    norms = np.sqrt(mat.multiply(mat).sum(axis=1)).A1
    norms[norms == 0] = 1.0
    mat = sparse.diags(1.0 / norms) @ mat
    return RetrievalIndex(pool=pool, matrix=mat.tocsr(), tfidf=tfidf,
                          remove_stopwords=remove_stopwords)


def nn_candidates(index: RetrievalIndex, query: Utterance, k: int) -> list[Candidate]:
    """Top-k pool lines by exact cosine similarity to the query.

    Ties (including an all-zero query vector) break toward the lower pool
    position. q over the returned k is the softmax of their similarities, so
    equal similarities give uniform weights.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, len(index.pool))
    qw = _tfidf_row(index.tfidf, query, index.remove_stopwords)
    qv = np.zeros(len(index.tfidf.vocabulary))
    for c, v in qw.items():
        qv[c] = v
    norm = np.linalg.norm(qv)
    if norm > 0:
        qv /= norm
    sims = index.matrix @ qv
    order = np.argsort(-sims, kind="stable")[:k]
    top = sims[order]
    w = np.exp(top - top.max())
    w /= w.sum()
    return [Candidate(index.pool[i], float(wi)) for i, wi in zip(order, w)]


def unigram_score(context, candidate: Utterance, floor: float = 1e-5) -> float:
    """Perplexity of a candidate under a unigram model of the context lines.

    Token probabilities are relative frequencies over the context; tokens
    absent from the context get probability ``floor``. Perplexity is
    exp(mean negative log-probability) over the candidate's tokens.
    """
    context = list(context)
    if not context:
        raise ValueError("context must be non-empty")
    if floor <= 0:
        raise ValueError("floor must be positive")
    counts: Counter[str] = Counter()
    for utt in context:
        counts.update(utt.tokens)
    total = sum(counts.values())
    cand_tokens = candidate.tokens
    if not cand_tokens:
        raise ValueError("candidate has no tokens")
    nll = 0.0
    for tok in cand_tokens:
        c = counts.get(tok, 0)
        p = c / total if c else floor
        nll -= math.log(p)
    return math.exp(nll / len(cand_tokens))


@dataclass(frozen=True)
class ExternalScoreTable:
    """Perplexities keyed by (episode id, candidate index), as produced by an
    externally trained conversation model."""

    scores: dict[tuple[str, int], float]

    def perplexity(self, episode_id: str, candidate_idx: int) -> float:
        key = (episode_id, candidate_idx)
        if key not in self.scores:
            raise KeyError(f"no external score for episode {episode_id!r} candidate {candidate_idx}")
        return self.scores[key]

    def validate_complete(self, episode_ids, n_candidates: int = 10) -> None:
        gaps = [
            (eid, i)
            for eid in episode_ids
            for i in range(n_candidates)
            if (eid, i) not in self.scores
        ]
        if gaps:
            shown = ", ".join(f"{e}:{i}" for e, i in gaps[:10])
            raise ValueError(f"external score table is missing {len(gaps)} entries: {shown}")


def load_external_scores(path) -> ExternalScoreTable:
    """Parse a TSV of episode_id, candidate_idx, perplexity rows."""
    scores: dict[tuple[str, int], float] = {}
    text = Path(path).read_text(encoding="utf-8")
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{path}:{i}: expected episode_id<TAB>candidate_idx<TAB>perplexity")
        eid, idx_s, ppl_s = parts
        key = (eid.strip(), int(idx_s))
        ppl = float(ppl_s)
        if ppl <= 0:
            raise ValueError(f"{path}:{i}: perplexity must be positive, got {ppl}")
        if key in scores:
            raise ValueError(f"{path}:{i}: duplicate entry for {key}")
        scores[key] = ppl
    return ExternalScoreTable(scores)


def load_embeddings(path) -> dict[str, np.ndarray]:
    """Load an embedding file: ``text<TAB>comma-separated floats`` per line.

    An alternative to TF-IDF vectors for retrieval, e.g. for vectors
    produced by an external sentence encoder. All rows must agree on the
    vector dimension.
    """
    table: dict[str, np.ndarray] = {}
    dim = None
    text_blob = Path(path).read_text(encoding="utf-8")
    for i, line in enumerate(text_blob.splitlines(), start=1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise ValueError(f"{path}:{i}: expected text<TAB>comma-separated floats")
        text, vec_s = line.split("\t", 1)
        vec = np.array([float(x) for x in vec_s.split(",")])
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ValueError(f"{path}:{i}: dimension {len(vec)} != {dim}")
        table[text] = vec
    if not table:
        raise ValueError(f"{path}: no embeddings")
    return table


@dataclass(frozen=True)
class EmbeddingIndex:
    pool: tuple[Utterance, ...]
    matrix: np.ndarray             # rows L2-normalized; zero rows stay zero
    embeddings: dict[str, np.ndarray]


def build_embedding_index(pool, embeddings: dict[str, np.ndarray]) -> EmbeddingIndex:
    """Index a pool by externally supplied dense vectors.

    Every pool utterance must have an embedding; queries are looked up by
    exact text, so this suits precomputed candidate sets.
    """
    pool = tuple(pool)
    if not pool:
        raise ValueError("cannot index an empty pool")
    missing = [u.text for u in pool if u.text not in embeddings]
    if missing:
        raise ValueError(f"no embedding for pool line: {missing[0]!r}")
    mat = np.stack([embeddings[u.text] for u in pool]).astype(float)
    norms = np.linalg.norm(mat, axis=1)
    norms[norms == 0] = 1.0
    return EmbeddingIndex(pool=pool, matrix=mat / norms[:, None], embeddings=embeddings)


def nn_candidates_embedded(index: EmbeddingIndex, query: Utterance, k: int) -> list[Candidate]:
    """Top-k pool lines by cosine similarity of dense embeddings; same tie
    and weighting rules as :func:`nn_candidates`."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if query.text not in index.embeddings:
        raise KeyError(f"no embedding for query text {query.text!r}")
    k = min(k, len(index.pool))
    qv = np.asarray(index.embeddings[query.text], dtype=float)
    norm = np.linalg.norm(qv)
    if norm > 0:
        qv = qv / norm
    sims = index.matrix @ qv
    order = np.argsort(-sims, kind="stable")[:k]
    top = sims[order]
    w = np.exp(top - top.max())
    w /= w.sum()
    return [Candidate(index.pool[i], float(wi)) for i, wi in zip(order, w)]


class RandomProvider:
    """Candidate provider drawing uniformly from a fixed pool."""

    def __init__(self, pool):
        self.pool = list(pool)
        if not self.pool:
            raise ValueError("empty pool")

    def propose(self, last: Utterance | None, k: int, rng: np.random.Generator) -> list[Candidate]:
        return random_candidates(self.pool, min(k, len(self.pool)), rng)


class RetrievalProvider:
    """Candidate provider returning nearest neighbours of the last line.

    Exact self-matches are excluded so greedy generation cannot lock onto
    echoing the query line back.
    """

    def __init__(self, index: RetrievalIndex):
        self.index = index

    def propose(self, last: Utterance | None, k: int, rng: np.random.Generator) -> list[Candidate]:
        if last is None:
            return random_candidates(self.index.pool, min(k, len(self.index.pool)), rng)
        cands = nn_candidates(self.index, last, k + 1)
        kept = [c for c in cands if c.utterance.text != last.text][:k]
        if not kept:
            kept = cands[:k]
        total = sum(c.q_score for c in kept)
        return [Candidate(c.utterance, c.q_score / total) for c in kept]
