import math

import numpy as np
import pytest

from narrative_arc.corpus import Utterance, build_tfidf, tokenize
from narrative_arc.conversation import (
    Candidate,
    build_embedding_index,
    load_embeddings,
    nn_candidates_embedded,
    RandomProvider,
    RetrievalProvider,
    build_index,
    load_external_scores,
    nn_candidates,
    random_candidates,
    unigram_score,
)


def brute_force_cosine_ranking(pool_texts, query_text, tfidf):
    """Dense full-scan cosine ranking, independent of the sparse index."""
    vocab_n = len(tfidf.vocabulary)

    def vec(text):
        v = np.zeros(vocab_n)
        for idx, w in tfidf.weights(tokenize(text)).items():
            v[idx] = w
        return v

    q = vec(query_text)
    qn = np.linalg.norm(q)
    sims = []
    for t in pool_texts:
        d = vec(t)
        dn = np.linalg.norm(d)
        sims.append(0.0 if qn == 0 or dn == 0 else float(q @ d / (qn * dn)))
    order = sorted(range(len(sims)), key=lambda i: (-sims[i], i))
    return order, sims


class TestRandomCandidates:
    def test_exhaustive(self):
        pool = [Utterance(f"line {i} padding") for i in range(3)]
        out = random_candidates(pool, 3, np.random.default_rng(0))
        assert {c.utterance.text for c in out} == {u.text for u in pool}
        assert all(c.q_score == pytest.approx(1 / 3) for c in out)

    def test_determinism(self):
        pool = [Utterance(f"line {i} padding") for i in range(20)]
        a = random_candidates(pool, 5, np.random.default_rng(42))
        b = random_candidates(pool, 5, np.random.default_rng(42))
        assert [c.utterance.text for c in a] == [c.utterance.text for c in b]

    def test_k_too_big(self):
        pool = [Utterance("just one line")]
        with pytest.raises(ValueError):
            random_candidates(pool, 2, np.random.default_rng(0))

    def test_uniformity_monte_carlo(self):
        pool = [Utterance(f"line number {i}") for i in range(10)]
        rng = np.random.default_rng(7)
        counts = {u.text: 0 for u in pool}
        n = 10**5
        for _ in range(n):
            counts[random_candidates(pool, 1, rng)[0].utterance.text] += 1
        for c in counts.values():
            assert c / n == pytest.approx(0.1, abs=0.01)


class TestRetrieval:
    def make_index(self, texts):
        pool = [Utterance(t) for t in texts]
        tfidf = build_tfidf([tokenize(t) for t in texts])
        return build_index(pool, tfidf), tfidf

    def test_self_match_first(self):
        texts = ["the red ball bounced", "a green tree grew", "blue water flowed fast"]
        index, _ = self.make_index(texts)
        out = nn_candidates(index, Utterance("a green tree grew"), 3)
        assert out[0].utterance.text == "a green tree grew"

    def test_no_overlap_uniform(self):
        texts = ["aaa bbb ccc", "ddd eee fff", "ggg hhh iii"]
        index, _ = self.make_index(texts)
        out = nn_candidates(index, Utterance("zzz yyy xxx"), 2)
        assert [c.utterance.text for c in out] == ["aaa bbb ccc", "ddd eee fff"]
        assert all(c.q_score == pytest.approx(0.5) for c in out)

    def test_hand_computable_ranking(self):
        texts = ["red blue", "red green green", "yellow"]
        index, tfidf = self.make_index(texts)
        order, _ = brute_force_cosine_ranking(texts, "red green", tfidf)
        out = nn_candidates(index, Utterance("red green"), 3)
        assert [c.utterance.text for c in out] == [texts[i] for i in order]

    def test_q_scores_sum_to_one(self):
        texts = [f"word{i} shared tail tokens" for i in range(8)]
        index, _ = self.make_index(texts)
        out = nn_candidates(index, Utterance("shared tokens word3"), 5)
        assert sum(c.q_score for c in out) == pytest.approx(1.0, abs=1e-12)

    def test_oracle_equivalence_random_pools(self):
        rng = np.random.default_rng(19)
        words = [f"w{i}" for i in range(25)]
        for _ in range(20):
            texts = list({
                " ".join(rng.choice(words, size=rng.integers(2, 7)))
                for _ in range(rng.integers(4, 15))
            })
            index, tfidf = self.make_index(texts)
            query = " ".join(rng.choice(words, size=3))
            k = int(rng.integers(1, len(texts) + 1))
            out = nn_candidates(index, Utterance(query), k)
            order, _ = brute_force_cosine_ranking(texts, query, tfidf)
            assert [c.utterance.text for c in out] == [texts[i] for i in order[:k]]

    def test_empty_pool_rejected(self):
        tfidf = build_tfidf([["a"]])
        with pytest.raises(ValueError):
            build_index([], tfidf)

    def test_retrieval_provider_skips_echo(self):
        texts = ["the red ball bounced", "the red ball rolled", "green grass grew tall"]
        index, _ = self.make_index(texts)
        provider = RetrievalProvider(index)
        out = provider.propose(Utterance("the red ball bounced"), 2, np.random.default_rng(0))
        assert all(c.utterance.text != "the red ball bounced" for c in out)
        assert sum(c.q_score for c in out) == pytest.approx(1.0)


class TestUnigramScore:
    def test_certain_event(self):
        ctx = [Utterance("a a a")]
        assert unigram_score(ctx, Utterance("a")) == pytest.approx(1.0, abs=1e-12)

    def test_fully_oov(self):
        ctx = [Utterance("a b c")]
        assert unigram_score(ctx, Utterance("zzz"), floor=1e-5) == pytest.approx(1e5, rel=1e-9)

    def test_half_probability(self):
        ctx = [Utterance("a b")]
        assert unigram_score(ctx, Utterance("a")) == pytest.approx(2.0, abs=1e-12)

    def test_context_duplication_invariant(self):
        ctx = [Utterance("alpha beta beta gamma"), Utterance("alpha delta")]
        cand = Utterance("alpha beta zeta")
        assert unigram_score(ctx * 2, cand) == pytest.approx(unigram_score(ctx, cand), rel=1e-12)

    def test_zero_token_candidate(self):
        with pytest.raises(ValueError):
            unigram_score([Utterance("a b")], Utterance("!!!"))

    def test_empty_context(self):
        with pytest.raises(ValueError):
            unigram_score([], Utterance("a"))

    def test_inverse_perplexity_preserves_order(self):
        ctx = [Utterance("the cat sat on the mat")]
        cands = [Utterance("the cat sat"), Utterance("the dog ran"), Utterance("xyzzy")]
        ppl = [unigram_score(ctx, c) for c in cands]
        weights = [1.0 / p for p in ppl]
        assert sorted(range(3), key=lambda i: ppl[i]) == sorted(
            range(3), key=lambda i: -weights[i]
        )


class TestExternalScores:
    def test_well_formed(self, tmp_path):
        p = tmp_path / "scores.tsv"
        rows = [f"ep1\t{i}\t{1.0 + i}" for i in range(10)]
        p.write_text("\n".join(rows) + "\n", encoding="utf-8")
        table = load_external_scores(p)
        assert len(table.scores) == 10
        assert table.perplexity("ep1", 3) == pytest.approx(4.0)
        table.validate_complete(["ep1"])

    def test_zero_perplexity(self, tmp_path):
        p = tmp_path / "scores.tsv"
        p.write_text("ep1\t0\t0.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="positive"):
            load_external_scores(p)

    def test_duplicate_pair(self, tmp_path):
        p = tmp_path / "scores.tsv"
        p.write_text("ep1\t0\t1.0\nep1\t0\t2.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            load_external_scores(p)

    def test_gaps_listed(self, tmp_path):
        p = tmp_path / "scores.tsv"
        p.write_text("ep1\t0\t1.0\n", encoding="utf-8")
        table = load_external_scores(p)
        with pytest.raises(ValueError, match="missing"):
            table.validate_complete(["ep1"])


class TestEmbeddingIndex:
    def make(self, tmp_path):
        texts = ["red ball", "green tree", "blue water deep"]
        vecs = {"red ball": [1.0, 0.0, 0.0], "green tree": [0.0, 1.0, 0.0],
                "blue water deep": [0.7, 0.7, 0.0]}
        rows = [f"{t}\t{','.join(str(x) for x in vecs[t])}" for t in texts]
        rows.append("a query line\t0.9,0.1,0.0")
        path = tmp_path / "emb.tsv"
        path.write_text("\n".join(rows) + "\n", encoding="utf-8")
        return texts, path

    def test_roundtrip_and_ranking(self, tmp_path):
        texts, path = self.make(tmp_path)
        emb = load_embeddings(path)
        assert len(emb) == 4
        index = build_embedding_index([Utterance(t) for t in texts], emb)
        out = nn_candidates_embedded(index, Utterance("a query line"), 3)
        # cosine to (0.9,0.1): red ball 0.994 > blue water 0.781 > green tree 0.110
        assert [c.utterance.text for c in out] == ["red ball", "blue water deep", "green tree"]
        assert sum(c.q_score for c in out) == pytest.approx(1.0, abs=1e-12)

    def test_dimension_mismatch(self, tmp_path):
        path = tmp_path / "emb.tsv"
        path.write_text("one line\t1.0,2.0\nother line\t1.0\n", encoding="utf-8")
        with pytest.raises(ValueError, match="dimension"):
            load_embeddings(path)

    def test_missing_pool_embedding(self, tmp_path):
        _, path = self.make(tmp_path)
        emb = load_embeddings(path)
        with pytest.raises(ValueError, match="no embedding"):
            build_embedding_index([Utterance("not embedded line")], emb)

    def test_unknown_query(self, tmp_path):
        texts, path = self.make(tmp_path)
        emb = load_embeddings(path)
        index = build_embedding_index([Utterance(t) for t in texts], emb)
        with pytest.raises(KeyError):
            nn_candidates_embedded(index, Utterance("mystery text"), 2)


class TestCandidate:
    def test_positive_q(self):
        with pytest.raises(ValueError):
            Candidate(Utterance("hello there"), 0.0)

    def test_random_provider_empty(self):
        with pytest.raises(ValueError):
            RandomProvider([])
