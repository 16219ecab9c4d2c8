import math

import numpy as np
import pytest

from narrative_arc.arc import (
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
from narrative_arc.corpus import Dialogue, Utterance
from narrative_arc.universe import UniverseSet

from conftest import random_simplex


def batch_posterior(z_list, k):
    """One-shot product-form posterior: the oracle for the recursive update."""
    p = np.full(k, 1.0 / k)
    for z in z_list:
        p = p * z
    return p / p.sum()


class TestInitBelief:
    def test_five(self):
        b = init_belief(UniverseSet(("a", "b", "c", "d", "e")))
        assert np.allclose(b.distribution, 0.2, atol=1e-15)
        assert b.step == 0

    def test_two(self):
        b = init_belief(UniverseSet(("a", "b")))
        assert np.allclose(b.distribution, 0.5, atol=1e-15)

    def test_one_rejected(self):
        with pytest.raises(ValueError):
            init_belief(("only",))  # any 1-length universe collection


class TestUpdateBelief:
    def test_uniform_prior_gives_z(self):
        b = init_belief(UniverseSet(("a", "b")))
        out = update_belief(b, np.array([0.8, 0.2]))
        assert np.allclose(out.distribution, [0.8, 0.2], atol=1e-12)
        assert out.step == 1

    def test_hand_computed_second_step(self):
        b = BeliefState(np.array([0.8, 0.2]), step=1)
        out = update_belief(b, np.array([0.8, 0.2]))
        assert np.allclose(out.distribution, [16 / 17, 1 / 17], atol=1e-12)

    def test_uniform_z_identity(self):
        rng = np.random.default_rng(2)
        for k in (2, 3, 5):
            p = random_simplex(rng, k)
            b = BeliefState(p, step=3)
            out = update_belief(b, np.full(k, 1.0 / k))
            np.testing.assert_allclose(out.distribution, p, atol=1e-12)

    def test_recursive_equals_batch(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            k = int(rng.integers(2, 6))
            t = int(rng.integers(1, 11))
            zs = [random_simplex(rng, k) for _ in range(t)]
            b = init_belief(UniverseSet(tuple(f"u{i}" for i in range(k))))
            for z in zs:
                b = update_belief(b, z)
            np.testing.assert_allclose(b.distribution, batch_posterior(zs, k), atol=1e-9)
            assert b.step == t

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(23)
        k = 4
        perm = rng.permutation(k)
        zs = [random_simplex(rng, k) for _ in range(6)]
        us = UniverseSet(tuple(f"u{i}" for i in range(k)))
        b1 = init_belief(us)
        b2 = init_belief(us)
        for z in zs:
            b1 = update_belief(b1, z)
            b2 = update_belief(b2, z[perm])
        np.testing.assert_allclose(b2.distribution, b1.distribution[perm], atol=1e-12)

    def test_bad_z_rejected(self):
        b = init_belief(UniverseSet(("a", "b")))
        with pytest.raises(ValueError):
            update_belief(b, np.array([0.8, 0.4]))
        with pytest.raises(ValueError):
            update_belief(b, np.array([1.2, -0.2]))

    def test_floor_keeps_all_universes_alive(self):
        b = init_belief(UniverseSet(("a", "b")))
        for _ in range(50):
            b = update_belief(b, np.array([1.0 - 1e-12, 1e-12]))
        assert b.distribution[1] >= 1e-13


class TestEntropy:
    def test_uniform_five(self):
        assert entropy(np.full(5, 0.2)) == pytest.approx(math.log(5), abs=1e-12)

    def test_point_mass(self):
        assert entropy(np.array([1.0, 0.0])) == 0.0

    def test_08_02(self):
        expected = -(0.8 * math.log(0.8) + 0.2 * math.log(0.2))
        assert entropy(np.array([0.8, 0.2])) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.5004, abs=1e-4)

    def test_bounds_random(self):
        rng = np.random.default_rng(5)
        for _ in range(500):
            k = int(rng.integers(2, 6))
            h = entropy(random_simplex(rng, k))
            assert -1e-12 <= h <= math.log(k) + 1e-12


class TestEntropyChange:
    def test_uniform_to_08(self):
        prior = BeliefState(np.array([0.5, 0.5]), step=0)
        post = BeliefState(np.array([0.8, 0.2]), step=1)
        assert entropy_change(prior, post) == pytest.approx(
            math.log(2) - 0.500402423538, abs=1e-9
        )

    def test_no_change(self):
        prior = BeliefState(np.array([0.3, 0.7]), step=4)
        post = BeliefState(np.array([0.3, 0.7]), step=5)
        assert entropy_change(prior, post) == 0.0

    def test_point_to_uniform(self):
        prior = BeliefState(np.array([1.0, 0.0]), step=0)
        post = BeliefState(np.array([0.5, 0.5]), step=1)
        assert entropy_change(prior, post) == pytest.approx(-math.log(2), abs=1e-12)

    def test_step_mismatch(self):
        prior = BeliefState(np.array([0.5, 0.5]), step=0)
        post = BeliefState(np.array([0.5, 0.5]), step=2)
        with pytest.raises(ValueError):
            entropy_change(prior, post)


class TestScore:
    def test_alpha_zero_is_one(self):
        cfg = ShapingConfig(alpha=0.0)
        for d in (-3.0, 0.0, 0.7):
            assert score(d, cfg) == 1.0
        assert cfg.max_score == 1.0  # forced

    def test_hand_value(self):
        cfg = ShapingConfig(alpha=1.0, max_score=10.0)
        assert score(0.1927, cfg) == pytest.approx(math.exp(0.1927), abs=1e-12)
        assert score(0.1927, cfg) == pytest.approx(1.2126, abs=1e-4)

    def test_clipping(self):
        cfg = ShapingConfig(alpha=20.0, max_score=10.0)
        assert score(math.log(5), cfg) == 10.0

    def test_monotone_in_delta(self):
        cfg_pos = ShapingConfig(alpha=1.5, max_score=1e9)
        cfg_neg = ShapingConfig(alpha=-1.5, max_score=1e9)
        deltas = np.linspace(-1.0, 1.0, 21)
        pos = [score(d, cfg_pos) for d in deltas]
        neg = [score(d, cfg_neg) for d in deltas]
        assert all(a < b for a, b in zip(pos, pos[1:]))
        assert all(a > b for a, b in zip(neg, neg[1:]))

    def test_default_m(self):
        cfg = ShapingConfig.default_for(2.0, 3)
        assert cfg.max_score == pytest.approx(math.exp(2 * math.log(3)), abs=1e-12)
        assert ShapingConfig.default_for(5.0, 5).max_score == 10.0
        assert ShapingConfig.default_for(0.0, 5).max_score == 1.0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ShapingConfig(alpha=1.0, max_score=0.5)
        with pytest.raises(ValueError):
            ShapingConfig(alpha=1.0, max_samples=0)


class TestComputeArc:
    def test_uniform_z_dialogue(self, toy_model):
        d = Dialogue((Utterance("zzzz qqqq wwww"),))  # fully out of vocabulary
        arc = compute_arc(d, toy_model)
        assert len(arc) == 2
        np.testing.assert_allclose(arc.points[0].distribution, 1 / 3, atol=1e-12)
        np.testing.assert_allclose(arc.points[1].distribution, 1 / 3, atol=1e-12)
        assert arc.points[1].delta == pytest.approx(0.0, abs=1e-12)

    def test_repeated_revealing_line_monotone(self, two_universe_model):
        line = "zork grue torch dungeon"
        d = Dialogue(tuple(Utterance(line) for _ in range(8)))
        arc = compute_arc(d, two_universe_model)
        ia = two_universe_model.labels.index("alpha")
        probs = [p.distribution[ia] for p in arc.points]
        assert all(a <= b + 1e-15 for a, b in zip(probs, probs[1:]))
        assert probs[-1] > 0.99

    def test_entropy_and_delta_bounds(self, toy_model):
        rng = np.random.default_rng(37)
        vocab_words = list(toy_model.tfidf.vocabulary)
        k = len(toy_model.universe_set)
        for _ in range(30):
            n = int(rng.integers(1, 8))
            utts = tuple(
                Utterance(" ".join(rng.choice(vocab_words, size=rng.integers(1, 6))))
                for _ in range(n)
            )
            arc = compute_arc(Dialogue(utts), toy_model)
            assert len(arc) == n + 1
            for p in arc.points:
                assert -1e-12 <= p.entropy <= math.log(k) + 1e-12
                assert abs(p.delta) <= math.log(k) + 1e-12

    def test_points_track_recursion(self, toy_model):
        d = Dialogue((Utterance("draw your sword"), Utterance("kiss me my love")))
        arc = compute_arc(d, toy_model)
        for prev, cur in zip(arc.points, arc.points[1:]):
            assert cur.delta == pytest.approx(prev.entropy - cur.entropy, abs=1e-12)
        assert arc.points[0].delta == 0.0

    def test_serialization_shapes(self, toy_model):
        d = Dialogue((Utterance("draw your sword"),))
        arc = compute_arc(d, toy_model)
        blob = arc.to_dict()
        assert blob["labels"] == list(toy_model.labels)
        assert len(blob["points"]) == 2
        assert blob["points"][0]["utterance_text"] is None
        assert blob["points"][1]["utterance_text"] == "draw your sword"
        csv = arc.to_csv()
        header = csv.splitlines()[0].split(",")
        assert len(header) == 1 + len(toy_model.labels) + 2
