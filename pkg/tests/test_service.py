import threading

import numpy as np
import pytest
from fastapi.testclient import TestClient

from narrative_arc.arc import compute_arc
from narrative_arc.corpus import Dialogue, Utterance, build_tfidf, tokenize
from narrative_arc.conversation import RetrievalProvider, build_index
from narrative_arc.service import create_app, resolve_mode_alpha


@pytest.fixture(scope="module")
def pool():
    texts = (
        ["my heart burns with love and tender devotion for you my dear"]
        + ["draw your blade and face me in battle you coward"]
        + ["the market price of silver rose again this fine morning"]
        + [f"well now that is a fine thing to say number {i}" for i in range(12)]
    )
    return [Utterance(t) for t in texts]


@pytest.fixture(scope="module")
def client(toy_model, pool):
    tfidf = build_tfidf([tokenize(u.text) for u in pool])
    provider = RetrievalProvider(build_index(pool, tfidf))
    app = create_app(toy_model, provider, default_k=8, base_seed=99)
    with TestClient(app) as c:
        yield c


def start_session(client, **body):
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 201, resp.text
    return resp.json()


class TestModeAlpha:
    def test_neutral_default(self):
        assert resolve_mode_alpha("neutral", None) == ("neutral", 0.0)

    def test_reveal_default(self):
        assert resolve_mode_alpha("reveal", None) == ("reveal", 20.0)

    def test_conceal_default(self):
        assert resolve_mode_alpha("conceal", None) == ("conceal", -25.0)

    def test_alpha_only_infers_mode(self):
        assert resolve_mode_alpha(None, 3.5) == ("reveal", 3.5)
        assert resolve_mode_alpha(None, 0.0) == ("neutral", 0.0)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            resolve_mode_alpha("conceal", 5.0)

    def test_nothing(self):
        with pytest.raises(ValueError):
            resolve_mode_alpha(None, None)


class TestSessionLifecycle:
    def test_health(self, client):
        resp = client.get("/healthz")
        assert resp.status_code == 200
        body = resp.json()
        assert body["status"] == "ok"
        assert body["universes"] == ["commerce", "conflict", "romance"]

    def test_create_neutral(self, client):
        body = start_session(client, mode="neutral")
        assert body["config"]["alpha"] == 0.0
        assert body["config"]["mode"] == "neutral"

    def test_create_reveal_default_alpha(self, client):
        body = start_session(client, mode="reveal")
        assert body["config"]["alpha"] == 20.0

    def test_sign_mismatch_400(self, client):
        resp = client.post("/sessions", json={"mode": "conceal", "alpha": 5})
        assert resp.status_code == 400
        assert resp.json()["code"] == 400

    def test_unknown_fields_rejected(self, client):
        resp = client.post("/sessions", json={"mode": "neutral", "bogus": 1})
        assert resp.status_code == 400

    def test_fresh_arc_single_uniform_point(self, client):
        body = start_session(client, mode="neutral")
        arc = client.get(f"/sessions/{body['session_id']}/arc").json()
        assert len(arc["points"]) == 1
        assert arc["points"][0]["probs"] == pytest.approx([1 / 3] * 3)

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope/arc").status_code == 404
        assert client.post("/sessions/nope/utterance", json={"text": "hi"}).status_code == 404


class TestTurns:
    def test_first_turn_gives_three_points(self, client):
        body = start_session(client, mode="reveal", seed=1)
        sid = body["session_id"]
        resp = client.post(f"/sessions/{sid}/utterance", json={"text": "I love you dearly"})
        assert resp.status_code == 200
        turn = resp.json()
        assert turn["response_text"]
        arc = client.get(f"/sessions/{sid}/arc").json()
        assert len(arc["points"]) == 3
        assert turn["arc_point"] == arc["points"][2]

    def test_empty_text_400(self, client):
        sid = start_session(client, mode="neutral")["session_id"]
        resp = client.post(f"/sessions/{sid}/utterance", json={"text": "   "})
        assert resp.status_code == 400

    def test_turn_limit_409(self, client):
        sid = start_session(client, mode="neutral", seed=5, turn_limit=2)["session_id"]
        for i in range(2):
            assert client.post(f"/sessions/{sid}/utterance",
                               json={"text": f"turn {i} words"}).status_code == 200
        resp = client.post(f"/sessions/{sid}/utterance", json={"text": "one too many"})
        assert resp.status_code == 409
        assert "scene complete" in resp.json()["message"]

    def test_five_pairs_eleven_points(self, client):
        sid = start_session(client, mode="reveal", seed=7)["session_id"]
        for i in range(5):
            assert client.post(f"/sessions/{sid}/utterance",
                               json={"text": f"tell me more please {i}"}).status_code == 200
        arc = client.get(f"/sessions/{sid}/arc").json()
        assert len(arc["points"]) == 11
        assert client.post(f"/sessions/{sid}/utterance",
                           json={"text": "a sixth attempt"}).status_code == 409

    def test_determinism_same_seed(self, client):
        replies = []
        for _ in range(2):
            sid = start_session(client, mode="reveal", seed=31337)["session_id"]
            texts = []
            for i in range(3):
                r = client.post(f"/sessions/{sid}/utterance",
                                json={"text": f"the price of love {i}"})
                texts.append(r.json()["response_text"])
            replies.append(texts)
        assert replies[0] == replies[1]

    def test_diagnostics_flag(self, client):
        sid = start_session(client, mode="reveal", seed=2)["session_id"]
        resp = client.post(f"/sessions/{sid}/utterance?diagnostics=true",
                           json={"text": "sing me a song of battle"})
        diags = resp.json()["candidate_diagnostics"]
        assert diags and all(
            set(d) == {"text", "q", "delta", "sigma", "q_tilde"} for d in diags
        )
        for d in diags:
            assert d["q_tilde"] == pytest.approx(d["q"] * d["sigma"])

    def test_arc_matches_compute_arc(self, client, toy_model):
        sid = start_session(client, mode="reveal", seed=11)["session_id"]
        for i in range(3):
            client.post(f"/sessions/{sid}/utterance", json={"text": f"my love grows {i}"})
        session = client.get(f"/sessions/{sid}").json()
        arc = client.get(f"/sessions/{sid}/arc").json()
        dialogue = Dialogue(tuple(Utterance(t) for t in session["transcript"]))
        ref = compute_arc(dialogue, toy_model)
        assert len(arc["points"]) == len(ref.points)
        for got, want in zip(arc["points"], ref.points):
            np.testing.assert_allclose(got["probs"], want.distribution, atol=1e-9)
            assert got["entropy"] == pytest.approx(want.entropy, abs=1e-9)


class TestConcurrency:
    def test_two_sessions_do_not_interleave(self, client, toy_model):
        sids = [start_session(client, mode="reveal", seed=s)["session_id"] for s in (1, 2)]
        errors = []

        def hammer(sid, tag):
            try:
                for i in range(5):
                    r = client.post(f"/sessions/{sid}/utterance",
                                    json={"text": f"{tag} utterance number {i}"})
                    assert r.status_code == 200
            except Exception as exc:  # pragma: no cover
                errors.append(exc)

        threads = [
            threading.Thread(target=hammer, args=(sid, f"s{j}"))
            for j, sid in enumerate(sids)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        for j, sid in enumerate(sids):
            body = client.get(f"/sessions/{sid}").json()
            transcript = body["transcript"]
            assert len(transcript) == 10
            assert [t for t in transcript[::2]] == [f"s{j} utterance number {i}" for i in range(5)]
            arc = client.get(f"/sessions/{sid}/arc").json()
            dialogue = Dialogue(tuple(Utterance(t) for t in transcript))
            ref = compute_arc(dialogue, toy_model)
            for got, want in zip(arc["points"], ref.points):
                np.testing.assert_allclose(got["probs"], want.distribution, atol=1e-9)


class TestPersistence:
    def test_shutdown_dump(self, toy_model, pool, tmp_path):
        tfidf = build_tfidf([tokenize(u.text) for u in pool])
        provider = RetrievalProvider(build_index(pool, tfidf))
        out = tmp_path / "sessions.json"
        app = create_app(toy_model, provider, base_seed=1, persist_path=out)
        with TestClient(app) as c:
            sid = c.post("/sessions", json={"mode": "neutral", "seed": 3}).json()["session_id"]
            c.post(f"/sessions/{sid}/utterance", json={"text": "hello there friend"})
        import json
        dumped = json.loads(out.read_text())
        assert len(dumped["sessions"]) == 1
        assert len(dumped["sessions"][0]["transcript"]) == 2
