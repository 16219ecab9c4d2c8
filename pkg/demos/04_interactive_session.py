#!/usr/bin/env python3
"""Walk through the HTTP session API in process.

Builds the service app against the bundled model and a small pool, then
plays a five-turn revealing scene through the same endpoints the web client
uses. For a real server, run:

    narrative-arc serve --model <model.json> --pool <pool.txt> --port 8722

and replay the same calls with curl, e.g.
    curl -X POST localhost:8722/sessions -d '{"mode": "reveal", "seed": 7}' \
         -H 'content-type: application/json'
"""

from importlib import resources

from fastapi.testclient import TestClient

from narrative_arc.corpus import Utterance, build_tfidf, tokenize
from narrative_arc.conversation import RetrievalProvider, build_index
from narrative_arc.service import create_app
from narrative_arc.universe import load_model

model = load_model(str(resources.files("narrative_arc.data").joinpath("toy_model.json")))
pool_texts = [
    "my heart burns with love and tender devotion for you",
    "the wedding shall be a celebration of true love",
    "draw your blade and face me in honest battle",
    "the feud between our houses demands satisfaction",
    "the market price of silver rose again this morning",
    "a fair bargain, said the merchant, counting his coins",
] + [f"well now that is a curious thing to say {i}" for i in range(10)]
pool = [Utterance(t) for t in pool_texts]
provider = RetrievalProvider(build_index(pool, build_tfidf([tokenize(u.text) for u in pool])))

app = create_app(model, provider, default_k=8, base_seed=7)
client = TestClient(app)

created = client.post("/sessions", json={"mode": "reveal", "seed": 7}).json()
sid = created["session_id"]
print("session:", created["config"])

human_lines = [
    "I love you with all my heart",
    "then let us be married at once",
    "my feelings for you grow every day",
    "a ring of silver for my beloved",
    "our love story will be sung for ages",
]
for text in human_lines:
    turn = client.post(f"/sessions/{sid}/utterance", json={"text": text}).json()
    point = turn["arc_point"]
    print(f"  you:    {text}")
    print(f"  system: {turn['response_text']}   [H={point['entropy']:.3f}]")

arc = client.get(f"/sessions/{sid}/arc").json()
print(f"\narc has {len(arc['points'])} points over {', '.join(arc['labels'])}")
blocked = client.post(f"/sessions/{sid}/utterance", json={"text": "one more?"})
print(f"turn 6 -> HTTP {blocked.status_code}: {blocked.json()['message']}")
