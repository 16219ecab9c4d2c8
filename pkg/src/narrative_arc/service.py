"""HTTP JSON API hosting interactive dialogue sessions.

Each session holds a fixed mode (reveal / conceal / neutral, i.e. a fixed
alpha), a seeded generator, and one evolving belief. A turn absorbs the
human line, selects a system reply from the conversation model under the
session's modulation, absorbs it too, and returns the arc point after the
reply. Sessions are kept in memory; turns within a session are serialized
by a per-session lock, distinct sessions run concurrently.

Errors are returned as ``{"code": int, "message": str}``. Request bodies
reject unknown fields.
"""

from __future__ import annotations

import json
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .arc import ShapingConfig
from .corpus import Utterance
from .shaping import (
    GenerationSession,
    greedy_select,
    rejection_select,
    score_candidates,
)
from .universe import NaiveBayesModel

__all__ = ["create_app", "MODE_DEFAULT_ALPHA"]

MODE_DEFAULT_ALPHA = {"reveal": 20.0, "conceal": -25.0, "neutral": 0.0}

DEFAULT_TURN_LIMIT = 5  # utterance-response pairs per scene


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: str | None = None
    alpha: float | None = None
    method: str = "greedy"
    seed: int | None = None
    turn_limit: int | None = None


class UtteranceRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str


def _mode_for_alpha(alpha: float) -> str:
    if alpha > 0:
        return "reveal"
    if alpha < 0:
        return "conceal"
    return "neutral"


def resolve_mode_alpha(mode: str | None, alpha: float | None) -> tuple[str, float]:
    """Fill in whichever of mode/alpha is missing and enforce consistency."""
    if mode is None and alpha is None:
        raise ValueError("provide mode or alpha")
    if mode is not None and mode not in MODE_DEFAULT_ALPHA:
        raise ValueError(f"unknown mode {mode!r}; expected reveal, conceal, or neutral")
    if alpha is None:
        return mode, MODE_DEFAULT_ALPHA[mode]
    if mode is not None and _mode_for_alpha(alpha) != mode:
        raise ValueError(f"alpha {alpha} is inconsistent with mode {mode!r}")
    return _mode_for_alpha(alpha), alpha


@dataclass
class SessionEntry:
    id: str
    mode: str
    method: str
    seed: int
    turn_limit: int
    session: GenerationSession
    k: int
    lock: threading.Lock = field(default_factory=threading.Lock)
    pairs_done: int = 0
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    updated: str = ""

    def config_dict(self) -> dict:
        cfg = self.session.config
        return {
            "mode": self.mode,
            "alpha": cfg.alpha,
            "max_score": cfg.max_score,
            "max_samples": cfg.max_samples,
            "method": self.method,
            "seed": self.seed,
            "turn_limit": self.turn_limit,
            "labels": list(self.session.model.labels),
        }


def _point_dict(point) -> dict:
    return {
        "step": point.step,
        "probs": [float(x) for x in point.distribution],
        "entropy": point.entropy,
        "delta": point.delta,
        "utterance_text": point.utterance_text,
    }


def create_app(
    model: NaiveBayesModel,
    provider,
    default_k: int = 16,
    default_method: str = "greedy",
    default_turn_limit: int = DEFAULT_TURN_LIMIT,
    base_seed: int | None = None,
    cors_origins: tuple[str, ...] = ("*",),
    persist_path=None,
) -> FastAPI:
    sessions: dict[str, SessionEntry] = {}
    store_lock = threading.Lock()

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        if persist_path is None:
            return
        with store_lock:
            entries = list(sessions.values())
        payload = {
            "sessions": [
                {
                    "session_id": e.id,
                    "config": e.config_dict(),
                    "transcript": [u.text for u in e.session.utterances],
                    "arc": e.session.arc().to_dict(),
                }
                for e in entries
            ]
        }
        with open(persist_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True)

    app = FastAPI(title="narrative-arc", version=__version__, lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    seed_rng = np.random.default_rng(base_seed)

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": 400, "message": str(exc.errors())})

    def get_entry(session_id: str) -> SessionEntry:
        with store_lock:
            entry = sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return entry

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__, "universes": list(model.labels)}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            mode, alpha = resolve_mode_alpha(req.mode, req.alpha)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        if req.method not in ("greedy", "rejection"):
            raise HTTPException(status_code=400, detail=f"unknown method {req.method!r}")
        turn_limit = req.turn_limit if req.turn_limit is not None else default_turn_limit
        if turn_limit < 1:
            raise HTTPException(status_code=400, detail="turn_limit must be >= 1")
        seed = req.seed if req.seed is not None else int(seed_rng.integers(2**32))
        config = ShapingConfig.default_for(alpha, len(model.universe_set))
        entry = SessionEntry(
            id=uuid.uuid4().hex,
            mode=mode,
            method=req.method,
            seed=seed,
            turn_limit=turn_limit,
            session=GenerationSession(model, provider, config,
                                      np.random.default_rng(seed)),
            k=default_k,
        )
        with store_lock:
            sessions[entry.id] = entry
        return {"session_id": entry.id, "config": entry.config_dict()}

    @app.post("/sessions/{session_id}/utterance")
    def post_utterance(session_id: str, req: UtteranceRequest, diagnostics: bool = False):
        entry = get_entry(session_id)
        text = req.text.strip()
        if not text:
            raise HTTPException(status_code=400, detail="empty utterance text")
        with entry.lock:
            if entry.pairs_done >= entry.turn_limit:
                raise HTTPException(
                    status_code=409,
                    detail=f"scene complete: turn limit of {entry.turn_limit} pairs reached",
                )
            session = entry.session
            session.commit(Utterance(text))
            candidates = provider.propose(session.last_utterance, entry.k, session.rng)
            if not candidates:
                raise HTTPException(status_code=500, detail="conversation model returned no candidates")
            scored = score_candidates(session, candidates)
            if entry.method == "greedy":
                chosen = greedy_select(scored)
            else:
                weights = np.array([c.q_score for c in candidates])
                weights = weights / weights.sum()

                def draw():
                    return candidates[session.rng.choice(len(candidates), p=weights)]

                chosen = rejection_select(session, draw)
            point = session.commit(chosen.utterance)
            entry.pairs_done += 1
            entry.updated = datetime.now(timezone.utc).isoformat()
            body = {
                "response_text": chosen.utterance.text,
                "arc_point": _point_dict(point),
                "pairs_done": entry.pairs_done,
                "turn_limit": entry.turn_limit,
            }
            if diagnostics:
                body["candidate_diagnostics"] = [
                    {
                        "text": sc.utterance.text,
                        "q": sc.candidate.q_score,
                        "delta": sc.delta,
                        "sigma": sc.sigma,
                        "q_tilde": sc.q_tilde,
                    }
                    for sc in scored
                ]
            return body

    @app.get("/sessions/{session_id}/arc")
    def get_arc(session_id: str):
        entry = get_entry(session_id)
        with entry.lock:
            return entry.session.arc().to_dict()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        entry = get_entry(session_id)
        with entry.lock:
            return {
                "session_id": entry.id,
                "config": entry.config_dict(),
                "transcript": [u.text for u in entry.session.utterances],
                "pairs_done": entry.pairs_done,
                "created": entry.created,
                "updated": entry.updated,
            }

    return app
