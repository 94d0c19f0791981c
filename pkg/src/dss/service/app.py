"""Live-play HTTP service: one engine stack per session.

Sessions live in memory; completed logs can optionally be appended to a
JSONL file. Requests within one session are serialized behind a per-session
lock, so the turn-based engine never sees interleaved mutations; distinct
sessions proceed independently.
"""
from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles

from ..config import PayoffSpec, TomConfig, payoff_from_config, tom_from_config
from ..engine import CONDITIONS, SessionEngine
from ..errors import ConfigError, SessionFinished
from ..policy import Policy, train_policy
from .schemas import (
    ActionRequest,
    ActionResponse,
    CreateSessionRequest,
    CreateSessionResponse,
    View,
)


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, tuple[SessionEngine, threading.Lock]] = {}
        self._guard = threading.Lock()

    def create(self, engine: SessionEngine) -> str:
        session_id = uuid.uuid4().hex
        with self._guard:
            self._sessions[session_id] = (engine, threading.Lock())
        return session_id

    def get(self, session_id: str) -> tuple[SessionEngine, threading.Lock]:
        with self._guard:
            entry = self._sessions.get(session_id)
        if entry is None:
            raise HTTPException(status_code=404, detail="unknown session id")
        return entry


def create_app(config: dict | None = None) -> FastAPI:
    config = config or {}
    base_spec = payoff_from_config(config)
    base_tom = tom_from_config(config)
    templates = config.get("templates")
    log_dir = config.get("log_dir")
    static_dir = config.get("static_dir")

    app = FastAPI(title="bomb-defusal decision support", version="0.1.0")
    store = SessionStore()
    policies: dict[str, Policy] = {}
    policy_guard = threading.Lock()

    def policy_for(spec: PayoffSpec) -> Policy:
        key = spec.spec_hash()
        with policy_guard:
            if key not in policies:
                policies[key] = train_policy(spec)
            return policies[key]

    def build_view(engine: SessionEngine, session_id: str) -> View:
        return View(session_id=session_id, **engine.view())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", response_model=CreateSessionResponse)
    def create_session(request: CreateSessionRequest) -> CreateSessionResponse:
        if request.condition not in CONDITIONS:
            raise HTTPException(status_code=400, detail=f"unknown condition {request.condition!r}")
        overrides = request.config_overrides or {}
        try:
            spec = PayoffSpec.from_dict({**base_spec.to_dict(), **overrides.get("payoff", {})})
            tom_config = (
                TomConfig.from_dict(overrides["tom"]) if "tom" in overrides else base_tom
            )
            engine = SessionEngine(
                request.condition,
                spec,
                policy_for(spec),
                tom_config=tom_config,
                templates=overrides.get("templates", templates),
                rho=float(overrides.get("rho", 0.095)),
                seed=int(overrides.get("seed", uuid.uuid4().int & (2**48 - 1))),
                trials=int(overrides.get("trials", 12)),
                training_trials=int(overrides.get("training_trials", 3)),
            )
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        session_id = store.create(engine)
        return CreateSessionResponse(session_id=session_id, view=build_view(engine, session_id))

    @app.get("/sessions/{session_id}/state", response_model=View)
    def session_state(session_id: str) -> View:
        engine, lock = store.get(session_id)
        with lock:
            return build_view(engine, session_id)

    @app.post("/sessions/{session_id}/action", response_model=ActionResponse)
    def session_action(session_id: str, request: ActionRequest) -> ActionResponse:
        engine, lock = store.get(session_id)
        with lock:
            try:
                result = engine.apply_action(request.action)
            except SessionFinished as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            if engine.finished and log_dir:
                path = Path(log_dir)
                path.mkdir(parents=True, exist_ok=True)
                with open(path / "sessions.jsonl", "a") as fh:
                    fh.write(json.dumps({"session_id": session_id, **engine.log.to_dict()}) + "\n")
            return ActionResponse(
                reward=result["reward"],
                time_cost=result["time_cost"],
                done=result["done"],
                next_view=build_view(engine, session_id),
            )

    @app.get("/sessions/{session_id}/log")
    def session_log(session_id: str) -> dict:
        engine, lock = store.get(session_id)
        with lock:
            return engine.log.to_dict()

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
