"""HTTP + WebSocket surface for the operator console.

Endpoints:
    POST /session                  {participant:{id, age?, gender?, confounds?}} -> {session_id}
    POST /session/{id}/advance     -> state snapshot
    POST /session/{id}/rating      {checkpoint, value} -> state snapshot
    GET  /session/{id}/state       -> state snapshot
    WS   /session/{id}/stream      pushes {type:"snapshot", state, signals}
                                   once per poll tick; signals are decimated
                                   (t_ms, value) pairs per channel.

Errors return {"error": <ExceptionName>, "detail": str, ...}; the rating
gate includes the missing checkpoint.
"""

from __future__ import annotations

import asyncio
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from ..core.types import ParticipantMeta
from .state import RatingGate, SessionError, SessionService, UnknownSession


class ParticipantIn(BaseModel):
    id: str
    age: Optional[int] = None
    gender: str = "na"
    confounds: dict[str, str] = Field(default_factory=dict)


class StartIn(BaseModel):
    participant: ParticipantIn


class RatingIn(BaseModel):
    checkpoint: str
    value: int


def create_app(service: SessionService, tick_s: float = 1.0) -> FastAPI:
    app = FastAPI(title="vocstress session service")
    app.state.service = service

    @app.exception_handler(SessionError)
    async def _session_error(_, exc: SessionError):
        payload = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, RatingGate):
            payload["missing"] = exc.checkpoint
        return JSONResponse(status_code=getattr(exc, "status", 400), content=payload)

    @app.post("/session")
    async def start(body: StartIn):
        meta = ParticipantMeta(
            id=body.participant.id,
            age=body.participant.age,
            gender=body.participant.gender,
            confounds=dict(body.participant.confounds),
        )
        session_id = service.start_session(meta)
        return {"session_id": session_id}

    @app.post("/session/{session_id}/advance")
    async def advance(session_id: str):
        service.pump_bridge()
        return service.advance_phase(session_id)

    @app.post("/session/{session_id}/rating")
    async def rating(session_id: str, body: RatingIn):
        return service.record_rating(session_id, body.checkpoint, body.value)

    @app.get("/session/{session_id}/state")
    async def state(session_id: str):
        service.pump_bridge()
        return service.get_state(session_id).snapshot()

    @app.websocket("/session/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        await ws.accept()
        last_signal_ms = -1
        try:
            while True:
                service.pump_bridge()
                try:
                    snap = service.get_state(session_id).snapshot()
                except UnknownSession:
                    await ws.send_json({"type": "error", "error": "UnknownSession"})
                    break
                signals = service.recent_signals(last_signal_ms)
                for pts in signals.values():
                    for t, _ in pts:
                        last_signal_ms = max(last_signal_ms, int(t))
                await ws.send_json({"type": "snapshot", "state": snap, "signals": signals})
                if snap["done"]:
                    break
                await asyncio.sleep(tick_s)
        except WebSocketDisconnect:
            pass

    return app
