"""HTTP front end: sessions over REST plus a server-sent-event feed.

Each session owns one game and an asyncio lock, so two clients hammering
the same session see commands applied one at a time, in arrival order.
"""

from __future__ import annotations

import asyncio
import logging
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from . import runtime
from .errors import EngineError, GatewayError
from .llm import GatewayConfig, LlmGateway
from .pipeline import StoryRequest, initialize_game
from .runtime import GameState

log = logging.getLogger(__name__)


@dataclass
class Session:
    id: str
    state: GameState
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)
    transcript: list[dict] = field(default_factory=list)
    subscribers: list[asyncio.Queue] = field(default_factory=list)

    def broadcast(self, event: dict) -> None:
        self.transcript.append(event)
        for queue in list(self.subscribers):
            queue.put_nowait(event)


def _json_event(event: dict) -> str:
    from . import jsonio

    body = jsonio.dumps(event).strip().replace("\n", " ")
    return f"data: {body}\n\n"


def create_app(
    default_game: Path | str | None = None,
    fixtures: Path | str | None = None,
    ui_dir: Path | str | None = None,
) -> FastAPI:
    """Build the API around an optional pre-built game and fixture store."""
    app = FastAPI(title="s2g", version="0.1.0")
    sessions: dict[str, Session] = {}
    app.state.sessions = sessions

    def make_gateway() -> LlmGateway:
        config = GatewayConfig.from_env(fixtures=fixtures)
        return LlmGateway(config)

    def get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="no such session")
        return session

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "sessions": len(sessions)}

    @app.post("/sessions", status_code=201)
    async def create_session(payload: dict | None = Body(None)) -> dict:
        payload = payload or {}
        try:
            if "snapshot" in payload:
                state = GameState.from_dict(payload["snapshot"])
            elif "request" in payload:
                request = StoryRequest.from_dict(payload["request"])
                seed = int(payload.get("seed", 0))
                built = initialize_game(request, make_gateway(), seed=seed)
                state = built.state
            elif default_game is not None:
                state = GameState.load(default_game)
            else:
                raise HTTPException(
                    status_code=400,
                    detail="send a snapshot or a request; no default game is loaded",
                )
        except HTTPException:
            raise
        except (EngineError, GatewayError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=f"bad session payload: {exc}") from exc

        session = Session(id=uuid.uuid4().hex, state=state)
        sessions[session.id] = session
        intro = runtime.describe_room(state)
        session.broadcast({"type": "session", "session_id": session.id, "display": intro})
        return {"session_id": session.id, "display": intro, "turn": state.turn}

    @app.post("/sessions/{session_id}/command")
    async def run_command(session_id: str, payload: dict = Body(...)) -> dict:
        session = get_session(session_id)
        text = payload.get("text")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(status_code=400, detail="command text is required")
        async with session.lock:
            llm = None
            try:
                llm = make_gateway()
            except GatewayError:
                pass  # play proceeds; invented verbs will explain themselves
            result = runtime.step(text, session.state, llm=llm)
            event = {"type": "command", "text": text, "result": result.to_dict()}
            session.broadcast(event)
        return result.to_dict()

    @app.get("/sessions/{session_id}/snapshot")
    async def snapshot(session_id: str) -> dict:
        session = get_session(session_id)
        async with session.lock:
            return session.state.to_dict()

    @app.get("/sessions/{session_id}/events")
    async def events(session_id: str) -> StreamingResponse:
        session = get_session(session_id)
        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(queue)
        for event in session.transcript:
            queue.put_nowait(event)  # replay history so late joiners catch up

        async def stream():
            try:
                while True:
                    event = await queue.get()
                    yield _json_event(event)
            finally:
                if queue in session.subscribers:
                    session.subscribers.remove(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
