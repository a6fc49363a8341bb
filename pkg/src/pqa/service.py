"""HTTP service: JSON chat sessions plus catalog read/write endpoints."""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from .engine import MAX_MESSAGE_BYTES, Engine
from .errors import (
    DuplicateName,
    PqaError,
    UnknownDataset,
    UnknownModel,
    UnknownSession,
)

_STATUS = {
    UnknownSession: 404,
    UnknownModel: 404,
    UnknownDataset: 404,
    DuplicateName: 409,
}


class MessageBody(BaseModel):
    text: str


def _error_response(exc: PqaError, status: int | None = None) -> JSONResponse:
    status = status or next(
        (code for cls, code in _STATUS.items() if isinstance(exc, cls)), 400
    )
    return JSONResponse(
        status_code=status,
        content={"error": {"code": exc.code, "message": exc.message}},
    )


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="pqa", version="0.1.0")

    @app.exception_handler(PqaError)
    async def handle_pqa_error(_request: Request, exc: PqaError):
        return _error_response(exc)

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session = engine.create_session()
        return {"session_id": session.id, "phase": session.phase}

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = engine.get_session(session_id)
        return {
            "session_id": session.id,
            "phase": session.phase,
            "transcript": [[role, text] for role, text in session.transcript],
        }

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageBody):
        if len(body.text.encode("utf-8")) > MAX_MESSAGE_BYTES:
            return _error_response(
                PqaError(f"message exceeds {MAX_MESSAGE_BYTES} bytes"), status=413
            )
        reply = engine.handle_message(session_id, body.text)
        return {"kind": reply.kind, "text": reply.text, "payload": reply.payload}

    @app.post("/v1/datasets", status_code=201)
    async def upload_dataset(request: Request, name: str):
        csv_text = (await request.body()).decode("utf-8")
        profile = engine.ingest_dataset(csv_text, name)
        return _dataset_summary(profile)

    @app.get("/v1/datasets")
    def list_datasets():
        return {"datasets": [_dataset_summary(p) for p in engine.list_datasets()]}

    @app.get("/v1/datasets/{name}/profile")
    def dataset_profile(name: str):
        return PlainTextResponse(engine.get_dataset(name).profile_text)

    @app.get("/v1/models")
    def list_models():
        return {"models": [_model_summary(card) for card in engine.list_models()]}

    @app.get("/v1/models/{name}/profile")
    def model_profile(name: str):
        return PlainTextResponse(engine.get_model(name).profile_text)

    return app


def _dataset_summary(profile) -> dict:
    return {
        "name": profile.name,
        "row_count": profile.row_count,
        "columns": [
            {"name": c.name, "dtype": c.dtype, "distinct_hint": c.distinct_hint}
            for c in profile.columns
        ],
    }


def _model_summary(card) -> dict:
    summary = asdict(card)
    summary.pop("profile_text")
    summary["feature_order"] = list(card.feature_order)
    return summary
