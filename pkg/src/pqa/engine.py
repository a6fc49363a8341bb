"""Engine facade: one object binding encoder, catalog, provider, orchestrator,
and the live session table.  Both the HTTP service and the CLI drive this."""

from __future__ import annotations

import json
import os
import threading

from .catalog import Catalog, DatasetProfile, ModelCard
from .config import EngineConfig
from .embedding import HashNgramEncoder
from .errors import PqaError, UnknownSession
from .orchestrator import Orchestrator, Reply, Session
from .provider import RemoteProvider, RuleBasedProvider

MAX_MESSAGE_BYTES = 8192


class Engine:
    def __init__(self, config: EngineConfig):
        self.config = config
        config.data_dir.mkdir(parents=True, exist_ok=True)  # fail fast if unwritable
        self.encoder = HashNgramEncoder(
            dimension=config.embedding.dimension,
            seed=config.embedding.seed,
            ngram_min=config.embedding.ngram_min,
            ngram_max=config.embedding.ngram_max,
        )
        self.catalog = Catalog(config.data_dir, self.encoder)
        if config.provider.mode == "remote" and config.provider.endpoint:
            provider = RemoteProvider(
                endpoint=config.provider.endpoint,
                token=os.environ.get(config.provider.token_env) or None,
                timeout=config.provider.timeout,
            )
        else:
            provider = RuleBasedProvider()
        self.orchestrator = Orchestrator(
            self.catalog,
            provider,
            self.encoder,
            tau_model=config.tau_model,
            tau_dataset=config.tau_dataset,
            train_config=config.training,
        )
        self._sessions: dict[str, Session] = {}
        self._session_locks: dict[str, threading.Lock] = {}
        self._table_lock = threading.Lock()

    # -------------------------------------------------------------- sessions

    def create_session(self) -> Session:
        session = self.orchestrator.create_session()
        with self._table_lock:
            self._sessions[session.id] = session
            self._session_locks[session.id] = threading.Lock()
        return session

    def get_session(self, session_id: str) -> Session:
        with self._table_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"session {session_id!r} does not exist")
        return session

    def handle_message(self, session_id: str, text: str) -> Reply:
        if len(text.encode("utf-8")) > MAX_MESSAGE_BYTES:
            raise PqaError(f"message exceeds {MAX_MESSAGE_BYTES} bytes")
        session = self.get_session(session_id)
        with self._session_locks[session_id]:
            reply = self.orchestrator.handle_message(session, text)
            self._persist_turn(session, text, reply)
        return reply

    def _persist_turn(self, session: Session, text: str, reply: Reply) -> None:
        path = self.config.data_dir / "sessions" / f"{session.id}.jsonl"
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps({"role": "user", "text": text}, ensure_ascii=False) + "\n")
            fh.write(
                json.dumps(
                    {"role": "system", "text": reply.text, "kind": reply.kind},
                    ensure_ascii=False,
                )
                + "\n"
            )

    # --------------------------------------------------------------- catalog

    def ingest_dataset(self, csv_text: str, name: str) -> DatasetProfile:
        return self.catalog.ingest_dataset(csv_text, name)

    def list_datasets(self) -> list[DatasetProfile]:
        return self.catalog.list_datasets()

    def get_dataset(self, name: str) -> DatasetProfile:
        return self.catalog.get_dataset(name)

    def list_models(self) -> list[ModelCard]:
        return self.catalog.list_models()

    def get_model(self, name: str) -> ModelCard:
        return self.catalog.get_model(name)

    def rebuild_index(self) -> None:
        self.catalog.rebuild_index()
