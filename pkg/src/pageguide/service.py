"""Local HTTP service exposing the engine to the companion UI.

Binds loopback by default; every endpoint requires the shared secret header
(X-PageGuide-Secret) generated at startup and written to the handshake file
({"port", "secret"}) for the UI to read. Guide sessions are single-writer:
a second concurrent request to the same session gets 409 Busy.

Live guide mode: the client re-captures the page after performing a step and
uploads it, then confirms with the fresh snapshot id; the engine treats that
upload as the next entry of the session's snapshot sequence.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.responses import JSONResponse

from . import guide as guide_engine
from . import hide as hide_engine
from . import serialize
from .config import Config
from .errors import (
    AlreadyApplied,
    BundleIoError,
    EmptyDataset,
    EmptySequence,
    GatewayError,
    InvalidCount,
    InvalidState,
    MalformedHideResponse,
    MalformedMeta,
    MalformedStep,
    MissingFile,
    NoSpanMatch,
    PageGuideError,
    ParseFailure,
    SchemaViolation,
    SequenceExhausted,
    StaleIndex,
    StepLimitExceeded,
    UnknownCandidate,
    UnknownElementId,
    UnknownMutation,
    UnparseableHtml,
)
from .find import answer as find_answer
from .gateway import Gateway
from .indexing import ElementIndex, build_index
from .router import classify, context_for
from .snapshots import EPOCH, Snapshot, build_snapshot

SESSION_TTL_SECONDS = 3600.0
SECRET_HEADER = "X-PageGuide-Secret"

# Module error -> HTTP status. Every PageGuideError subclass must resolve
# through this table (checked by the acceptance suite).
STATUS_BY_ERROR: dict[type, int] = {
    MissingFile: 404,
    MalformedMeta: 400,
    UnparseableHtml: 400,
    BundleIoError: 500,
    EmptySequence: 400,
    UnknownElementId: 400,
    NoSpanMatch: 400,
    GatewayError: 502,
    ParseFailure: 502,
    InvalidState: 409,
    MalformedStep: 502,
    SequenceExhausted: 409,
    StepLimitExceeded: 409,
    MalformedHideResponse: 502,
    UnknownCandidate: 400,
    AlreadyApplied: 409,
    StaleIndex: 409,
    UnknownMutation: 400,
    InvalidCount: 400,
    EmptyDataset: 400,
    SchemaViolation: 400,
    PageGuideError: 500,
}


def status_for(exc: PageGuideError) -> int:
    for klass in type(exc).__mro__:
        if klass in STATUS_BY_ERROR:
            return STATUS_BY_ERROR[klass]
    return 500


def _api_error(status: int, code: str, message: str,
               detail: Optional[dict] = None) -> HTTPException:
    payload = {"code": code, "message": message}
    if detail:
        payload["detail"] = detail
    return HTTPException(status_code=status, detail=payload)


@dataclass
class _SessionEntry:
    session: guide_engine.GuideSession
    source: guide_engine.SnapshotSource
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_used: float = field(default_factory=time.monotonic)


@dataclass
class ServiceState:
    gateway: Gateway
    config: Config
    secret: str
    snapshots: dict[str, Snapshot] = field(default_factory=dict)
    indexes: dict[str, ElementIndex] = field(default_factory=dict)
    sessions: dict[str, _SessionEntry] = field(default_factory=dict)
    proposals: dict[str, hide_engine.HideProposal] = field(default_factory=dict)
    applied_proposals: set[str] = field(default_factory=set)
    store_lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self, snapshot_id: str) -> Snapshot:
        with self.store_lock:
            snapshot = self.snapshots.get(snapshot_id)
        if snapshot is None:
            raise _api_error(404, "unknown_snapshot",
                             f"snapshot {snapshot_id!r} not found")
        return snapshot

    def index_for(self, snapshot_id: str) -> ElementIndex:
        snapshot = self.snapshot(snapshot_id)
        with self.store_lock:
            index = self.indexes.get(snapshot_id)
            if index is None:
                index = build_index(snapshot)
                self.indexes[snapshot_id] = index
        return index

    def add_snapshot(self, snapshot: Snapshot) -> str:
        snapshot_id = "snap-" + secrets.token_hex(8)
        with self.store_lock:
            self.snapshots[snapshot_id] = snapshot
        return snapshot_id

    def session_entry(self, session_id: str) -> _SessionEntry:
        now = time.monotonic()
        with self.store_lock:
            expired = [
                sid for sid, entry in self.sessions.items()
                if now - entry.last_used > SESSION_TTL_SECONDS
            ]
            for sid in expired:
                del self.sessions[sid]
            entry = self.sessions.get(session_id)
        if entry is None:
            raise _api_error(404, "unknown_session",
                             f"session {session_id!r} not found")
        entry.last_used = now
        return entry


def create_app(gateway: Gateway, config: Optional[Config] = None,
               secret: Optional[str] = None) -> FastAPI:
    config = config or Config()
    state = ServiceState(
        gateway=gateway, config=config,
        secret=secret or secrets.token_hex(16),
    )
    app = FastAPI(title="pageguide", docs_url=None, redoc_url=None)
    app.state.engine = state

    def check_secret(x_pageguide_secret: str = Header(default="")) -> None:
        if not secrets.compare_digest(x_pageguide_secret, state.secret):
            raise _api_error(401, "unauthorized", "missing or wrong secret header")

    guarded = Depends(check_secret)

    @app.exception_handler(PageGuideError)
    async def _engine_error_handler(request: Request, exc: PageGuideError):
        return JSONResponse(
            status_code=status_for(exc),
            content={"detail": {"code": exc.code, "message": str(exc)}},
        )

    @app.post("/v1/snapshot", dependencies=[guarded])
    async def upload_snapshot(request: Request):
        raw = await request.body()
        if len(raw) > config.max_body_bytes:
            raise _api_error(413, "too_large",
                             f"body exceeds {config.max_body_bytes} bytes")
        try:
            payload = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise _api_error(400, "bad_json", f"invalid JSON body: {exc}")
        if not isinstance(payload, dict) or "html" not in payload or "url" not in payload:
            raise _api_error(400, "bad_request", "body needs html and url")
        snapshot = build_snapshot(
            html=str(payload["html"]),
            url=str(payload["url"]),
            title=str(payload.get("title", "")),
            captured_at=str(payload.get("captured_at", EPOCH)),
            layout_entries=payload.get("layout"),
        )
        snapshot_id = state.add_snapshot(snapshot)
        return {"snapshot_id": snapshot_id,
                "dropped_layout": snapshot.dropped_layout}

    @app.get("/v1/snapshot/{snapshot_id}/index", dependencies=[guarded])
    def snapshot_index(snapshot_id: str):
        # the UI resolves element ids to concrete nodes through this map;
        # the engine stays the only component that runs the indexer
        index = state.index_for(snapshot_id)
        return {"snapshot_ref": index.snapshot_ref,
                "elements": [serialize.indexed_element(el)
                             for el in index.elements]}

    @app.post("/v1/route", dependencies=[guarded])
    def route(body: dict):
        snapshot_id = str(body.get("snapshot_id", ""))
        query = str(body.get("query", ""))
        if not query:
            raise _api_error(400, "bad_request", "query must be non-empty")
        snapshot = state.snapshot(snapshot_id)
        decision = classify(query, context_for(snapshot), state.gateway)
        return serialize.route_decision(decision)

    @app.post("/v1/find", dependencies=[guarded])
    def find(body: dict):
        snapshot_id = str(body.get("snapshot_id", ""))
        query = str(body.get("query", ""))
        if not query:
            raise _api_error(400, "bad_request", "query must be non-empty")
        history = body.get("history") or []
        pairs = [(str(h[0]), str(h[1])) for h in history]
        index = state.index_for(snapshot_id)
        answer = find_answer(query, index, pairs, state.gateway)
        return serialize.grounded_answer(answer)

    @app.post("/v1/guide/start", dependencies=[guarded])
    def guide_start(body: dict):
        query = str(body.get("query", ""))
        if not query:
            raise _api_error(400, "bad_request", "query must be non-empty")
        snapshot_ids = body.get("snapshot_ids")
        if snapshot_ids:
            snapshots = [state.snapshot(str(sid)) for sid in snapshot_ids]
            source: guide_engine.SnapshotSource = guide_engine.SequenceSource(snapshots)
        else:
            snapshot_id = str(body.get("snapshot_id", ""))
            source = guide_engine.LiveSource(state.snapshot(snapshot_id))
        session = guide_engine.session_from_source(
            query, source, max_steps=config.max_steps)
        entry = _SessionEntry(session=session, source=source)
        with state.store_lock:
            state.sessions[session.session_id] = entry
        return {"session_id": session.session_id, "state": session.state}

    def _locked_entry(session_id: str) -> _SessionEntry:
        entry = state.session_entry(session_id)
        if not entry.lock.acquire(blocking=False):
            raise _api_error(409, "busy",
                             "another request is operating on this session")
        return entry

    @app.post("/v1/guide/{session_id}/next", dependencies=[guarded])
    def guide_next(session_id: str):
        entry = _locked_entry(session_id)
        try:
            step = guide_engine.next_step(entry.session, state.gateway)
            card = guide_engine.step_card(entry.session)
            return {"state": entry.session.state,
                    "step": serialize.guide_step(step), "card": card}
        finally:
            entry.lock.release()

    @app.post("/v1/guide/{session_id}/confirm", dependencies=[guarded])
    def guide_confirm(session_id: str, body: Optional[dict] = None):
        entry = _locked_entry(session_id)
        try:
            fresh_id = (body or {}).get("snapshot_id")
            if fresh_id is not None:
                if not isinstance(entry.source, guide_engine.LiveSource):
                    raise _api_error(400, "bad_request",
                                     "snapshot uploads only apply to live sessions")
                entry.source.stage(state.snapshot(str(fresh_id)))
            report = guide_engine.confirm_step(entry.session)
            return {"state": entry.session.state,
                    "divergence": serialize.divergence_report(report)}
        finally:
            entry.lock.release()

    @app.post("/v1/guide/{session_id}/stop", dependencies=[guarded])
    def guide_stop(session_id: str):
        entry = _locked_entry(session_id)
        try:
            guide_engine.stop(entry.session)
            return {"state": entry.session.state}
        finally:
            entry.lock.release()

    @app.post("/v1/hide/propose", dependencies=[guarded])
    def hide_propose(body: dict):
        snapshot_id = str(body.get("snapshot_id", ""))
        request_text = str(body.get("request", ""))
        if not request_text:
            raise _api_error(400, "bad_request", "request must be non-empty")
        index = state.index_for(snapshot_id)
        proposal = hide_engine.propose(request_text, index, state.gateway)
        with state.store_lock:
            state.proposals[snapshot_id] = proposal
        return serialize.hide_proposal(proposal)

    @app.post("/v1/hide/apply", dependencies=[guarded])
    def hide_apply(body: dict):
        snapshot_id = str(body.get("snapshot_id", ""))
        confirmed = body.get("confirmed_ids")
        if not isinstance(confirmed, list):
            raise _api_error(400, "bad_request", "confirmed_ids must be a list")
        snapshot = state.snapshot(snapshot_id)
        with state.store_lock:
            proposal = state.proposals.get(snapshot_id)
        if proposal is None:
            raise _api_error(404, "no_proposal",
                             f"no hide proposal for snapshot {snapshot_id!r}")
        if proposal.ref in state.applied_proposals:
            raise AlreadyApplied(f"proposal {proposal.ref} was already applied")
        confirmed_ids = {int(i) for i in confirmed}
        unknown = confirmed_ids - proposal.candidate_ids()
        if unknown:
            raise UnknownCandidate(f"ids {sorted(unknown)} are not proposed")
        decision = hide_engine.review(
            proposal, proposal.candidate_ids() - confirmed_ids)
        index = state.index_for(snapshot_id)
        mutated, record = hide_engine.apply(decision, snapshot, index)
        state.applied_proposals.add(proposal.ref)
        mutated_id = state.add_snapshot(mutated)
        directives = [
            {"node_path": record.entries[eid][0], "set_style": "display:none"}
            for eid in sorted(record.entries)
        ]
        return {"directives": directives, "mutated_snapshot_id": mutated_id}

    return app


def write_handshake(path, port: int, secret: str) -> None:
    from pathlib import Path

    handshake = Path(path)
    handshake.parent.mkdir(parents=True, exist_ok=True)
    handshake.write_text(json.dumps({"port": port, "secret": secret}),
                         encoding="utf-8")
