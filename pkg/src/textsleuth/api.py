"""JSON-over-HTTP service for the exploration UI and scripts.

The server is stateless with respect to exploration: the full filter
object travels with every request, so filter history can live entirely
client-side. Mutations are idempotent on repeat. Every non-2xx response
body is an ApiError object {code, message, details?}.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from typing import Optional

from fastapi import Body, FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from textsleuth.errors import (
    CollectionNotFound,
    EntityNotFound,
    InvalidDictionary,
    MalformedDateRange,
    SelfMerge,
    SpanOutOfBounds,
    TextsleuthError,
    UnknownEntity,
    UnknownField,
)
from textsleuth.index import FilterQuery, IndexStore
from textsleuth.pipeline import IngestStatusBoard

log = logging.getLogger(__name__)

DEFAULT_PORT = 8083

_ERROR_MAP = [
    (UnknownEntity, 400, "UnknownEntity"),
    (MalformedDateRange, 400, "MalformedFilter"),
    (UnknownField, 400, "UnknownField"),
    (SpanOutOfBounds, 400, "SpanOutOfBounds"),
    (InvalidDictionary, 400, "InvalidDictionary"),
    (SelfMerge, 409, "SelfMerge"),
    (EntityNotFound, 404, "NotFound"),
    (CollectionNotFound, 404, "NotFound"),
]


class Workspace:
    """Lazy-loading registry of collections under one data directory."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        self._stores: dict = {}
        self._lock = threading.Lock()
        self.ingest_board: Optional[IngestStatusBoard] = None

    def collection_ids(self) -> list:
        ids = set(self._stores)
        if os.path.isdir(self.data_dir):
            for name in os.listdir(self.data_dir):
                if os.path.exists(os.path.join(self.data_dir, name, "units.jsonl")):
                    ids.add(name)
        return sorted(ids)

    def collection(self, collection_id: str) -> IndexStore:
        with self._lock:
            store = self._stores.get(collection_id)
            if store is not None:
                return store
            directory = os.path.join(self.data_dir, collection_id)
            if not os.path.exists(os.path.join(directory, "units.jsonl")):
                raise CollectionNotFound(collection_id)
            log.info("loading collection %r from %s", collection_id, directory)
            store = IndexStore.load(collection_id, directory)
            self._stores[collection_id] = store
            return store

    def attach(self, store: IndexStore) -> None:
        with self._lock:
            self._stores[store.collection_id] = store


def _error_response(exc: Exception) -> JSONResponse:
    for exc_type, status, code in _ERROR_MAP:
        if isinstance(exc, exc_type):
            return JSONResponse(
                status_code=status, content={"code": code, "message": str(exc)}
            )
    if isinstance(exc, (ValueError, json.JSONDecodeError)):
        return JSONResponse(
            status_code=400, content={"code": "MalformedFilter", "message": str(exc)}
        )
    log.exception("internal error: %s", exc)
    return JSONResponse(
        status_code=500, content={"code": "Internal", "message": str(exc)}
    )


def _parse_filter(payload) -> FilterQuery:
    if payload is None:
        return FilterQuery()
    if isinstance(payload, str):
        payload = json.loads(payload) if payload.strip() else {}
    if not isinstance(payload, dict):
        raise MalformedDateRange("filter must be a JSON object")
    return FilterQuery.from_dict(payload)


def create_app(workspace: Workspace, ui_dir: Optional[str] = None,
               ui_origin: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="textsleuth", docs_url=None, redoc_url=None)
    app.state.workspace = workspace

    origins = [o for o in (ui_origin or os.environ.get("NEWSLEAK_UI_ORIGIN", "")).split(",") if o]
    if origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(TextsleuthError)
    async def on_domain_error(request: Request, exc: TextsleuthError):
        return _error_response(exc)

    @app.exception_handler(ValueError)
    async def on_value_error(request: Request, exc: ValueError):
        return _error_response(exc)

    @app.get("/api/collections")
    def collections():
        return {"collections": workspace.collection_ids()}

    @app.get("/api/c/{collection_id}/meta")
    def meta(collection_id: str):
        return workspace.collection(collection_id).meta()

    @app.post("/api/c/{collection_id}/search")
    def search(collection_id: str, payload: dict = Body(default={})):
        store = workspace.collection(collection_id)
        flt = _parse_filter(payload.get("filter"))
        page = int(payload.get("page", 0))
        page_size = int(payload.get("page_size", 10))
        return store.query(flt, page=page, page_size=page_size)

    @app.get("/api/c/{collection_id}/graph")
    def graph(
        collection_id: str,
        kind: str = Query("entity"),
        top_n: int = Query(50),
        filter: Optional[str] = Query(None),
    ):
        store = workspace.collection(collection_id)
        return store.graph(_parse_filter(filter), kind, top_n).to_dict()

    @app.get("/api/c/{collection_id}/aggregate")
    def aggregate(
        collection_id: str,
        field: str = Query(...),
        filter: Optional[str] = Query(None),
    ):
        store = workspace.collection(collection_id)
        return {"field": field, "buckets": store.aggregate(_parse_filter(filter), field)}

    @app.get("/api/c/{collection_id}/units/{unit_id}")
    def unit_detail(collection_id: str, unit_id: str):
        return workspace.collection(collection_id).unit_detail(unit_id)

    @app.post("/api/c/{collection_id}/entities/{entity_id}/merge")
    def merge(collection_id: str, entity_id: int, payload: dict = Body(...)):
        store = workspace.collection(collection_id)
        into = payload.get("into")
        if into is None:
            raise ValueError("body must carry {'into': entity_id}")
        result = store.merge_entities(entity_id, int(into))
        _autosave(store)
        return result

    @app.post("/api/c/{collection_id}/entities/{entity_id}/blacklist")
    def blacklist(collection_id: str, entity_id: int):
        store = workspace.collection(collection_id)
        result = store.blacklist_entity(entity_id)
        _autosave(store)
        return result

    @app.post("/api/c/{collection_id}/units/{unit_id}/tags")
    def tag(collection_id: str, unit_id: str, payload: dict = Body(...)):
        store = workspace.collection(collection_id)
        tag_value = payload.get("tag", "")
        result = store.tag_unit(unit_id, str(tag_value))
        _autosave(store)
        return result

    @app.post("/api/c/{collection_id}/units/{unit_id}/annotations")
    def annotate(collection_id: str, unit_id: str, payload: dict = Body(...)):
        store = workspace.collection(collection_id)
        result = store.add_manual_annotation(
            unit_id,
            int(payload["start"]),
            int(payload["end"]),
            str(payload.get("type", "PER")),
            label=payload.get("label"),
        )
        _autosave(store)
        return result

    @app.get("/api/ingest/status")
    def ingest_status():
        board = workspace.ingest_board

        def event_stream():
            if board is None:
                return
            for event in board.stream():
                yield f"data: {json.dumps(event, sort_keys=True)}\n\n"

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    if ui_dir and os.path.isdir(ui_dir):
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _autosave(store: IndexStore) -> None:
    # mutation events already appended to the log; nothing else to do
    # when the store has no backing directory (in-memory collections)
    return None


def serve(
    data_dir: str,
    port: Optional[int] = None,
    host: str = "127.0.0.1",
    ui_dir: Optional[str] = None,
    workspace: Optional[Workspace] = None,
) -> None:
    import uvicorn

    workspace = workspace or Workspace(data_dir)
    app = create_app(workspace, ui_dir=ui_dir)
    port = port or int(os.environ.get("NEWSLEAK_PORT", DEFAULT_PORT))
    log.info("serving on %s:%d (collections: %s)", host, port, workspace.collection_ids())
    uvicorn.run(app, host=host, port=port, log_level="info")
