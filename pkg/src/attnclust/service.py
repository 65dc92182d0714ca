"""Session-based HTTP service exposing the segmenter for interactive ROI annotation.

Sessions are in-memory with a TTL; each one owns an uploaded image, a
bounding box, accumulated strokes, and the current mask.  Masks are
bit-identical to the batch CLI for the same inputs and seed: iterate
calls accumulate a round count and the segmentation is re-derived from
scratch, so the deterministic trajectory is shared.
"""

from __future__ import annotations

import threading
import time
import uuid
import zlib
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .grabcut import SegmentationError, Stroke, grabcut_run
from .grabcut.segment import validate_bbox
from .imageio import ImageFormatError, decode_image, encode_pgm_mask

DEFAULT_TTL_SECONDS = 3600.0


class ApiError(Exception):
    def __init__(self, status: int, error: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.error = error
        self.detail = detail


class BboxBody(BaseModel):
    x: int
    y: int
    w: int
    h: int


class StrokeBody(BaseModel):
    kind: str
    points: list[tuple[int, int]]


class StrokesBody(BaseModel):
    strokes: list[StrokeBody]


class IterateBody(BaseModel):
    rounds: int


@dataclass
class Session:
    id: str
    image: np.ndarray
    bbox: tuple | None = None
    strokes: list = field(default_factory=list)
    total_rounds: int = 0
    mask: np.ndarray | None = None
    revision: int = 0
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def seed(self) -> int:
        return zlib.crc32(self.id.encode()) & 0x7FFFFFFF


class SessionStore:
    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl = ttl_seconds
        self._sessions: dict[str, Session] = {}
        self._guard = threading.Lock()

    def create(self, image: np.ndarray) -> Session:
        session = Session(id=uuid.uuid4().hex, image=image)
        with self._guard:
            self._purge()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._guard:
            self._purge()
            session = self._sessions.get(session_id)
            if session is None:
                raise ApiError(404, "unknown_session", f"no session {session_id!r}")
            session.last_access = time.monotonic()
            return session

    def _purge(self) -> None:
        now = time.monotonic()
        dead = [k for k, s in self._sessions.items() if now - s.last_access > self.ttl]
        for k in dead:
            del self._sessions[k]


def create_app(ui_dir=None, ttl_seconds: float = DEFAULT_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="attnclust annotation service")
    store = SessionStore(ttl_seconds=ttl_seconds)
    app.state.store = store

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": exc.error, "detail": exc.detail})

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.body()
        if not body:
            raise ApiError(400, "bad_image", "empty request body")
        try:
            image = decode_image(body)
        except ImageFormatError as exc:
            raise ApiError(400, "bad_image", str(exc))
        session = store.create(image)
        return {"id": session.id}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        s = store.get(session_id)
        return {
            "id": s.id,
            "width": int(s.image.shape[1]),
            "height": int(s.image.shape[0]),
            "revision": s.revision,
            "bbox": None if s.bbox is None else dict(zip(("x", "y", "w", "h"), s.bbox)),
            "strokes": len(s.strokes),
            "rounds": s.total_rounds,
            "seed": s.seed,
            "has_mask": s.mask is not None,
        }

    @app.post("/sessions/{session_id}/bbox")
    def set_bbox(session_id: str, body: BboxBody):
        s = store.get(session_id)
        with s.lock:
            try:
                bbox = validate_bbox(s.image.shape[1], s.image.shape[0], (body.x, body.y, body.w, body.h))
            except SegmentationError as exc:
                raise ApiError(400, "bad_bbox", str(exc))
            s.bbox = bbox
            s.total_rounds = 0
            s.mask = None
            s.revision += 1
            return {"revision": s.revision}

    @app.post("/sessions/{session_id}/strokes")
    def add_strokes(session_id: str, body: StrokesBody):
        s = store.get(session_id)
        with s.lock:
            if s.bbox is None:
                raise ApiError(409, "ordering", "set a bounding box before adding strokes")
            h, w = s.image.shape[:2]
            parsed = []
            for st in body.strokes:
                try:
                    stroke = Stroke(kind=st.kind, points=tuple(st.points))
                except SegmentationError as exc:
                    raise ApiError(400, "bad_stroke", str(exc))
                for px, py in stroke.points:
                    if not (0 <= px < w and 0 <= py < h):
                        raise ApiError(400, "bad_stroke", f"point ({px},{py}) outside {w}x{h} image")
                parsed.append(stroke)
            s.strokes.extend(parsed)
            s.revision += 1
            return {"revision": s.revision}

    @app.post("/sessions/{session_id}/iterate")
    def iterate(session_id: str, body: IterateBody):
        s = store.get(session_id)
        with s.lock:
            if s.bbox is None:
                raise ApiError(409, "ordering", "set a bounding box before iterating")
            if body.rounds < 0:
                raise ApiError(400, "bad_rounds", "rounds must be >= 0")
            if body.rounds > 0:
                total = s.total_rounds + body.rounds
                try:
                    result = grabcut_run(
                        s.image, s.bbox, s.strokes or None, iterations=total, seed=s.seed
                    )
                except SegmentationError as exc:
                    raise ApiError(400, "segmentation_failed", str(exc))
                s.total_rounds = total
                s.mask = result.mask
            s.revision += 1
            fg = int(s.mask.sum()) if s.mask is not None else 0
            return {"revision": s.revision, "foreground_pixels": fg}

    @app.get("/sessions/{session_id}/mask")
    def get_mask(session_id: str):
        s = store.get(session_id)
        if s.mask is None:
            raise ApiError(409, "no_mask", "run at least one iterate first")
        return Response(content=encode_pgm_mask(s.mask), media_type="image/x-portable-graymap")

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
