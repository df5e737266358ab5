"""HTTP facade over the engine for the console and scripted clients.

All endpoints speak JSON; error bodies always carry {error, message}.
Videos are never proxied: responses return the source URL and fps and the
console embeds the external player.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel, Field

from .engine import SearchEngine
from .errors import (
    ConflictError,
    InvalidArgumentError,
    InvalidSubmissionError,
    NotFoundError,
    ProviderUnavailableError,
    SceneSearchError,
)
from .evalharness import ResultItem, build_submission, verify_frame
from .ingest import IngestConfig, manifest_from_dict
from .providers import ProviderConfig
from .queryengine import QueryConfig, filter_groups_by_videos

SUBMISSION_ARCHIVE = "submission.zip"


@dataclass
class ServiceConfig:
    bind_address: str = "127.0.0.1:8000"
    store_path: str = "./store"
    text_provider: ProviderConfig = field(default_factory=ProviderConfig)
    image_provider: ProviderConfig = field(default_factory=ProviderConfig)
    transform_provider: ProviderConfig = field(default_factory=ProviderConfig)
    ingest: IngestConfig = field(default_factory=IngestConfig)
    query: QueryConfig = field(default_factory=QueryConfig)
    cors_allowed_origins: list[str] = field(default_factory=lambda: ["*"])

    @property
    def host(self) -> str:
        return self.bind_address.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind_address.rsplit(":", 1)[1])

    @classmethod
    def from_file(cls, path: "str | Path") -> "ServiceConfig":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        providers = doc.get("providers", {})

        def provider(name: str) -> ProviderConfig:
            entry = providers.get(name, {})
            return ProviderConfig(
                kind=entry.get("kind", "builtin"),
                endpoint_url=entry.get("endpoint_url", ""),
                dim=int(entry.get("dim", ProviderConfig().dim)),
                timeout_ms=int(entry.get("timeout_ms", ProviderConfig().timeout_ms)),
                api_key_env=entry.get("api_key_env", ""),
            )

        query = doc.get("query", {})
        defaults = QueryConfig()
        return cls(
            bind_address=doc.get("bind_address", cls.bind_address),
            store_path=doc.get("store_path", cls.store_path),
            text_provider=provider("text"),
            image_provider=provider("image"),
            transform_provider=provider("transform"),
            query=QueryConfig(
                frame_k=int(query.get("frame_k", defaults.frame_k)),
                transcript_k=int(query.get("transcript_k", defaults.transcript_k)),
                summary_k=int(query.get("summary_k", defaults.summary_k)),
                temporal_max_gap_s=float(
                    query.get("temporal_max_gap_s", defaults.temporal_max_gap_s)
                ),
                temporal_top_m=int(query.get("temporal_top_m", defaults.temporal_top_m)),
                w_pair=float(query.get("w_pair", defaults.w_pair)),
                w_avg=float(query.get("w_avg", defaults.w_avg)),
            ),
            cors_allowed_origins=doc.get("cors_allowed_origins", ["*"]),
        )


class FrameQuery(BaseModel):
    query: str
    k: int | None = Field(default=None, ge=1)
    allowed_videos: list[str] | None = None  # summary-filter result, applied server-side


class TranscriptQuery(BaseModel):
    query: str
    k: int | None = Field(default=None, ge=1)
    keyword: str | None = None


class TemporalQuery(BaseModel):
    e1: str
    e2: str
    max_gap_s: float | None = Field(default=None, gt=0)


class VerifyRequest(BaseModel):
    video_id: str
    frame_index: int = Field(ge=0)


class SubmissionItem(BaseModel):
    rank: int = Field(ge=1)
    video_id: str
    frame_index: int = Field(ge=0)
    answer: str | None = None


class BuildRequest(BaseModel):
    query_id: str
    items: list[SubmissionItem]


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def _hit_payload(hit) -> dict:
    return {"id": hit.id, "score": hit.score, "metadata": hit.metadata}


def _keyframe_payload(kf) -> dict:
    return {
        "keyframe_id": kf.keyframe_id,
        "video_id": kf.video_id,
        "frame_index": kf.frame_index,
        "timestamp_s": kf.timestamp_s,
    }


def create_app(engine: SearchEngine, config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="scenesearch", version="0.1.0")
    store_root = Path(config.store_path)

    if config.cors_allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=config.cors_allowed_origins,
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(RequestValidationError)
    async def on_bad_request(request: Request, exc: RequestValidationError):
        code = "invalid_query" if request.url.path.startswith("/search") else "invalid_argument"
        return _error(400, code, str(exc.errors()[:3]))

    @app.exception_handler(SceneSearchError)
    async def on_engine_error(request: Request, exc: SceneSearchError):
        if isinstance(exc, (InvalidArgumentError, InvalidSubmissionError)):
            code = "invalid_query" if request.url.path.startswith("/search") else "invalid_argument"
            return _error(400, code, str(exc))
        if isinstance(exc, NotFoundError):
            return _error(404, "not_found", str(exc))
        if isinstance(exc, ConflictError):
            return _error(409, "conflict", str(exc))
        if isinstance(exc, ProviderUnavailableError):
            return _error(503, "provider_unavailable", str(exc))
        return _error(500, "internal", str(exc))

    @app.get("/health")
    def health() -> dict:
        counts = engine.counts()
        return {"status": "ok", "videos": len(engine.videos), **counts}

    @app.post("/ingest")
    def ingest(manifest: dict) -> dict:
        report = engine.ingest(manifest_from_dict(manifest))
        return {
            "video_id": report.video_id,
            "n_shots": report.n_shots,
            "n_keyframes": report.n_keyframes,
            "n_intervals": report.n_intervals,
            "summary_generated": report.summary_generated,
            "warnings": report.warnings,
        }

    @app.post("/search/frames")
    def search_frames(body: FrameQuery) -> dict:
        groups = engine.frame_search(body.query, k=body.k)
        if body.allowed_videos is not None:
            groups = filter_groups_by_videos(groups, set(body.allowed_videos))
        return {
            "groups": [
                {
                    "video_id": group.video_id,
                    "group_score": group.group_score,
                    "hits": [_hit_payload(h) for h in group.hits],
                }
                for group in groups
            ]
        }

    @app.post("/search/transcripts")
    def search_transcripts(body: TranscriptQuery) -> dict:
        matches = engine.transcript_search(body.query, keyword=body.keyword, k=body.k)
        return {
            "matches": [
                {
                    "hit": _hit_payload(match.hit),
                    "keyframes": [_keyframe_payload(kf) for kf in match.keyframes],
                }
                for match in matches
            ]
        }

    @app.post("/search/summaries")
    def search_summaries(body: FrameQuery) -> dict:
        matches = engine.summary_search(body.query, k=body.k)
        return {
            "matches": [
                {"video_id": m.video_id, "summary_text": m.summary_text, "score": m.score}
                for m in matches
            ]
        }

    @app.post("/search/temporal")
    def search_temporal(body: TemporalQuery) -> dict:
        scores = engine.temporal_search(body.e1, body.e2, max_gap_s=body.max_gap_s)
        return {
            "videos": [
                {
                    "video_id": s.video_id,
                    "s_video": s.s_video,
                    "s_pair": s.s_pair,
                    "avg_top1": s.avg_top1,
                    "avg_top2": s.avg_top2,
                    "best_pair": {
                        "t1_s": s.best_pair.t1_s,
                        "t2_s": s.best_pair.t2_s,
                        "kf1": s.best_pair.kf1,
                        "kf2": s.best_pair.kf2,
                        "s1": s.best_pair.s1,
                        "s2": s.best_pair.s2,
                        "pair_score": s.best_pair.pair_score,
                    },
                }
                for s in scores
            ]
        }

    @app.get("/videos/{video_id}")
    def video_info(video_id: str) -> dict:
        meta = engine.video(video_id)
        return {
            "video_id": meta.video_id,
            "fps": meta.fps,
            "duration_s": meta.duration_s,
            "source_url": meta.source_url,
            "title": meta.title,
        }

    @app.get("/videos/{video_id}/keyframes")
    def video_keyframes(video_id: str) -> dict:
        return {
            "video_id": video_id,
            "keyframes": [_keyframe_payload(kf) for kf in engine.video_keyframes(video_id)],
        }

    @app.post("/submission/verify")
    def submission_verify(body: VerifyRequest) -> dict:
        record = verify_frame(engine.video(body.video_id), body.frame_index)
        return {
            "video_id": record.video_id,
            "frame_index": record.frame_index,
            "ok": record.ok,
            "timestamp_s": record.timestamp_s,
            "max_frame": record.max_frame,
            "reason": record.reason,
        }

    @app.post("/submission/build")
    def submission_build(body: BuildRequest) -> dict:
        items = [
            ResultItem(
                rank=item.rank,
                video_id=item.video_id,
                frame_index=item.frame_index,
                answer=item.answer,
            )
            for item in body.items
        ]
        path = build_submission(items, body.query_id, store_root / SUBMISSION_ARCHIVE, engine.videos)
        return {"archive": path.name, "query_id": body.query_id, "n_items": len(items)}

    @app.get("/submission/archive")
    def submission_archive() -> FileResponse:
        path = store_root / SUBMISSION_ARCHIVE
        if not path.exists():
            raise NotFoundError("no submission archive has been built yet")
        return FileResponse(path, media_type="application/zip", filename=SUBMISSION_ARCHIVE)

    @app.post("/snapshot")
    def snapshot() -> dict:
        engine.save(store_root)
        return {"status": "ok", "store_path": str(store_root)}

    return app


def serve(config: ServiceConfig) -> None:
    """Load (or create) the store at config.store_path and serve until stopped."""
    import uvicorn

    engine = SearchEngine.open(
        config.store_path,
        text_provider=config.text_provider,
        image_provider=config.image_provider,
        transform_provider=config.transform_provider,
        ingest_config=config.ingest,
        query_config=config.query,
    )
    app = create_app(engine, config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
