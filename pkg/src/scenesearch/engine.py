"""Engine facade: providers + vector store + video catalog, with persistence.

The engine is what the service and CLI drive. Ingest stages all embeddings
first and only then inserts, so a failed ingest leaves no partial records;
searches are pure reads delegated to the query functions.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from . import queryengine
from .domain import VideoMeta
from .errors import ConflictError, CorruptStoreError, NotFoundError
from .ingest import IngestConfig, IngestReport, VideoManifest, prepare_video
from .providers import (
    ProviderConfig,
    make_image_embedder,
    make_text_embedder,
    make_transformer,
)
from .queryengine import QueryConfig
from .vectorstore import REQUIRED_COLLECTIONS, VectorStore

VIDEOS_FILE = "videos.json"


class SearchEngine:
    """One retrieval deployment: three collections plus the video catalog."""

    def __init__(
        self,
        store: VectorStore | None = None,
        videos: dict[str, VideoMeta] | None = None,
        text_provider: ProviderConfig = ProviderConfig(),
        image_provider: ProviderConfig = ProviderConfig(),
        transform_provider: ProviderConfig = ProviderConfig(),
        ingest_config: IngestConfig = IngestConfig(),
        query_config: QueryConfig = QueryConfig(),
    ):
        self.text_embedder = make_text_embedder(text_provider)
        self.image_embedder = make_image_embedder(image_provider)
        self.transformer = make_transformer(transform_provider)
        self.ingest_config = ingest_config
        self.query_config = query_config
        if store is None:
            store = VectorStore.with_collections(
                {
                    "keyframes": image_provider.dim,
                    "transcripts": text_provider.dim,
                    "summaries": text_provider.dim,
                }
            )
        for name in REQUIRED_COLLECTIONS:
            if name not in store.collection_names():
                raise CorruptStoreError(f"store is missing required collection {name!r}")
        expected_dims = {
            "keyframes": image_provider.dim,
            "transcripts": text_provider.dim,
            "summaries": text_provider.dim,
        }
        for name, dim in expected_dims.items():
            if store.dim(name) != dim:
                raise CorruptStoreError(
                    f"collection {name!r} has dim {store.dim(name)}, provider expects {dim}"
                )
        self.store = store
        self.videos: dict[str, VideoMeta] = dict(videos or {})
        self._ingest_lock = threading.Lock()

    # -- ingest ---------------------------------------------------------------

    def ingest(self, manifest: VideoManifest, config: IngestConfig | None = None) -> IngestReport:
        """Ingest one video atomically; duplicate video ids conflict."""
        video_id = manifest.meta.video_id
        if video_id in self.videos:
            raise ConflictError(f"video {video_id!r} is already ingested")
        keyframe_rows, interval_rows, summary_row, report = prepare_video(
            manifest,
            config or self.ingest_config,
            self.text_embedder,
            self.image_embedder,
            self.transformer,
        )
        with self._ingest_lock:
            if video_id in self.videos:
                raise ConflictError(f"video {video_id!r} is already ingested")
            for record_id, vector, metadata in keyframe_rows:
                self.store.insert("keyframes", record_id, vector, metadata)
            for record_id, vector, metadata in interval_rows:
                self.store.insert("transcripts", record_id, vector, metadata)
            if summary_row is not None:
                record_id, vector, metadata = summary_row
                self.store.insert("summaries", record_id, vector, metadata)
            self.videos[video_id] = manifest.meta
        return report

    # -- queries --------------------------------------------------------------

    def frame_search(self, query_text: str, k: int | None = None) -> list[queryengine.VideoGroup]:
        return queryengine.frame_search(
            self.store, self.text_embedder, query_text, self._config(frame_k=k)
        )

    def transcript_search(
        self, query_text: str, keyword: str | None = None, k: int | None = None
    ) -> list[queryengine.TranscriptMatch]:
        return queryengine.transcript_search(
            self.store, self.text_embedder, query_text, keyword, self._config(transcript_k=k)
        )

    def summary_search(self, query_text: str, k: int | None = None) -> list[queryengine.SummaryMatch]:
        return queryengine.summary_search(
            self.store, self.text_embedder, query_text, self._config(summary_k=k)
        )

    def temporal_search(
        self, e1_text: str, e2_text: str, max_gap_s: float | None = None
    ) -> list[queryengine.TemporalVideoScore]:
        return queryengine.temporal_search(
            self.store,
            self.text_embedder,
            e1_text,
            e2_text,
            self._config(temporal_max_gap_s=max_gap_s),
        )

    def _config(self, **overrides) -> QueryConfig:
        changed = {k: v for k, v in overrides.items() if v is not None}
        if not changed:
            return self.query_config
        base = self.query_config
        return QueryConfig(
            frame_k=changed.get("frame_k", base.frame_k),
            transcript_k=changed.get("transcript_k", base.transcript_k),
            summary_k=changed.get("summary_k", base.summary_k),
            temporal_max_gap_s=changed.get("temporal_max_gap_s", base.temporal_max_gap_s),
            temporal_top_m=base.temporal_top_m,
            w_pair=base.w_pair,
            w_avg=base.w_avg,
        )

    # -- catalog --------------------------------------------------------------

    def video(self, video_id: str) -> VideoMeta:
        meta = self.videos.get(video_id)
        if meta is None:
            raise NotFoundError(f"unknown video {video_id!r}")
        return meta

    def video_keyframes(self, video_id: str) -> list[queryengine.KeyframeInfo]:
        self.video(video_id)
        infos = [
            queryengine.keyframe_info(kf_id, meta)
            for kf_id, meta in self.store.records("keyframes", filter={"video_id": video_id})
        ]
        infos.sort(key=lambda kf: (kf.timestamp_s, kf.keyframe_id))
        return infos

    def counts(self) -> dict[str, int]:
        return {name: self.store.count(name) for name in REQUIRED_COLLECTIONS}

    # -- persistence ----------------------------------------------------------

    def save(self, directory: "str | Path") -> None:
        """Persist collections and catalog; each file is written temp-then-rename."""
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        self.store.save(root)
        catalog = {
            video_id: {
                "fps": meta.fps,
                "duration_s": meta.duration_s,
                "url": meta.source_url,
                "title": meta.title,
            }
            for video_id, meta in sorted(self.videos.items())
        }
        payload = json.dumps(catalog, ensure_ascii=False, sort_keys=True, indent=2)
        tmp = root / (VIDEOS_FILE + ".tmp")
        tmp.write_text(payload, encoding="utf-8")
        os.replace(tmp, root / VIDEOS_FILE)

    @classmethod
    def load(
        cls,
        directory: "str | Path",
        text_provider: ProviderConfig = ProviderConfig(),
        image_provider: ProviderConfig = ProviderConfig(),
        transform_provider: ProviderConfig = ProviderConfig(),
        ingest_config: IngestConfig = IngestConfig(),
        query_config: QueryConfig = QueryConfig(),
    ) -> "SearchEngine":
        root = Path(directory)
        store = VectorStore.load(root)
        videos: dict[str, VideoMeta] = {}
        videos_path = root / VIDEOS_FILE
        if videos_path.exists():
            try:
                catalog = json.loads(videos_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise CorruptStoreError(f"{videos_path} is not valid JSON") from exc
            for video_id, entry in catalog.items():
                videos[video_id] = VideoMeta(
                    video_id=video_id,
                    fps=float(entry["fps"]),
                    duration_s=float(entry["duration_s"]),
                    source_url=entry.get("url", ""),
                    title=entry.get("title"),
                )
        return cls(
            store=store,
            videos=videos,
            text_provider=text_provider,
            image_provider=image_provider,
            transform_provider=transform_provider,
            ingest_config=ingest_config,
            query_config=query_config,
        )

    @classmethod
    def open(cls, directory: "str | Path", **kwargs) -> "SearchEngine":
        """Load an existing store directory, or start fresh when it has none."""
        root = Path(directory)
        if root.exists() and any(root.glob("*.mrvv")):
            return cls.load(root, **kwargs)
        return cls(**kwargs)
