"""Multimodal video event retrieval engine.

Ingests video manifests into keyframe/transcript/summary collections,
serves exact cosine top-k search over them (frame, transcript, summary,
and two-event temporal modes), and scores ranked result lists with the
competition-style evaluation harness.
"""

from .domain import (
    Embedding,
    KeyframeRecord,
    Shot,
    TranscriptInterval,
    TranscriptSegment,
    VideoMeta,
    VideoSummary,
    frame_index_from_time,
    time_from_frame_index,
)
from .engine import SearchEngine
from .errors import (
    ConflictError,
    CorruptStoreError,
    InvalidArgumentError,
    InvalidSubmissionError,
    NoPairError,
    NoSummaryError,
    NotFoundError,
    ProviderUnavailableError,
    SceneSearchError,
)
from .ingest import IngestConfig, IngestReport, VideoManifest
from .providers import ProviderConfig, TransformKind
from .queryengine import QueryConfig, TemporalPair, TemporalVideoScore, VideoGroup
from .vectorstore import SearchHit, VectorStore

__version__ = "0.1.0"

__all__ = [
    "ConflictError",
    "CorruptStoreError",
    "Embedding",
    "IngestConfig",
    "IngestReport",
    "InvalidArgumentError",
    "InvalidSubmissionError",
    "KeyframeRecord",
    "NoPairError",
    "NoSummaryError",
    "NotFoundError",
    "ProviderConfig",
    "ProviderUnavailableError",
    "QueryConfig",
    "SceneSearchError",
    "SearchEngine",
    "SearchHit",
    "Shot",
    "TemporalPair",
    "TemporalVideoScore",
    "TranscriptInterval",
    "TranscriptSegment",
    "TransformKind",
    "VectorStore",
    "VideoGroup",
    "VideoManifest",
    "VideoMeta",
    "VideoSummary",
    "frame_index_from_time",
    "time_from_frame_index",
]
