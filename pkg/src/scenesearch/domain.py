"""Core data model and time/frame arithmetic shared by every other module.

All types here are immutable after construction and safe to share across
concurrent readers. No pixel data is ever held: keyframes are metadata plus
an embedding reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# Slack (in frames) absorbed when flooring playback time to a frame index.
# A product of time_from_frame_index() can land one float ulp below the true
# integer; without this the floor round trip would be off by one.
_FRAME_SNAP = 1e-6

EMBEDDING_NORM_TOL = 1e-6


def frame_index_from_time(t_s: float, fps: float) -> int:
    """Map a playback time in seconds to the frame index rendered at that time.

    Uses the floor convention: the returned frame has already been displayed
    at time ``t_s``. Exact inverse of :func:`time_from_frame_index`.
    """
    if fps <= 0:
        raise InvalidArgumentError(f"fps must be positive, got {fps}")
    if t_s < 0:
        raise InvalidArgumentError(f"time must be non-negative, got {t_s}")
    return int(math.floor(t_s * fps + _FRAME_SNAP))


def time_from_frame_index(frame: int, fps: float) -> float:
    """Playback time in seconds at which ``frame`` starts."""
    if fps <= 0:
        raise InvalidArgumentError(f"fps must be positive, got {fps}")
    if frame < 0:
        raise InvalidArgumentError(f"frame index must be non-negative, got {frame}")
    return frame / fps


@dataclass(frozen=True)
class VideoMeta:
    """Identity and playback parameters of one source video."""

    video_id: str
    fps: float
    duration_s: float
    source_url: str = ""
    title: str | None = None

    def __post_init__(self) -> None:
        if not self.video_id:
            raise InvalidArgumentError("video_id must be non-empty")
        if self.fps <= 0:
            raise InvalidArgumentError(f"fps must be positive, got {self.fps}")
        if self.duration_s < 0:
            raise InvalidArgumentError(f"duration_s must be non-negative, got {self.duration_s}")


@dataclass(frozen=True)
class Shot:
    """A contiguous run of frames between two camera cuts, bounds inclusive."""

    video_id: str
    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if self.start_frame < 0 or self.start_frame > self.end_frame:
            raise InvalidArgumentError(
                f"shot bounds must satisfy 0 <= start <= end, got [{self.start_frame}, {self.end_frame}]"
            )


@dataclass(frozen=True)
class KeyframeRecord:
    """One sampled frame of one shot.

    ``image_ref`` is the opaque reference handed to the image embedding
    provider; records of the same physical frame share it.
    """

    keyframe_id: str
    video_id: str
    shot_ordinal: int
    frame_index: int
    position: float
    timestamp_s: float
    image_ref: str


@dataclass(frozen=True)
class TranscriptSegment:
    """One raw ASR segment as delivered in the ingest manifest."""

    video_id: str
    ordinal: int
    start_s: float
    end_s: float
    raw_text: str

    def __post_init__(self) -> None:
        if self.start_s > self.end_s:
            raise InvalidArgumentError(
                f"segment span must satisfy start <= end, got [{self.start_s}, {self.end_s}]"
            )


@dataclass(frozen=True)
class TranscriptInterval:
    """A run of consecutive ASR segments merged into one searchable unit."""

    interval_id: str
    video_id: str
    segment_ordinals: tuple[int, ...]
    start_s: float
    end_s: float
    raw_text: str
    cleaned_text: str = ""

    def with_cleaned_text(self, cleaned: str) -> "TranscriptInterval":
        """Copy of this interval with ``cleaned_text`` replaced; identity preserved."""
        return TranscriptInterval(
            interval_id=self.interval_id,
            video_id=self.video_id,
            segment_ordinals=self.segment_ordinals,
            start_s=self.start_s,
            end_s=self.end_s,
            raw_text=self.raw_text,
            cleaned_text=cleaned,
        )


@dataclass(frozen=True)
class VideoSummary:
    """Event-level summary text for one video; at most one per video."""

    video_id: str
    summary_text: str

    def __post_init__(self) -> None:
        if not self.summary_text:
            raise InvalidArgumentError("summary_text must be non-empty")


@dataclass(frozen=True, eq=False)
class Embedding:
    """Fixed-dimension unit-norm vector.

    ``values`` is a read-only float32 ndarray (float32 matches the persisted
    wire format, so save/load round trips are bit-exact). Construction
    verifies the unit-norm invariant; use :meth:`normalized` to build one
    from arbitrary values.
    """

    values: np.ndarray = field(repr=False)
    dim: int

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 1 or arr.shape[0] != self.dim:
            raise InvalidArgumentError(
                f"embedding has {arr.shape} values, expected ({self.dim},)"
            )
        norm = float(np.linalg.norm(arr.astype(np.float64)))
        if abs(norm - 1.0) > EMBEDDING_NORM_TOL:
            raise InvalidArgumentError(f"embedding norm {norm!r} is not 1 within {EMBEDDING_NORM_TOL}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def normalized(cls, values: "np.ndarray | list[float]") -> "Embedding":
        """L2-normalize ``values`` and wrap them; rejects the zero vector."""
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1:
            raise InvalidArgumentError("embedding values must be one-dimensional")
        norm = float(np.linalg.norm(arr))
        if norm == 0.0 or not math.isfinite(norm):
            raise InvalidArgumentError("cannot normalize a zero or non-finite vector")
        return cls(values=(arr / norm).astype(np.float32), dim=arr.shape[0])
