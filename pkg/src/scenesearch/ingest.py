"""Manifest-to-index pipeline.

A per-video manifest (metadata, precomputed shot boundaries, raw transcript
segments) is turned into keyframe records, cleaned transcript intervals, and
a video summary, each embedded and inserted into its collection. Shot
detection itself is an input, not a computation: boundaries arrive in the
manifest, end frames inclusive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .domain import (
    Embedding,
    KeyframeRecord,
    Shot,
    TranscriptInterval,
    TranscriptSegment,
    VideoMeta,
    VideoSummary,
    time_from_frame_index,
)
from .errors import InvalidArgumentError, NoSummaryError, SceneSearchError
from .providers import ImageEmbedder, TextEmbedder, TextTransformer, TransformKind

DEFAULT_POSITIONS = (0.15, 0.50, 0.85)
DEFAULT_GROUP_SIZE = 5
SUMMARY_FALLBACK_CHARS = 512


@dataclass(frozen=True)
class IngestConfig:
    keyframe_positions: tuple[float, ...] = DEFAULT_POSITIONS
    group_size_k: int = DEFAULT_GROUP_SIZE
    clean_enabled: bool = True
    summarize_enabled: bool = True

    def __post_init__(self) -> None:
        positions = tuple(self.keyframe_positions)
        if not positions or any(not 0.0 < p < 1.0 for p in positions):
            raise InvalidArgumentError("keyframe positions must each lie in (0, 1)")
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise InvalidArgumentError("keyframe positions must be strictly increasing")
        if self.group_size_k < 1:
            raise InvalidArgumentError("group_size_k must be >= 1")
        object.__setattr__(self, "keyframe_positions", positions)


@dataclass(frozen=True)
class VideoManifest:
    meta: VideoMeta
    shots: tuple[Shot, ...]
    segments: tuple[TranscriptSegment, ...]

    def __post_init__(self) -> None:
        frame_limit = self.meta.duration_s * self.meta.fps + 1
        for shot in self.shots:
            if shot.video_id != self.meta.video_id:
                raise InvalidArgumentError(
                    f"shot video_id {shot.video_id!r} does not match manifest {self.meta.video_id!r}"
                )
            if shot.end_frame >= frame_limit:
                raise InvalidArgumentError(
                    f"shot end frame {shot.end_frame} exceeds video length of {self.meta.video_id!r}"
                )
        for expected, segment in enumerate(self.segments):
            if segment.video_id != self.meta.video_id:
                raise InvalidArgumentError(
                    f"segment video_id {segment.video_id!r} does not match manifest {self.meta.video_id!r}"
                )
            if segment.ordinal != expected:
                raise InvalidArgumentError(
                    f"segment ordinals must be contiguous from 0, got {segment.ordinal} at position {expected}"
                )


@dataclass
class IngestReport:
    video_id: str
    n_shots: int = 0
    n_keyframes: int = 0
    n_intervals: int = 0
    summary_generated: bool = False
    warnings: list[str] = field(default_factory=list)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def select_keyframes(shot: Shot, positions: tuple[float, ...] = DEFAULT_POSITIONS) -> list[int]:
    """Frame indices at the normalized positions within the shot.

    A single-frame shot returns the same index once per position.
    """
    span = shot.end_frame - shot.start_frame
    return [shot.start_frame + round_half_up(p * span) for p in positions]


def group_segments(
    segments: "list[TranscriptSegment] | tuple[TranscriptSegment, ...]",
    k: int = DEFAULT_GROUP_SIZE,
) -> list[TranscriptInterval]:
    """Partition consecutive segments into intervals of ``k`` members.

    The final interval keeps the remainder. Raw texts are joined with a
    single space; the interval span covers its members.
    """
    if k < 1:
        raise InvalidArgumentError("group size must be >= 1")
    intervals = []
    for index, offset in enumerate(range(0, len(segments), k)):
        members = segments[offset : offset + k]
        video_id = members[0].video_id
        intervals.append(
            TranscriptInterval(
                interval_id=f"{video_id}/iv_{index:04d}",
                video_id=video_id,
                segment_ordinals=tuple(s.ordinal for s in members),
                start_s=min(s.start_s for s in members),
                end_s=max(s.end_s for s in members),
                raw_text=" ".join(s.raw_text for s in members),
            )
        )
    return intervals


def clean_interval(
    interval: TranscriptInterval,
    transformer: TextTransformer,
    warnings: list[str] | None = None,
) -> TranscriptInterval:
    """Run the clean transform over ``raw_text``.

    Provider failure degrades to the raw text and records a warning rather
    than aborting: uncleaned text is still searchable.
    """
    if not interval.raw_text.strip():
        return interval.with_cleaned_text("")
    try:
        cleaned = transformer.transform(TransformKind.CLEAN, interval.raw_text)
    except SceneSearchError as exc:
        if warnings is not None:
            warnings.append(f"clean failed for {interval.interval_id}: {exc}")
        cleaned = interval.raw_text
    return interval.with_cleaned_text(cleaned)


def summarize_video(
    intervals: list[TranscriptInterval],
    transformer: TextTransformer,
    warnings: list[str] | None = None,
) -> VideoSummary:
    """Summarize the concatenated cleaned transcripts of one video.

    Provider failure degrades to a truncated excerpt of the transcript;
    an all-empty transcript is an error (there is nothing to summarize).
    """
    texts = [iv.cleaned_text for iv in intervals if iv.cleaned_text.strip()]
    if not texts:
        raise NoSummaryError("no non-empty transcript text to summarize")
    video_id = intervals[0].video_id
    joined = " ".join(texts)
    try:
        summary_text = transformer.transform(TransformKind.SUMMARIZE, joined)
    except SceneSearchError as exc:
        if warnings is not None:
            warnings.append(f"summarize failed for {video_id}: {exc}")
        summary_text = joined[:SUMMARY_FALLBACK_CHARS]
    return VideoSummary(video_id=video_id, summary_text=summary_text)


def build_keyframes(
    meta: VideoMeta,
    shots: tuple[Shot, ...],
    positions: tuple[float, ...],
) -> list[KeyframeRecord]:
    """Keyframe records for every shot; ids stay unique even when positions coincide."""
    records = []
    for shot_ordinal, shot in enumerate(shots):
        for slot, (position, frame) in enumerate(
            zip(positions, select_keyframes(shot, positions))
        ):
            records.append(
                KeyframeRecord(
                    keyframe_id=f"{meta.video_id}/s{shot_ordinal:04d}p{slot}",
                    video_id=meta.video_id,
                    shot_ordinal=shot_ordinal,
                    frame_index=frame,
                    position=position,
                    timestamp_s=time_from_frame_index(frame, meta.fps),
                    image_ref=f"{meta.video_id}/kf_{frame:06d}",
                )
            )
    return records


def keyframe_metadata(record: KeyframeRecord) -> dict[str, str]:
    return {
        "video_id": record.video_id,
        "shot_ordinal": str(record.shot_ordinal),
        "frame_index": str(record.frame_index),
        "position": repr(record.position),
        "timestamp_s": repr(record.timestamp_s),
        "image_ref": record.image_ref,
    }


def interval_metadata(interval: TranscriptInterval) -> dict[str, str]:
    return {
        "video_id": interval.video_id,
        "segment_ordinals": ",".join(str(o) for o in interval.segment_ordinals),
        "start_s": repr(interval.start_s),
        "end_s": repr(interval.end_s),
        "raw_text": interval.raw_text,
        "cleaned_text": interval.cleaned_text,
    }


def prepare_video(
    manifest: VideoManifest,
    config: IngestConfig,
    text_embedder: TextEmbedder,
    image_embedder: ImageEmbedder,
    transformer: TextTransformer,
) -> tuple[
    list[tuple[str, Embedding, dict[str, str]]],  # keyframe rows
    list[tuple[str, Embedding, dict[str, str]]],  # interval rows
    "tuple[str, Embedding, dict[str, str]] | None",  # summary row
    IngestReport,
]:
    """Compute every record and embedding for one video without touching a store.

    Embedding failures propagate (a record without a vector is unreachable,
    so ingest must abort); clean/summarize failures degrade into warnings.
    Keeping this pure lets the caller insert everything atomically.
    """
    report = IngestReport(video_id=manifest.meta.video_id, n_shots=len(manifest.shots))

    keyframe_rows = []
    for record in build_keyframes(manifest.meta, manifest.shots, config.keyframe_positions):
        vector = image_embedder.embed_image(record.image_ref)
        keyframe_rows.append((record.keyframe_id, vector, keyframe_metadata(record)))
    report.n_keyframes = len(keyframe_rows)

    intervals = group_segments(list(manifest.segments), config.group_size_k)
    if config.clean_enabled:
        intervals = [clean_interval(iv, transformer, report.warnings) for iv in intervals]
    else:
        intervals = [iv.with_cleaned_text(iv.raw_text) for iv in intervals]
    report.n_intervals = len(intervals)

    interval_rows = []
    for interval in intervals:
        if not interval.cleaned_text.strip():
            report.warnings.append(
                f"interval {interval.interval_id} has no text; left unindexed"
            )
            continue
        vector = text_embedder.embed_text(interval.cleaned_text)
        interval_rows.append((interval.interval_id, vector, interval_metadata(interval)))

    summary_row = None
    if config.summarize_enabled:
        try:
            summary = summarize_video(intervals, transformer, report.warnings)
        except NoSummaryError:
            report.warnings.append(
                f"no transcript text for {manifest.meta.video_id}; summary skipped"
            )
        else:
            vector = text_embedder.embed_text(summary.summary_text)
            metadata = {"video_id": summary.video_id, "summary_text": summary.summary_text}
            summary_row = (summary.video_id, vector, metadata)
            report.summary_generated = True

    return keyframe_rows, interval_rows, summary_row, report


# -- manifest files ----------------------------------------------------------


def manifest_from_dict(doc: dict) -> VideoManifest:
    """Parse one manifest document (see the corpus file layout in the README)."""
    try:
        video = doc["video"]
        meta = VideoMeta(
            video_id=str(video["id"]),
            fps=float(video["fps"]),
            duration_s=float(video["duration_s"]),
            source_url=str(video.get("url", "")),
            title=video.get("title"),
        )
        shots = tuple(
            Shot(video_id=meta.video_id, start_frame=int(s["start"]), end_frame=int(s["end"]))
            for s in doc.get("shots", [])
        )
        segments = tuple(
            TranscriptSegment(
                video_id=meta.video_id,
                ordinal=int(s["ordinal"]),
                start_s=float(s["start_s"]),
                end_s=float(s["end_s"]),
                raw_text=str(s["text"]),
            )
            for s in doc.get("segments", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed manifest document: {exc}") from exc
    return VideoManifest(meta=meta, shots=shots, segments=segments)


def load_manifests(path: "str | Path") -> Iterator[VideoManifest]:
    """Yield manifests from a directory of ``*.json`` files or one JSON-Lines file."""
    source = Path(path)
    if source.is_dir():
        for child in sorted(source.glob("*.json")):
            yield manifest_from_dict(_load_json(child))
    elif source.is_file():
        with source.open(encoding="utf-8") as handle:
            for line_no, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise InvalidArgumentError(
                        f"{source}:{line_no} is not valid JSON: {exc}"
                    ) from exc
                yield manifest_from_dict(doc)
    else:
        raise InvalidArgumentError(f"manifest path {source} does not exist")


def _load_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path} is not valid JSON: {exc}") from exc
