"""Competition scoring and submission-archive handling.

R-Score is binary per task kind (KIS / VQA / Temporal Alignment); the final
score of a ranked list is the mean over k in {1, 5, 20, 50, 100} of the best
R-Score within each top-k prefix. Submissions are one CSV per query inside a
ZIP; frames go in only after passing metadata verification.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import re
import threading
import zipfile
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .domain import VideoMeta, frame_index_from_time, time_from_frame_index
from .errors import InvalidArgumentError, InvalidSubmissionError

DEFAULT_KS = (1, 5, 20, 50, 100)
MAX_RESULTS = 100

_WS_RUN = re.compile(r"\s+")
_archive_locks: dict[str, threading.Lock] = {}
_archive_locks_guard = threading.Lock()


class TaskKind(enum.Enum):
    KIS = "KIS"
    VQA = "VQA"
    TEMPORAL_ALIGNMENT = "TemporalAlignment"


@dataclass(frozen=True)
class EvalTask:
    """Ground truth for one query."""

    task_kind: TaskKind
    gt_video: str
    gt_frame: int | None = None
    gt_answer: str | None = None
    gt_segment: tuple[int, int] | None = None
    frame_tolerance: int = 0

    def __post_init__(self) -> None:
        if self.task_kind in (TaskKind.KIS, TaskKind.VQA) and self.gt_frame is None:
            raise InvalidArgumentError(f"{self.task_kind.value} task requires gt_frame")
        if self.task_kind is TaskKind.VQA and self.gt_answer is None:
            raise InvalidArgumentError("VQA task requires gt_answer")
        if self.task_kind is TaskKind.TEMPORAL_ALIGNMENT:
            if self.gt_segment is None:
                raise InvalidArgumentError("TemporalAlignment task requires gt_segment")
            if self.gt_segment[0] > self.gt_segment[1]:
                raise InvalidArgumentError("gt_segment must be ordered")
        if self.frame_tolerance < 0:
            raise InvalidArgumentError("frame_tolerance must be >= 0")


@dataclass(frozen=True)
class ResultItem:
    rank: int
    video_id: str
    frame_index: int
    answer: str | None = None
    segment: tuple[int, int] | None = None


@dataclass(frozen=True)
class EvalConfig:
    ks: tuple[int, ...] = DEFAULT_KS

    def __post_init__(self) -> None:
        ks = tuple(self.ks)
        if not ks or any(k <= 0 for k in ks) or any(b <= a for a, b in zip(ks, ks[1:])):
            raise InvalidArgumentError("ks must be strictly increasing positive integers")
        object.__setattr__(self, "ks", ks)


@dataclass(frozen=True)
class VerificationRecord:
    video_id: str
    frame_index: int
    ok: bool
    timestamp_s: float
    max_frame: int
    reason: str | None = None


def normalize_answer(text: str) -> str:
    """Casefold, trim, and collapse whitespace runs."""
    return _WS_RUN.sub(" ", text.casefold().strip())


def _segments_overlap(a: tuple[int, int], b: tuple[int, int]) -> bool:
    # closed intervals: touching endpoints count as overlap
    return max(a[0], b[0]) <= min(a[1], b[1])


def r_score(item: ResultItem, task: EvalTask) -> float:
    """Binary correctness of one ranked result under the task's rule."""
    if item.video_id != task.gt_video:
        return 0.0
    if task.task_kind is TaskKind.TEMPORAL_ALIGNMENT:
        if item.segment is None:
            raise InvalidSubmissionError(
                f"TemporalAlignment result at rank {item.rank} is missing a segment"
            )
        assert task.gt_segment is not None
        return 1.0 if _segments_overlap(item.segment, task.gt_segment) else 0.0
    assert task.gt_frame is not None
    if abs(item.frame_index - task.gt_frame) > task.frame_tolerance:
        return 0.0
    if task.task_kind is TaskKind.VQA:
        if item.answer is None:
            raise InvalidSubmissionError(f"VQA result at rank {item.rank} is missing an answer")
        assert task.gt_answer is not None
        return 1.0 if normalize_answer(item.answer) == normalize_answer(task.gt_answer) else 0.0
    return 1.0


def final_score(
    items: Sequence[ResultItem],
    task: EvalTask,
    config: EvalConfig = EvalConfig(),
) -> float:
    """Mean over the configured ks of the best R-Score within each top-k prefix."""
    ranks = [item.rank for item in items]
    if len(set(ranks)) != len(ranks):
        raise InvalidSubmissionError("duplicate ranks in result list")
    if ranks != list(range(1, len(items) + 1)):
        raise InvalidSubmissionError("ranks must be contiguous from 1")
    if len(items) > MAX_RESULTS:
        raise InvalidSubmissionError(f"result lists are capped at {MAX_RESULTS} items")
    scores = [r_score(item, task) for item in items]
    total = 0.0
    for k in config.ks:
        prefix = scores[: min(k, len(scores))]
        total += max(prefix, default=0.0)
    return total / len(config.ks)


def verify_frame(video: VideoMeta, frame_index: int) -> VerificationRecord:
    """Metadata-level check that a frame index exists and round-trips through time.

    Failure is a negative record, not an error.
    """
    if frame_index < 0:
        raise InvalidArgumentError("frame_index must be >= 0")
    max_frame = frame_index_from_time(video.duration_s, video.fps)
    timestamp_s = time_from_frame_index(frame_index, video.fps)
    if frame_index > max_frame:
        return VerificationRecord(
            video_id=video.video_id,
            frame_index=frame_index,
            ok=False,
            timestamp_s=timestamp_s,
            max_frame=max_frame,
            reason=f"frame {frame_index} exceeds last frame {max_frame}",
        )
    round_trip = frame_index_from_time(timestamp_s, video.fps)
    if round_trip != frame_index:
        return VerificationRecord(
            video_id=video.video_id,
            frame_index=frame_index,
            ok=False,
            timestamp_s=timestamp_s,
            max_frame=max_frame,
            reason=f"round trip produced frame {round_trip}",
        )
    return VerificationRecord(
        video_id=video.video_id,
        frame_index=frame_index,
        ok=True,
        timestamp_s=timestamp_s,
        max_frame=max_frame,
    )


def _archive_lock(path: Path) -> threading.Lock:
    key = str(path.resolve())
    with _archive_locks_guard:
        return _archive_locks.setdefault(key, threading.Lock())


def build_submission(
    confirmed: Sequence[ResultItem],
    query_id: str,
    archive_path: "str | Path",
    videos: Mapping[str, VideoMeta],
) -> Path:
    """Write (or update) the submission ZIP with one CSV for ``query_id``.

    Every item is re-verified against the video catalog; any unverified frame
    refuses the whole build. Re-invocation replaces only this query's CSV.
    Entries are stored uncompressed so golden tests can inspect bytes.
    """
    if not query_id or "/" in query_id:
        raise InvalidArgumentError(f"invalid query_id {query_id!r}")
    for item in confirmed:
        video = videos.get(item.video_id)
        if video is None:
            raise InvalidSubmissionError(
                f"rank {item.rank}: unknown video {item.video_id!r}, cannot verify"
            )
        record = verify_frame(video, item.frame_index)
        if not record.ok:
            raise InvalidSubmissionError(f"rank {item.rank}: {record.reason}")

    ordered = sorted(confirmed, key=lambda item: item.rank)
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    for item in ordered:
        row = [item.video_id, str(item.frame_index)]
        if item.answer is not None:
            row.append(item.answer)
        writer.writerow(row)
    csv_bytes = buffer.getvalue().encode("utf-8")

    path = Path(archive_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entry_name = f"{query_id}.csv"
    with _archive_lock(path):
        existing: dict[str, bytes] = {}
        if path.exists():
            with zipfile.ZipFile(path) as archive:
                for info in archive.infolist():
                    if info.filename != entry_name:
                        existing[info.filename] = archive.read(info)
        existing[entry_name] = csv_bytes
        tmp = path.with_name(path.name + ".tmp")
        with zipfile.ZipFile(tmp, "w", compression=zipfile.ZIP_STORED) as archive:
            for filename in sorted(existing):
                archive.writestr(
                    zipfile.ZipInfo(filename, date_time=(1980, 1, 1, 0, 0, 0)),
                    existing[filename],
                )
        tmp.replace(path)
    return path


def read_submission(archive_path: "str | Path") -> dict[str, list[ResultItem]]:
    """Parse a submission ZIP back into per-query ranked result lists."""
    results: dict[str, list[ResultItem]] = {}
    with zipfile.ZipFile(archive_path) as archive:
        for info in archive.infolist():
            if not info.filename.endswith(".csv"):
                continue
            query_id = info.filename[: -len(".csv")]
            text = archive.read(info).decode("utf-8")
            items = []
            for rank, row in enumerate(csv.reader(io.StringIO(text)), start=1):
                if not row:
                    continue
                if len(row) < 2:
                    raise InvalidSubmissionError(
                        f"{info.filename} row {rank}: expected video_id,frame_index[,answer]"
                    )
                try:
                    frame = int(row[1])
                except ValueError as exc:
                    raise InvalidSubmissionError(
                        f"{info.filename} row {rank}: bad frame index {row[1]!r}"
                    ) from exc
                items.append(
                    ResultItem(
                        rank=rank,
                        video_id=row[0],
                        frame_index=frame,
                        answer=row[2] if len(row) > 2 else None,
                    )
                )
            results[query_id] = items
    return results


def task_from_dict(doc: dict) -> tuple[str, EvalTask]:
    """Parse one ground-truth record: {query_id, kind, video, frame?, answer?, segment?}."""
    try:
        query_id = str(doc["query_id"])
        kind = TaskKind(doc["kind"])
        segment = doc.get("segment")
        task = EvalTask(
            task_kind=kind,
            gt_video=str(doc["video"]),
            gt_frame=int(doc["frame"]) if doc.get("frame") is not None else None,
            gt_answer=doc.get("answer"),
            gt_segment=(int(segment[0]), int(segment[1])) if segment is not None else None,
            frame_tolerance=int(doc.get("frame_tolerance", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed ground-truth record: {exc}") from exc
    return query_id, task


def load_ground_truth(path: "str | Path") -> dict[str, EvalTask]:
    """Load a JSON-Lines ground-truth file keyed by query_id."""
    tasks: dict[str, EvalTask] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InvalidArgumentError(f"{path}:{line_no} is not valid JSON") from exc
            query_id, task = task_from_dict(doc)
            if query_id in tasks:
                raise InvalidArgumentError(f"duplicate query_id {query_id!r} in {path}")
            tasks[query_id] = task
    return tasks


def score_submission(
    submission: Mapping[str, Sequence[ResultItem]],
    ground_truth: Mapping[str, EvalTask],
    config: EvalConfig = EvalConfig(),
) -> dict[str, float]:
    """final_score per query_id present in both the submission and the truth."""
    return {
        query_id: final_score(list(submission[query_id]), ground_truth[query_id], config)
        for query_id in sorted(submission)
        if query_id in ground_truth
    }
