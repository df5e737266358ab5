"""The four search modes: frame, transcript, summary, and temporal.

Everything here is a pure read over a store snapshot. Frame hits are grouped
by source video and ranked by best hit; temporal search runs two independent
frame queries, prunes non-sequential or too-far-apart pairs, and ranks videos
with a weighted combination of the best pair score and the per-event top-m
averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidArgumentError, NoPairError
from .providers import TextEmbedder
from .vectorstore import SearchHit, VectorStore

DEFAULT_FRAME_K = 1000
DEFAULT_TRANSCRIPT_K = 200
DEFAULT_SUMMARY_K = 50
DEFAULT_MAX_GAP_S = 300.0
DEFAULT_TOP_M = 10
DEFAULT_W_PAIR = 10.0
DEFAULT_W_AVG = 5.0


@dataclass(frozen=True)
class QueryConfig:
    frame_k: int = DEFAULT_FRAME_K
    transcript_k: int = DEFAULT_TRANSCRIPT_K
    summary_k: int = DEFAULT_SUMMARY_K
    temporal_max_gap_s: float = DEFAULT_MAX_GAP_S
    temporal_top_m: int = DEFAULT_TOP_M
    w_pair: float = DEFAULT_W_PAIR
    w_avg: float = DEFAULT_W_AVG

    def __post_init__(self) -> None:
        for name in ("frame_k", "transcript_k", "summary_k", "temporal_max_gap_s",
                     "temporal_top_m", "w_pair", "w_avg"):
            if getattr(self, name) <= 0:
                raise InvalidArgumentError(f"{name} must be positive")


@dataclass(frozen=True)
class VideoGroup:
    """Hits of one video, descending score; group_score is the best hit."""

    video_id: str
    hits: tuple[SearchHit, ...]
    group_score: float


@dataclass(frozen=True)
class KeyframeInfo:
    keyframe_id: str
    video_id: str
    frame_index: int
    timestamp_s: float


@dataclass(frozen=True)
class TranscriptMatch:
    """One transcript-interval hit joined with the keyframes inside its span."""

    hit: SearchHit
    keyframes: tuple[KeyframeInfo, ...]


@dataclass(frozen=True)
class SummaryMatch:
    video_id: str
    summary_text: str
    score: float


@dataclass(frozen=True)
class TemporalPair:
    t1_s: float
    t2_s: float
    kf1: str
    kf2: str
    s1: float
    s2: float
    pair_score: float


@dataclass(frozen=True)
class TemporalVideoScore:
    video_id: str
    best_pair: TemporalPair
    s_pair: float
    avg_top1: float
    avg_top2: float
    s_video: float


def _require_query(text: str) -> None:
    if not text or not text.strip():
        raise InvalidArgumentError("query text must be non-empty")


def group_hits_by_video(hits: Sequence[SearchHit]) -> list[VideoGroup]:
    """Fold a ranked hit list into per-video groups.

    Groups rank by best hit score, ties by more hits, then ascending
    video_id. Hits inside a group keep their global order, so the multiset
    of hits across groups equals the input list.
    """
    by_video: dict[str, list[SearchHit]] = {}
    for hit in hits:
        by_video.setdefault(hit.metadata["video_id"], []).append(hit)
    groups = [
        VideoGroup(video_id=video_id, hits=tuple(members), group_score=members[0].score)
        for video_id, members in by_video.items()
    ]
    groups.sort(key=lambda g: (-g.group_score, -len(g.hits), g.video_id))
    return groups


def frame_search(
    store: VectorStore,
    text_embedder: TextEmbedder,
    query_text: str,
    config: QueryConfig = QueryConfig(),
) -> list[VideoGroup]:
    """Top-k keyframe hits for a text query, grouped and ranked by video."""
    _require_query(query_text)
    query = text_embedder.embed_text(query_text)
    hits = store.search("keyframes", query, k=config.frame_k)
    return group_hits_by_video(hits)


def keyframe_info(keyframe_id: str, metadata: dict[str, str]) -> KeyframeInfo:
    return KeyframeInfo(
        keyframe_id=keyframe_id,
        video_id=metadata["video_id"],
        frame_index=int(metadata["frame_index"]),
        timestamp_s=float(metadata["timestamp_s"]),
    )


def transcript_search(
    store: VectorStore,
    text_embedder: TextEmbedder,
    query_text: str,
    keyword_filter: str | None = None,
    config: QueryConfig = QueryConfig(),
) -> list[TranscriptMatch]:
    """Top-k transcript intervals, each joined with the keyframes in its span.

    When a keyword is given, only hits whose cleaned text contains it
    (case-insensitive, Unicode casefold) survive.
    """
    _require_query(query_text)
    query = text_embedder.embed_text(query_text)
    hits = store.search("transcripts", query, k=config.transcript_k)
    if keyword_filter:
        needle = keyword_filter.casefold()
        hits = [h for h in hits if needle in h.metadata.get("cleaned_text", "").casefold()]
    matches = []
    for hit in hits:
        video_id = hit.metadata["video_id"]
        start_s = float(hit.metadata["start_s"])
        end_s = float(hit.metadata["end_s"])
        inside = [
            keyframe_info(kf_id, meta)
            for kf_id, meta in store.records("keyframes", filter={"video_id": video_id})
            if start_s <= float(meta["timestamp_s"]) <= end_s
        ]
        inside.sort(key=lambda kf: (kf.timestamp_s, kf.keyframe_id))
        matches.append(TranscriptMatch(hit=hit, keyframes=tuple(inside)))
    return matches


def summary_search(
    store: VectorStore,
    text_embedder: TextEmbedder,
    query_text: str,
    config: QueryConfig = QueryConfig(),
) -> list[SummaryMatch]:
    """Top-k video summaries by similarity, descending score."""
    _require_query(query_text)
    query = text_embedder.embed_text(query_text)
    hits = store.search("summaries", query, k=config.summary_k)
    return [
        SummaryMatch(
            video_id=hit.metadata["video_id"],
            summary_text=hit.metadata.get("summary_text", ""),
            score=hit.score,
        )
        for hit in hits
    ]


def filter_groups_by_videos(
    groups: Sequence[VideoGroup], allowed: "set[str] | frozenset[str]"
) -> list[VideoGroup]:
    """Stable filter: keep groups whose video is allowed, in original order."""
    return [g for g in groups if g.video_id in allowed]


def _hit_timestamp(hit: SearchHit) -> float:
    return float(hit.metadata["timestamp_s"])


def valid_pairs(
    hits1: Sequence[SearchHit],
    hits2: Sequence[SearchHit],
    max_gap_s: float,
) -> list[TemporalPair]:
    """All (E1, E2) pairs with t1 < t2 and t2 - t1 <= max_gap_s."""
    pairs = []
    for h1 in hits1:
        t1 = _hit_timestamp(h1)
        for h2 in hits2:
            t2 = _hit_timestamp(h2)
            if t2 <= t1 or t2 - t1 > max_gap_s:
                continue
            pairs.append(
                TemporalPair(
                    t1_s=t1,
                    t2_s=t2,
                    kf1=h1.id,
                    kf2=h2.id,
                    s1=h1.score,
                    s2=h2.score,
                    pair_score=(h1.score + h2.score) / 2.0,
                )
            )
    return pairs


def _avg_top(hits: Sequence[SearchHit], m: int) -> float:
    top = sorted((h.score for h in hits), reverse=True)[:m]
    return sum(top) / len(top)


def score_temporal_video(
    video_id: str,
    hits1: Sequence[SearchHit],
    hits2: Sequence[SearchHit],
    config: QueryConfig = QueryConfig(),
) -> TemporalVideoScore:
    """Score one video from its per-event keyframe hits.

    s_pair is the best mean score over valid sequential pairs; the per-event
    averages use the top temporal_top_m scores (all available when fewer).
    """
    pairs = valid_pairs(hits1, hits2, config.temporal_max_gap_s)
    if not pairs:
        raise NoPairError(f"no valid sequential pair for video {video_id!r}")
    best = min(pairs, key=lambda p: (-p.pair_score, p.t1_s, p.t2_s, p.kf1, p.kf2))
    avg_top1 = _avg_top(hits1, config.temporal_top_m)
    avg_top2 = _avg_top(hits2, config.temporal_top_m)
    s_video = config.w_pair * best.pair_score + config.w_avg * (avg_top1 + avg_top2)
    return TemporalVideoScore(
        video_id=video_id,
        best_pair=best,
        s_pair=best.pair_score,
        avg_top1=avg_top1,
        avg_top2=avg_top2,
        s_video=s_video,
    )


def temporal_search(
    store: VectorStore,
    text_embedder: TextEmbedder,
    e1_text: str,
    e2_text: str,
    config: QueryConfig = QueryConfig(),
) -> list[TemporalVideoScore]:
    """Two-event search: independent frame queries, pruning, then ranking.

    Only videos appearing in both result sets with at least one surviving
    pair are returned, best combined score first, ties by ascending id.
    """
    _require_query(e1_text)
    _require_query(e2_text)
    hits1 = store.search("keyframes", text_embedder.embed_text(e1_text), k=config.frame_k)
    hits2 = store.search("keyframes", text_embedder.embed_text(e2_text), k=config.frame_k)

    by_video1: dict[str, list[SearchHit]] = {}
    for hit in hits1:
        by_video1.setdefault(hit.metadata["video_id"], []).append(hit)
    by_video2: dict[str, list[SearchHit]] = {}
    for hit in hits2:
        by_video2.setdefault(hit.metadata["video_id"], []).append(hit)

    scores = []
    for video_id in by_video1.keys() & by_video2.keys():
        try:
            scores.append(
                score_temporal_video(video_id, by_video1[video_id], by_video2[video_id], config)
            )
        except NoPairError:
            continue
    scores.sort(key=lambda s: (-s.s_video, s.video_id))
    return scores
