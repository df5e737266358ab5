"""Shared fixtures: builtin-provider engines and synthetic corpora."""

from __future__ import annotations

import random

import pytest

from scenesearch import SearchEngine, Shot, TranscriptSegment, VideoManifest, VideoMeta
from scenesearch.providers import ProviderConfig

WORDS = (
    "hà nội sài gòn tin tức thời sự bản tin buổi tối hôm nay phóng viên ghi nhận "
    "trận đấu bóng đá đội tuyển quốc gia chiến thắng lễ hội truyền thống người dân "
    "tham gia giao thông thành phố mưa lớn ngập lụt miền trung cứu trợ học sinh "
    "trường học khai giảng kinh tế thị trường xuất khẩu nông sản giá vàng tăng mạnh"
).split()


def small_provider(dim: int = 64) -> ProviderConfig:
    return ProviderConfig(dim=dim)


def make_engine(dim: int = 64, **kwargs) -> SearchEngine:
    cfg = small_provider(dim)
    return SearchEngine(
        text_provider=cfg, image_provider=cfg, transform_provider=cfg, **kwargs
    )


def sentence(rng: random.Random, n_words: int = 8) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(n_words)).capitalize() + "."


def synthetic_manifest(
    video_id: str,
    rng: random.Random,
    n_shots: int = 4,
    n_segments: int = 12,
    fps: float = 25.0,
    shot_len: int = 100,
) -> VideoManifest:
    duration_s = (n_shots * shot_len + 1) / fps + 60.0
    meta = VideoMeta(
        video_id=video_id,
        fps=fps,
        duration_s=duration_s,
        source_url=f"https://videos.example/{video_id}",
        title=f"Video {video_id}",
    )
    shots = tuple(
        Shot(video_id, i * shot_len, i * shot_len + shot_len - 1) for i in range(n_shots)
    )
    segments = tuple(
        TranscriptSegment(
            video_id=video_id,
            ordinal=i,
            start_s=i * 5.0,
            end_s=i * 5.0 + 4.5,
            raw_text=sentence(rng),
        )
        for i in range(n_segments)
    )
    return VideoManifest(meta=meta, shots=shots, segments=segments)


@pytest.fixture
def engine() -> SearchEngine:
    return make_engine()


@pytest.fixture
def seeded_engine() -> SearchEngine:
    """Engine preloaded with three deterministic videos."""
    eng = make_engine()
    rng = random.Random(1234)
    for video_id in ("v01", "v02", "v03"):
        eng.ingest(synthetic_manifest(video_id, rng))
    return eng
