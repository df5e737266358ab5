"""Acceptance gate: one test per contract criterion, one pass line each.

Run with `pytest -s tests/test_acceptance.py` to see the pass/fail lines;
a failing criterion shows up as a normal pytest failure.
"""

import itertools
import random
import time
from concurrent.futures import ThreadPoolExecutor

import jsonschema
import numpy as np
import pytest
from fastapi.testclient import TestClient

from scenesearch.domain import Embedding, Shot, TranscriptSegment
from scenesearch.engine import SearchEngine
from scenesearch.errors import NoPairError
from scenesearch.evalharness import EvalTask, ResultItem, TaskKind, final_score
from scenesearch.ingest import group_segments, select_keyframes
from scenesearch.providers import ProviderConfig
from scenesearch.queryengine import QueryConfig, score_temporal_video, temporal_search
from scenesearch.service import ServiceConfig, create_app
from scenesearch.vectorstore import SearchHit, VectorStore

from conftest import synthetic_manifest

DIM = 256
SCORE_TOL = 1e-6
EQ_TOL = 1e-9


def _pass(line: str) -> None:
    print(f"\n[PASS] {line}")


def _hit(hit_id: str, score: float, video_id: str, t: float) -> SearchHit:
    return SearchHit(
        id=hit_id, score=score,
        metadata={"video_id": video_id, "timestamp_s": repr(t), "frame_index": "0"},
    )


# -- criterion 1: vector search exactness -------------------------------------


def test_vector_search_exactness_vs_brute_force():
    started = time.perf_counter()
    for seed in range(5):
        rng = np.random.default_rng(1000 + seed)
        raw = rng.normal(size=(10_000, DIM))
        ids = [f"c{seed}r{i:05d}" for i in range(10_000)]

        store = VectorStore.with_collections(
            {"keyframes": DIM, "transcripts": DIM, "summaries": DIM}
        )
        for i, record_id in enumerate(ids):
            store.insert(
                "keyframes", record_id, Embedding.normalized(raw[i]),
                {"video_id": f"v{i % 50:02d}"},
            )

        # oracle owns its own normalized copies, derived straight from raw data
        oracle_vectors = (raw / np.linalg.norm(raw, axis=1, keepdims=True)).astype(np.float32)

        queries = [Embedding.normalized(rng.normal(size=DIM)) for _ in range(3)]
        queries += [Embedding.normalized(raw[int(rng.integers(10_000))]) for _ in range(2)]

        for query in queries:
            scores = oracle_vectors.astype(np.float64) @ query.values.astype(np.float64)
            full_order = sorted(range(10_000), key=lambda i: (-scores[i], ids[i]))
            for k in (1, 10, 100):
                hits = store.search("keyframes", query, k=k)
                expected = full_order[:k]
                assert [h.id for h in hits] == [ids[i] for i in expected]
                for hit, i in zip(hits, expected):
                    assert abs(hit.score - scores[i]) <= SCORE_TOL

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"exactness suite took {elapsed:.1f}s, budget is 60s"
    _pass(
        "vector search exactness: 5 corpora x 10,000 vectors, k in {1,10,100} "
        f"match brute force (|dscore| <= 1e-6) in {elapsed:.1f}s"
    )


# -- criterion 2: weighted temporal score conformance --------------------------


def test_temporal_score_identity_over_randomized_configs():
    rng = random.Random(2024)
    checked = 0
    for _ in range(1000):
        n1 = rng.randint(1, 20)
        n2 = rng.randint(1, 20)
        hits1 = [
            _hit(f"a{i}", rng.uniform(-1, 1), "v", rng.uniform(0, 600)) for i in range(n1)
        ]
        hits2 = [
            _hit(f"b{i}", rng.uniform(-1, 1), "v", rng.uniform(0, 600)) for i in range(n2)
        ]
        # guarantee at least one valid pair
        hits1[0] = _hit("a0", rng.uniform(-1, 1), "v", 0.0)
        hits2[0] = _hit("b0", rng.uniform(-1, 1), "v", rng.uniform(1.0, 299.0))
        result = score_temporal_video("v", hits1, hits2)
        residual = result.s_video - (
            10.0 * result.s_pair + 5.0 * (result.avg_top1 + result.avg_top2)
        )
        assert abs(residual) <= EQ_TOL
        checked += 1
    assert checked == 1000
    _pass("temporal score identity: s_video = 10*s_pair + 5*(avg1+avg2) within 1e-9, 1000 configs")


def test_temporal_search_matches_pair_enumeration_oracle():
    rng = np.random.default_rng(777)
    store = VectorStore.with_collections(
        {"keyframes": DIM, "transcripts": DIM, "summaries": DIM}
    )
    for v in range(20):
        for i in range(20):
            store.insert(
                "keyframes", f"v{v:02d}/k{i:02d}",
                Embedding.normalized(rng.normal(size=DIM)),
                {"video_id": f"v{v:02d}", "timestamp_s": repr(float(rng.uniform(0, 900))),
                 "frame_index": "0"},
            )

    class FixedQueryEmbedder:
        dim = DIM

        def __init__(self):
            self._cache = {}

        def embed_text(self, text):
            if text not in self._cache:
                digest_rng = np.random.default_rng(abs(hash(text)) % (2**32))
                self._cache[text] = Embedding.normalized(digest_rng.normal(size=DIM))
            return self._cache[text]

    embedder = FixedQueryEmbedder()
    config = QueryConfig(frame_k=400, temporal_max_gap_s=300.0, temporal_top_m=10)
    results = temporal_search(store, embedder, "event one", "event two", config)

    hits1 = store.search("keyframes", embedder.embed_text("event one"), k=400)
    hits2 = store.search("keyframes", embedder.embed_text("event two"), k=400)
    per_video: dict[str, tuple[list, list]] = {}
    for h in hits1:
        per_video.setdefault(h.metadata["video_id"], ([], []))[0].append(h)
    for h in hits2:
        per_video.setdefault(h.metadata["video_id"], ([], []))[1].append(h)
    expected = []
    for vid, (h1, h2) in per_video.items():
        best = None
        for a, b in itertools.product(h1, h2):
            t1, t2 = float(a.metadata["timestamp_s"]), float(b.metadata["timestamp_s"])
            if t2 <= t1 or t2 - t1 > 300.0:
                continue
            if best is None or (a.score + b.score) / 2.0 > best:
                best = (a.score + b.score) / 2.0
        if best is None:
            continue
        top1 = sorted((h.score for h in h1), reverse=True)[:10]
        top2 = sorted((h.score for h in h2), reverse=True)[:10]
        expected.append(
            (vid, 10.0 * best + 5.0 * (sum(top1) / len(top1) + sum(top2) / len(top2)))
        )
    expected.sort(key=lambda kv: (-kv[1], kv[0]))

    assert [r.video_id for r in results] == [vid for vid, _ in expected]
    for result, (_, s_video) in zip(results, expected):
        assert result.s_video == pytest.approx(s_video, abs=EQ_TOL)
    _pass("temporal search equals brute-force pair enumeration on a 20-video corpus")


# -- criterion 3: temporal pruning ---------------------------------------------


def test_temporal_pruning_bounds_hold_everywhere():
    rng = random.Random(31)
    for _ in range(200):
        hits1 = [_hit(f"a{i}", rng.uniform(0, 1), "v", rng.uniform(0, 900)) for i in range(12)]
        hits2 = [_hit(f"b{i}", rng.uniform(0, 1), "v", rng.uniform(0, 900)) for i in range(12)]
        try:
            result = score_temporal_video("v", hits1, hits2)
        except NoPairError:
            continue
        assert result.best_pair.t1_s < result.best_pair.t2_s
        assert result.best_pair.t2_s - result.best_pair.t1_s <= 300.0

    # boundary triple at the five-minute threshold
    for gap, expected_present in ((299.999, True), (300.0, True), (300.001, False)):
        hits1 = [_hit("a", 0.9, "v", 0.0)]
        hits2 = [_hit("b", 0.9, "v", gap)]
        try:
            result = score_temporal_video("v", hits1, hits2)
            present = True
        except NoPairError:
            present = False
        assert present is expected_present, f"gap {gap}"
        if present:
            assert result.best_pair.t2_s - result.best_pair.t1_s <= 300.0
    _pass("temporal pruning: t1 < t2 and gap <= 300 s everywhere, incl. 299.999/300.0/300.001")


# -- criterion 4: evaluation metric --------------------------------------------


def test_final_score_reproduces_hand_computed_ladder():
    task = EvalTask(task_kind=TaskKind.KIS, gt_video="target", gt_frame=100)

    def ranked(correct_rank: int | None, n: int) -> list[ResultItem]:
        return [
            ResultItem(rank=r, video_id="target" if r == correct_rank else "other",
                       frame_index=100)
            for r in range(1, n + 1)
        ]

    cases = [(1, 1.0), (3, 0.8), (6, 0.6), (21, 0.4), (51, 0.2)]
    for rank, expected in cases:
        assert final_score(ranked(rank, 100), task) == expected
    assert final_score(ranked(None, 100), task) == 0.0  # correct item beyond rank 100
    assert final_score([], task) == 0.0                  # absent entirely
    _pass("final score ladder exact: ranks 1/3/6/21/51 -> 1.0/0.8/0.6/0.4/0.2, else 0.0")


# -- criterion 5: ingest arithmetic --------------------------------------------


def test_ingest_arithmetic_examples_and_properties():
    positions = (0.15, 0.50, 0.85)
    assert select_keyframes(Shot("v", 0, 99), positions) == [15, 50, 84]
    assert select_keyframes(Shot("v", 7, 7), positions) == [7, 7, 7]
    assert select_keyframes(Shot("v", 100, 101), positions) == [100, 101, 101]

    rng = random.Random(52)
    for _ in range(10_000):
        start = rng.randrange(0, 10**6)
        shot = Shot("v", start, start + rng.randrange(0, 5000))
        frames = select_keyframes(shot, positions)
        assert len(frames) == 3
        assert frames == sorted(frames)
        assert all(shot.start_frame <= f <= shot.end_frame for f in frames)

    def segments(n):
        return [TranscriptSegment("v", i, i * 2.0, i * 2.0 + 1.5, f"s{i}") for i in range(n)]

    assert [len(iv.segment_ordinals) for iv in group_segments(segments(12), 5)] == [5, 5, 2]
    assert len(group_segments(segments(5), 5)) == 1
    assert group_segments([], 5) == []

    for _ in range(10_000):
        n = rng.randrange(0, 40)
        k = rng.randrange(1, 9)
        source = segments(n)
        intervals = group_segments(source, k)
        flattened = [o for iv in intervals for o in iv.segment_ordinals]
        assert flattened == list(range(n))
        assert all(len(iv.segment_ordinals) <= k for iv in intervals)
        if intervals:
            assert all(len(iv.segment_ordinals) == k for iv in intervals[:-1])
    _pass("ingest arithmetic: keyframe/grouping examples exact, 10,000-case properties hold")


# -- criterion 6: end-to-end planted retrieval ----------------------------------


@pytest.fixture(scope="module")
def planted_engine() -> SearchEngine:
    provider = ProviderConfig(dim=DIM)
    engine = SearchEngine(
        text_provider=provider, image_provider=provider, transform_provider=provider
    )
    rng = random.Random(4242)
    for v in range(50):
        engine.ingest(synthetic_manifest(f"v{v:02d}", rng))
    return engine


def test_planted_transcript_retrieval(planted_engine):
    rng = random.Random(99)
    records = planted_engine.store.records("transcripts")
    picks = rng.sample(records, 20)
    top_hits = 0
    for record_id, metadata in picks:
        matches = planted_engine.transcript_search(metadata["cleaned_text"])
        if matches and matches[0].hit.metadata["video_id"] == metadata["video_id"]:
            top_hits += 1
    assert top_hits >= 19, f"transcript rank-1 only {top_hits}/20"
    _pass(f"planted transcript retrieval: source video rank 1 in {top_hits}/20 queries")


def test_planted_frame_retrieval(planted_engine):
    rng = random.Random(100)
    records = planted_engine.store.records("keyframes")
    picks = rng.sample(records, 20)
    for record_id, metadata in picks:
        groups = planted_engine.frame_search(metadata["image_ref"])
        assert groups[0].video_id == metadata["video_id"]
        top = groups[0].hits[0]
        assert top.metadata["image_ref"] == metadata["image_ref"]
        assert top.score == pytest.approx(1.0, abs=SCORE_TOL)
    _pass("planted frame retrieval: planted keyframe rank 1 in 20/20 queries")


# -- criterion 7: persistence round trip ----------------------------------------


def test_persistence_round_trip_preserves_results(planted_engine, tmp_path):
    provider = ProviderConfig(dim=DIM)
    planted_engine.save(tmp_path)
    reloaded = SearchEngine.load(
        tmp_path, text_provider=provider, image_provider=provider, transform_provider=provider
    )

    app_before = create_app(planted_engine, ServiceConfig(store_path=str(tmp_path)))
    app_after = create_app(reloaded, ServiceConfig(store_path=str(tmp_path)))
    with TestClient(app_before) as before, TestClient(app_after) as after:
        assert before.get("/health").json() == after.get("/health").json()

    fixed_queries = [
        "bản tin thời sự tối nay",
        "đội tuyển quốc gia chiến thắng",
        "mưa lớn ngập lụt miền trung",
        "học sinh khai giảng",
        "giá vàng tăng mạnh",
    ]
    for query in fixed_queries:
        original = planted_engine.frame_search(query)
        restored = reloaded.frame_search(query)
        flat_original = [(h.id, h.score) for g in original for h in g.hits][:10]
        flat_restored = [(h.id, h.score) for g in restored for h in g.hits][:10]
        assert flat_original == flat_restored  # bit-exact, == on floats
    _pass("persistence: health counts and top-10 of 5 fixed queries bit-exact after save/load")


# -- criterion 8: service contract -----------------------------------------------


HIT_SCHEMA = {
    "type": "object",
    "required": ["id", "score", "metadata"],
    "properties": {
        "id": {"type": "string"},
        "score": {"type": "number"},
        "metadata": {"type": "object"},
    },
}
SCHEMAS = {
    "health": {
        "type": "object",
        "required": ["status", "keyframes", "transcripts", "summaries", "videos"],
        "properties": {"status": {"const": "ok"}},
    },
    "ingest": {
        "type": "object",
        "required": ["video_id", "n_shots", "n_keyframes", "n_intervals",
                     "summary_generated", "warnings"],
    },
    "frames": {
        "type": "object",
        "required": ["groups"],
        "properties": {"groups": {"type": "array", "items": {
            "type": "object",
            "required": ["video_id", "group_score", "hits"],
            "properties": {"hits": {"type": "array", "items": HIT_SCHEMA}},
        }}},
    },
    "transcripts": {
        "type": "object",
        "required": ["matches"],
        "properties": {"matches": {"type": "array", "items": {
            "type": "object", "required": ["hit", "keyframes"],
        }}},
    },
    "summaries": {
        "type": "object",
        "required": ["matches"],
        "properties": {"matches": {"type": "array", "items": {
            "type": "object", "required": ["video_id", "summary_text", "score"],
        }}},
    },
    "temporal": {
        "type": "object",
        "required": ["videos"],
        "properties": {"videos": {"type": "array", "items": {
            "type": "object",
            "required": ["video_id", "s_video", "s_pair", "avg_top1", "avg_top2", "best_pair"],
            "properties": {"best_pair": {
                "type": "object",
                "required": ["t1_s", "t2_s", "kf1", "kf2", "s1", "s2", "pair_score"],
            }},
        }}},
    },
    "video": {
        "type": "object",
        "required": ["video_id", "fps", "duration_s", "source_url"],
    },
    "keyframes": {
        "type": "object",
        "required": ["video_id", "keyframes"],
        "properties": {"keyframes": {"type": "array", "items": {
            "type": "object",
            "required": ["keyframe_id", "video_id", "frame_index", "timestamp_s"],
        }}},
    },
    "verify": {
        "type": "object",
        "required": ["video_id", "frame_index", "ok", "timestamp_s", "max_frame"],
    },
    "build": {"type": "object", "required": ["archive", "query_id", "n_items"]},
    "error": {
        "type": "object",
        "required": ["error", "message"],
        "properties": {"error": {"type": "string"}, "message": {"type": "string"}},
    },
}


def test_service_contract(tmp_path):
    provider = ProviderConfig(dim=DIM)
    engine = SearchEngine(
        text_provider=provider, image_provider=provider, transform_provider=provider
    )
    rng = random.Random(9)
    for v in range(4):
        engine.ingest(synthetic_manifest(f"v{v:02d}", rng))
    config = ServiceConfig(store_path=str(tmp_path / "store"))
    app = create_app(engine, config)

    with TestClient(app) as client:
        checked = {}

        def check(name, response, status=200):
            assert response.status_code == status, f"{name}: {response.status_code}"
            jsonschema.validate(response.json(), SCHEMAS[name if status == 200 else "error"])
            checked[name] = True
            return response.json()

        check("health", client.get("/health"))
        manifest = synthetic_manifest("fresh", random.Random(1))
        doc = {
            "video": {"id": "fresh", "fps": manifest.meta.fps,
                      "duration_s": manifest.meta.duration_s, "url": manifest.meta.source_url},
            "shots": [{"start": s.start_frame, "end": s.end_frame} for s in manifest.shots],
            "segments": [{"ordinal": s.ordinal, "start_s": s.start_s,
                          "end_s": s.end_s, "text": s.raw_text} for s in manifest.segments],
        }
        check("ingest", client.post("/ingest", json=doc))
        check("frames", client.post("/search/frames", json={"query": "tin tức"}))
        check("transcripts", client.post("/search/transcripts",
                                         json={"query": "tin tức", "keyword": "tin"}))
        check("summaries", client.post("/search/summaries", json={"query": "tin tức"}))
        refs = [m["image_ref"] for _, m in engine.store.records("keyframes")
                if m["video_id"] == "v00"]
        check("temporal", client.post("/search/temporal", json={"e1": refs[0], "e2": refs[-1]}))
        check("video", client.get("/videos/v00"))
        check("keyframes", client.get("/videos/v00/keyframes"))
        check("verify", client.post("/submission/verify",
                                    json={"video_id": "v00", "frame_index": 10}))
        check("build", client.post("/submission/build", json={
            "query_id": "q1", "items": [{"rank": 1, "video_id": "v00", "frame_index": 10}],
        }))
        archive = client.get("/submission/archive")
        assert archive.status_code == 200
        assert archive.content[:2] == b"PK"

        # error paths: 400 / 404 / 409 / 503
        bad_query = client.post("/search/frames", json={"nope": 1})
        assert bad_query.status_code == 400
        jsonschema.validate(bad_query.json(), SCHEMAS["error"])
        assert bad_query.json()["error"] == "invalid_query"

        missing = client.get("/videos/ghost")
        assert missing.status_code == 404
        jsonschema.validate(missing.json(), SCHEMAS["error"])

        conflict = client.post("/ingest", json=doc)
        assert conflict.status_code == 409
        jsonschema.validate(conflict.json(), SCHEMAS["error"])

        real_embedder = engine.text_embedder

        class DownEmbedder:
            dim = DIM

            def embed_text(self, text):
                from scenesearch.errors import ProviderUnavailableError
                raise ProviderUnavailableError("model server down")

        engine.text_embedder = DownEmbedder()
        down = client.post("/search/frames", json={"query": "x"})
        assert down.status_code == 503
        jsonschema.validate(down.json(), SCHEMAS["error"])
        engine.text_embedder = real_embedder

        # 32 concurrent searches return the same bodies as the serial run
        queries = [f"truy vấn {i}" for i in range(32)]
        serial = [client.post("/search/frames", json={"query": q, "k": 10}).json()
                  for q in queries]
        with ThreadPoolExecutor(max_workers=32) as pool:
            concurrent = list(
                pool.map(lambda q: client.post("/search/frames",
                                               json={"query": q, "k": 10}).json(), queries)
            )
        assert concurrent == serial

    _pass(
        "service contract: all endpoints schema-valid, 400/404/409/503 exercised, "
        "32-way concurrent search equals serial"
    )
