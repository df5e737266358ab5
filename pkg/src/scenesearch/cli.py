"""Operator entry points: corpus ingestion, one-shot queries, evaluation, serving.

Human-readable tables by default, ``--json`` (line-delimited, schema-stable)
for scripting. Exit codes: 0 success, 1 usage error, 2 data error,
3 provider error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .engine import SearchEngine
from .errors import (
    ConflictError,
    CorruptStoreError,
    InvalidArgumentError,
    InvalidSubmissionError,
    NotFoundError,
    ProviderUnavailableError,
)
from .evalharness import load_ground_truth, read_submission, score_submission
from .ingest import load_manifests
from .service import ServiceConfig, serve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3

STORE_ENV = "MERVIN_STORE"

DATA_ERRORS = (
    ConflictError,
    CorruptStoreError,
    InvalidArgumentError,
    InvalidSubmissionError,
    NotFoundError,
    FileNotFoundError,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _Parser:
    parser = _Parser(prog="scenesearch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="ingest a manifest directory or JSONL corpus")
    p_ingest.add_argument("manifests", help="directory of *.json manifests or a .jsonl file")
    p_ingest.add_argument("--store", default=None, help=f"store directory (default ${STORE_ENV})")
    p_ingest.add_argument("--jobs", type=int, default=1, help="parallel videos (default 1)")
    p_ingest.add_argument("--json", action="store_true", help="emit one JSON report per video")

    p_search = sub.add_parser("search", help="query an existing store")
    p_search.add_argument("mode", choices=["frames", "transcripts", "summaries", "temporal"])
    p_search.add_argument("--store", default=None)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("--query2", default=None, help="second event text (temporal only)")
    p_search.add_argument("--k", type=int, default=None)
    p_search.add_argument("--keyword", default=None, help="transcript keyword refinement")
    p_search.add_argument("--json", action="store_true")

    p_eval = sub.add_parser("eval", help="score a submission archive against ground truth")
    p_eval.add_argument("--ground-truth", required=True)
    p_eval.add_argument("--submission", required=True)
    p_eval.add_argument("--json", action="store_true")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="JSON service config file")

    return parser


def _store_path(arg: str | None) -> Path:
    path = arg or os.environ.get(STORE_ENV)
    if not path:
        raise InvalidArgumentError(f"no store path: pass --store or set ${STORE_ENV}")
    return Path(path)


def _cmd_ingest(args) -> int:
    store = _store_path(args.store)
    engine = SearchEngine.open(store)
    manifests = list(load_manifests(args.manifests))

    def one(manifest):
        return engine.ingest(manifest)

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(one, manifests))
    else:
        reports = [one(m) for m in manifests]

    for report in reports:
        if args.json:
            print(json.dumps({
                "video_id": report.video_id,
                "n_shots": report.n_shots,
                "n_keyframes": report.n_keyframes,
                "n_intervals": report.n_intervals,
                "summary_generated": report.summary_generated,
                "warnings": report.warnings,
            }, ensure_ascii=False, sort_keys=True))
        else:
            flags = " summary" if report.summary_generated else ""
            print(
                f"{report.video_id}: {report.n_shots} shots, {report.n_keyframes} keyframes, "
                f"{report.n_intervals} intervals{flags}"
            )
            for warning in report.warnings:
                print(f"  warning: {warning}")
    engine.save(store)
    if not args.json:
        print(f"store saved to {store}")
    return EXIT_OK


def _cmd_search(args) -> int:
    engine = SearchEngine.load(_store_path(args.store))
    emit = (lambda doc: print(json.dumps(doc, ensure_ascii=False, sort_keys=True))) if args.json else None

    if args.mode == "temporal":
        if not args.query2:
            raise InvalidArgumentError("temporal search requires --query2")
        for rank, s in enumerate(engine.temporal_search(args.query, args.query2), start=1):
            if emit:
                emit({
                    "rank": rank, "video_id": s.video_id, "s_video": s.s_video,
                    "s_pair": s.s_pair, "avg_top1": s.avg_top1, "avg_top2": s.avg_top2,
                    "t1_s": s.best_pair.t1_s, "t2_s": s.best_pair.t2_s,
                    "kf1": s.best_pair.kf1, "kf2": s.best_pair.kf2,
                })
            else:
                print(
                    f"{rank:>3}  {s.video_id}  s_video={s.s_video:.4f}  s_pair={s.s_pair:.4f}  "
                    f"pair=({s.best_pair.t1_s:.2f}s, {s.best_pair.t2_s:.2f}s)"
                )
    elif args.mode == "frames":
        for rank, group in enumerate(engine.frame_search(args.query, k=args.k), start=1):
            if emit:
                emit({
                    "rank": rank, "video_id": group.video_id, "group_score": group.group_score,
                    "hits": [{"id": h.id, "score": h.score} for h in group.hits],
                })
            else:
                best = group.hits[0]
                print(
                    f"{rank:>3}  {group.video_id}  score={group.group_score:.4f}  "
                    f"hits={len(group.hits)}  top={best.id}@frame {best.metadata['frame_index']}"
                )
    elif args.mode == "transcripts":
        matches = engine.transcript_search(args.query, keyword=args.keyword, k=args.k)
        for rank, match in enumerate(matches, start=1):
            if emit:
                emit({
                    "rank": rank, "id": match.hit.id, "score": match.hit.score,
                    "video_id": match.hit.metadata["video_id"],
                    "keyframes": [kf.keyframe_id for kf in match.keyframes],
                })
            else:
                text = match.hit.metadata.get("cleaned_text", "")
                snippet = text[:80] + ("..." if len(text) > 80 else "")
                print(
                    f"{rank:>3}  {match.hit.id}  score={match.hit.score:.4f}  "
                    f"kf={len(match.keyframes)}  {snippet}"
                )
    else:
        for rank, match in enumerate(engine.summary_search(args.query, k=args.k), start=1):
            if emit:
                emit({
                    "rank": rank, "video_id": match.video_id, "score": match.score,
                    "summary_text": match.summary_text,
                })
            else:
                snippet = match.summary_text[:80]
                print(f"{rank:>3}  {match.video_id}  score={match.score:.4f}  {snippet}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    ground_truth = load_ground_truth(args.ground_truth)
    submission = read_submission(args.submission)
    scores = score_submission(submission, ground_truth)
    if not scores:
        raise InvalidSubmissionError("no submission query matches the ground truth")
    for query_id, score in scores.items():
        if args.json:
            print(json.dumps({"query_id": query_id, "final_score": round(score, 4)}))
        else:
            print(f"{query_id}: final score {score:.4f}")
    mean = sum(scores.values()) / len(scores)
    if args.json:
        print(json.dumps({"mean_final_score": round(mean, 4), "n_queries": len(scores)}))
    else:
        print(f"mean final score over {len(scores)} queries: {mean:.4f}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    serve(ServiceConfig.from_file(args.config))
    return EXIT_OK


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "ingest":
            return _cmd_ingest(args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_serve(args)
    except ProviderUnavailableError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
