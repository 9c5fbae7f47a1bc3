"""Command-line surface for batch labeling, evaluation, graph export, and
dataset conversion.

Every command that writes an output file also writes a manifest
(``<out>.manifest.json``) echoing the effective configuration, package and
Python versions, and the SHA-256 of the input file, so any result can be
reproduced from its manifest. Logs go to stderr; tables go to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .conceptnet import ConceptNetClient, DEFAULT_EDGE_LIMIT
from .core import LabelResult, Topic
from .datasets import FORMATS, DatasetSpec, load_topics, save_topics_jsonl, validate_bhatia
from .embedding import Embedder, EmbedderConfig
from .errors import MissingReferences, ParseError, TopicLabelError, TopicMismatch
from .evaluation import (
    emit_external_pairs,
    evaluate_corpus,
    evaluate_with_external_scores,
    format_report_table,
    load_external_scores,
    report_to_dict,
)
from .graph import ExpansionConfig, connected_components, expand_graph, graph_to_dict
from .labeling import dsl, gel

ENV_CACHE_DIR = "TOPICLABEL_CACHE_DIR"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except TopicLabelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topiclabel", description=__doc__)
    subparsers = parser.add_subparsers(required=True)

    label = subparsers.add_parser("label", help="label every topic in a dataset")
    _add_dataset_args(label)
    label.add_argument("--algorithm", choices=("dsl", "gel"), default="dsl")
    _add_embedder_args(label)
    _add_expansion_args(label)
    label.add_argument("--offline", action="store_true", help="serve graph queries from cache only")
    label.add_argument("--parallelism", type=int, default=4)
    label.add_argument("--out", required=True, type=Path)
    label.set_defaults(handler=cmd_label)

    evaluate = subparsers.add_parser("eval", help="score label results against gold references")
    evaluate.add_argument("--results", required=True, type=Path, help="JSONL written by `label`")
    _add_dataset_args(evaluate)
    evaluate.add_argument("--mode", choices=("bertscore", "cosine"), default="cosine")
    _add_embedder_args(evaluate)
    evaluate.add_argument(
        "--external",
        type=Path,
        help="bertscore mode: emit candidate/reference pairs to this JSON file and "
        "ingest <stem>.scores.json produced by an external scorer",
    )
    evaluate.add_argument("--out", type=Path, help="report JSON path (default: <results>.eval.json)")
    evaluate.set_defaults(handler=cmd_eval)

    graph = subparsers.add_parser("graph", help="knowledge-graph utilities")
    graph_sub = graph.add_subparsers(required=True)
    expand = graph_sub.add_parser("expand", help="expand seed terms and export the graph")
    expand.add_argument("--seeds", help="comma-separated seed terms")
    expand.add_argument("--input", type=Path, help="dataset to pull seeds from")
    expand.add_argument("--format", choices=FORMATS, default="topics_jsonl")
    expand.add_argument("--topic-id", help="topic whose words seed the graph (with --input)")
    _add_expansion_args(expand)
    expand.add_argument("--offline", action="store_true")
    expand.add_argument("--out", required=True, type=Path)
    expand.set_defaults(handler=cmd_graph_expand)

    dataset = subparsers.add_parser("dataset", help="dataset utilities")
    dataset_sub = dataset.add_subparsers(required=True)
    convert = dataset_sub.add_parser("convert", help="convert a corpus to canonical JSONL")
    convert.add_argument("--from", dest="from_format", choices=FORMATS, required=True)
    convert.add_argument("--to", dest="to_format", choices=("topics_jsonl",), default="topics_jsonl")
    convert.add_argument("--input", required=True, type=Path)
    convert.add_argument("--out", required=True, type=Path)
    convert.add_argument("--report", action="store_true", help="print a validation report")
    convert.set_defaults(handler=cmd_dataset_convert)

    return parser


def _add_dataset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, type=Path)
    parser.add_argument("--format", choices=FORMATS, default="topics_jsonl")


def _add_embedder_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embedder", choices=("test-hash", "http"), default="test-hash")
    parser.add_argument("--embedder-url", default="", help="http backend endpoint")
    parser.add_argument("--model", default="", help="embedding model id")
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--cache-dir", type=Path, default=None)


def _add_expansion_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--hops", "--max-hops", dest="hops", type=int, default=3)
    parser.add_argument("--edge-limit", type=int, default=DEFAULT_EDGE_LIMIT)
    parser.add_argument("--max-nodes", type=int, default=5000)
    parser.add_argument(
        "--no-stop-when-connected",
        dest="stop_when_connected",
        action="store_false",
        help="keep expanding even once all seeds share a component",
    )


def _cache_dir(args) -> Path | None:
    if args.cache_dir is not None:
        return args.cache_dir
    env = os.environ.get(ENV_CACHE_DIR)
    return Path(env) if env else None


def _embedder_config(args, cache_dir: Path | None) -> EmbedderConfig:
    backend = "test_hash" if args.embedder == "test-hash" else "http"
    kwargs = {"backend": backend, "endpoint_url": args.embedder_url,
              "batch_size": args.batch_size, "cache_dir": cache_dir}
    if args.model:
        kwargs["model_id"] = args.model
    return EmbedderConfig(**kwargs)


def _expansion_config(args) -> ExpansionConfig:
    return ExpansionConfig(
        max_hops=args.hops,
        per_term_edge_limit=args.edge_limit,
        max_nodes=args.max_nodes,
        stop_when_connected=args.stop_when_connected,
    )


def _write_manifest(out_path: Path, command: str, config: dict, input_path: Path) -> None:
    manifest = {
        "command": command,
        "config": config,
        "package_version": __version__,
        "python_version": sys.version.split()[0],
        "input_sha256": hashlib.sha256(input_path.read_bytes()).hexdigest(),
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    manifest_path = out_path.parent / (out_path.name + ".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, default=str) + "\n", encoding="utf-8")


def _result_to_dict(result: LabelResult) -> dict:
    return {
        "topic_id": result.topic_id,
        "label": result.label,
        "score": result.score,
        "candidates": [
            {"text": c.text, "score": c.score, "source": c.source.value} for c in result.candidates
        ],
    }


# ---------------------------------------------------------------------------
# label
# ---------------------------------------------------------------------------


def cmd_label(args) -> int:
    if not args.input.exists():
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 1
    topics = load_topics(DatasetSpec(name=args.input.stem, format=args.format, path=args.input))
    cache_dir = _cache_dir(args)
    embedder_config = _embedder_config(args, cache_dir)
    embedder = Embedder(embedder_config)
    expansion = _expansion_config(args)
    client = ConceptNetClient(cache_dir=cache_dir, offline=args.offline) if args.algorithm == "gel" else None

    def run_one(topic: Topic) -> dict:
        try:
            if args.algorithm == "dsl":
                result = dsl(topic, embedder)
            else:
                result = gel(topic, embedder, expansion, client)
            return _result_to_dict(result)
        except Exception as exc:  # per-topic failures become records, not aborts
            return {"topic_id": topic.id, "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=max(1, args.parallelism)) as pool:
        records = list(pool.map(run_one, topics))

    with open(args.out, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    _write_manifest(
        args.out,
        "label",
        {
            "algorithm": args.algorithm,
            "embedder": asdict(embedder_config),
            "expansion": asdict(expansion) if args.algorithm == "gel" else None,
            "offline": args.offline,
            "input": str(args.input),
            "format": args.format,
            "parallelism": args.parallelism,
        },
        args.input,
    )

    failures = sum(1 for r in records if "error" in r)
    print(f"labeled {len(records) - failures}/{len(records)} topics -> {args.out}", file=sys.stderr)
    if failures:
        print(f"{failures} topic(s) failed; see their error records", file=sys.stderr)
        return 2
    return 0


def load_results_jsonl(path: Path) -> list[LabelResult]:
    """Re-read `label` output; error records are rejected."""
    from .core import CandidateSource, ScoredCandidate

    results = []
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                if "error" in record:
                    raise ValueError(f"topic {record.get('topic_id')!r} carries an error record")
                candidates = tuple(
                    ScoredCandidate(
                        text=c["text"], score=float(c["score"]), source=CandidateSource(c["source"])
                    )
                    for c in record["candidates"]
                )
                results.append(
                    LabelResult(
                        topic_id=str(record["topic_id"]),
                        label=str(record["label"]),
                        score=float(record["score"]),
                        candidates=candidates,
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise ParseError(str(exc), line=line_number) from exc
    return results


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    for path in (args.results, args.input):
        if not path.exists():
            print(f"error: file not found: {path}", file=sys.stderr)
            return 1
    results = load_results_jsonl(args.results)
    topics = load_topics(DatasetSpec(name=args.input.stem, format=args.format, path=args.input))
    embedder = Embedder(_embedder_config(args, _cache_dir(args)))

    try:
        if args.mode == "bertscore" and args.external is not None:
            pair_count = emit_external_pairs(results, topics, args.external)
            print(f"wrote {pair_count} scoring pairs -> {args.external}", file=sys.stderr)
            scores_path = _external_scores_path(args.external)
            if not scores_path.exists():
                print(
                    f"waiting for external scores at {scores_path}; rerun once they exist",
                    file=sys.stderr,
                )
                return 0
            report = evaluate_with_external_scores(results, topics, load_external_scores(scores_path))
        else:
            report = evaluate_corpus(results, topics, args.mode, embedder)
    except (TopicMismatch, MissingReferences) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(format_report_table(report))
    out = args.out or args.results.parent / (args.results.name + ".eval.json")
    out.write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "eval",
        {
            "mode": args.mode,
            "results": str(args.results),
            "input": str(args.input),
            "format": args.format,
            "external": str(args.external) if args.external else None,
        },
        args.results,
    )
    print(f"report -> {out}", file=sys.stderr)
    return 0


def _external_scores_path(pairs_path: Path) -> Path:
    stem = pairs_path.name
    if stem.endswith(".json"):
        stem = stem[: -len(".json")]
    return pairs_path.parent / (stem + ".scores.json")


# ---------------------------------------------------------------------------
# graph expand
# ---------------------------------------------------------------------------


def cmd_graph_expand(args) -> int:
    if args.seeds:
        seeds = [s for s in (part.strip() for part in args.seeds.split(",")) if s]
    elif args.input:
        if not args.input.exists():
            print(f"error: input file not found: {args.input}", file=sys.stderr)
            return 1
        topics = load_topics(DatasetSpec(name=args.input.stem, format=args.format, path=args.input))
        if args.topic_id:
            matches = [t for t in topics if t.id == args.topic_id]
            if not matches:
                print(f"error: topic {args.topic_id!r} not in {args.input}", file=sys.stderr)
                return 1
            seeds = list(matches[0].words)
        else:
            seeds = list(topics[0].words)
    else:
        print("error: provide --seeds or --input", file=sys.stderr)
        return 1

    client = ConceptNetClient(cache_dir=_cache_dir(args), offline=args.offline)
    graph = expand_graph(seeds, _expansion_config(args), client)
    args.out.write_text(json.dumps(graph_to_dict(graph), indent=2) + "\n", encoding="utf-8")
    components = connected_components(graph)
    print(
        f"components: {len(components)}  nodes: {len(graph.nodes)}  edges: {len(graph.edges)}"
    )
    manifest_input = args.input if args.input else args.out  # seeds-only runs have no input file
    _write_manifest(
        args.out,
        "graph expand",
        {
            "seeds": seeds,
            "expansion": asdict(_expansion_config(args)),
            "offline": args.offline,
        },
        manifest_input,
    )
    return 0


# ---------------------------------------------------------------------------
# dataset convert
# ---------------------------------------------------------------------------


def cmd_dataset_convert(args) -> int:
    if not args.input.exists():
        print(f"error: input file not found: {args.input}", file=sys.stderr)
        return 1
    topics = load_topics(DatasetSpec(name=args.input.stem, format=args.from_format, path=args.input))
    save_topics_jsonl(topics, args.out)
    _write_manifest(
        args.out,
        "dataset convert",
        {"from": args.from_format, "to": args.to_format, "input": str(args.input)},
        args.input,
    )
    if args.report:
        report = validate_bhatia(topics)
        print(
            f"topics: {report.topic_count}  reference pairs: {report.reference_pair_count}  "
            f"zero-reference topics: {len(report.zero_reference_topics)}"
        )
        print(f"words per topic: {report.words_per_topic}")
    print(f"converted {len(topics)} topics -> {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
