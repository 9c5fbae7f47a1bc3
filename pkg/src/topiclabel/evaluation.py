"""Metrics: pairwise cosine scoring and greedy token-matching P/R/F1, with
multi-reference max selection and corpus-mean reporting.

The token score embeds whitespace-split tokens individually (labels here
are 1-4 word phrases) and greedy-matches them by cosine: recall averages,
over reference tokens, the best match among candidate tokens; precision
is the mirror image; f1 is their harmonic mean. No idf weighting and no
baseline rescaling. For scoring with an external implementation instead,
``emit_external_pairs`` / ``evaluate_with_external_scores`` round-trip a
JSON batch file through any scorer that fills in per-pair P/R/F1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .core import EmbeddingVector, LabelResult, Topic
from .embedding import Embedder, EmbedderConfig, as_embedder, cosine
from .errors import (
    EmptyReferences,
    EmptyTokens,
    MissingReferences,
    ParseError,
    TopicMismatch,
)

MODES = ("bertscore", "cosine")


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def token_bertscore(
    candidate_tokens: Sequence[str],
    reference_tokens: Sequence[str],
    token_embeddings: Mapping[str, EmbeddingVector],
) -> ScoreTriple:
    """Greedy max-cosine matching between the two token lists.

    ``token_embeddings`` must hold one vector for every distinct token;
    duplicate token positions share their text's vector (embeddings here
    are non-contextual).
    """
    if not candidate_tokens or not reference_tokens:
        raise EmptyTokens("token score requires non-empty token lists on both sides")
    try:
        cand = [token_embeddings[t] for t in candidate_tokens]
        ref = [token_embeddings[t] for t in reference_tokens]
    except KeyError as exc:
        raise EmptyTokens(f"missing embedding for token {exc.args[0]!r}") from exc

    sim = [[cosine(c, r) for r in ref] for c in cand]
    precision = sum(max(row) for row in sim) / len(cand)
    recall = sum(max(sim[i][j] for i in range(len(cand))) for j in range(len(ref))) / len(ref)
    return ScoreTriple(precision=precision, recall=recall, f1=_f1(precision, recall))


def bertscore_strings(candidate: str, reference: str, embedder: EmbedderConfig | Embedder) -> ScoreTriple:
    """Token score between two label strings, tokens = whitespace split."""
    emb = as_embedder(embedder)
    candidate_tokens = candidate.split()
    reference_tokens = reference.split()
    if not candidate_tokens or not reference_tokens:
        raise EmptyTokens("labels must contain at least one token")
    unique = list(dict.fromkeys(candidate_tokens + reference_tokens))
    vectors = dict(zip(unique, emb.embed_texts(unique)))
    return token_bertscore(candidate_tokens, reference_tokens, vectors)


def cosine_eval(predicted: str, gold: str, embedder: EmbedderConfig | Embedder) -> float:
    """Cosine similarity between the embeddings of two whole label strings."""
    if not predicted or not gold:
        raise EmptyTokens("cosine evaluation requires non-empty strings")
    emb = as_embedder(embedder)
    vec_predicted, vec_gold = emb.embed_texts([predicted, gold])
    return cosine(vec_predicted, vec_gold)


def multi_reference_best(
    candidate: str,
    references: Sequence[str],
    scorer: Callable[[str, str], float],
) -> tuple[str, float]:
    """Score the candidate against each reference independently and keep
    the maximum; exact ties keep the earliest reference."""
    if not references:
        raise EmptyReferences("at least one reference is required")
    best_reference = references[0]
    best_score = scorer(candidate, references[0])
    for reference in references[1:]:
        score = scorer(candidate, reference)
        if score > best_score:
            best_reference, best_score = reference, score
    return best_reference, best_score


# ---------------------------------------------------------------------------
# Corpus evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TopicScore:
    topic_id: str
    best_reference: str
    score: float
    triple: ScoreTriple | None = None


@dataclass(frozen=True)
class EvalReport:
    mode: str
    per_topic: tuple[TopicScore, ...]
    mean_cosine: float | None = None
    mean_precision: float | None = None
    mean_recall: float | None = None
    mean_f1: float | None = None


def evaluate_corpus(
    results: Sequence[LabelResult],
    topics: Sequence[Topic],
    mode: str,
    embedder: EmbedderConfig | Embedder,
) -> EvalReport:
    """Per-topic multi-reference max, then unweighted arithmetic means."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    emb = as_embedder(embedder)
    by_id = {topic.id: topic for topic in topics}

    rows = []
    for result in results:
        topic = by_id.get(result.topic_id)
        if topic is None:
            raise TopicMismatch(f"result references unknown topic {result.topic_id!r}")
        if not topic.references:
            raise MissingReferences(f"topic {topic.id!r} has no gold references")
        if mode == "cosine":
            best_ref, score = multi_reference_best(
                result.label, topic.references, lambda c, r: cosine_eval(c, r, emb)
            )
            rows.append(TopicScore(topic_id=topic.id, best_reference=best_ref, score=score))
        else:
            best_ref, best_f1 = multi_reference_best(
                result.label, topic.references, lambda c, r: bertscore_strings(c, r, emb).f1
            )
            triple = bertscore_strings(result.label, best_ref, emb)
            rows.append(
                TopicScore(topic_id=topic.id, best_reference=best_ref, score=best_f1, triple=triple)
            )
    return _assemble_report(mode, rows)


def _assemble_report(mode: str, rows: Sequence[TopicScore]) -> EvalReport:
    n = len(rows)
    if mode == "cosine":
        return EvalReport(
            mode=mode,
            per_topic=tuple(rows),
            mean_cosine=sum(r.score for r in rows) / n if n else 0.0,
        )
    return EvalReport(
        mode=mode,
        per_topic=tuple(rows),
        mean_precision=sum(r.triple.precision for r in rows) / n if n else 0.0,
        mean_recall=sum(r.triple.recall for r in rows) / n if n else 0.0,
        mean_f1=sum(r.triple.f1 for r in rows) / n if n else 0.0,
    )


# ---------------------------------------------------------------------------
# External-scorer escape hatch
# ---------------------------------------------------------------------------


def pair_id(topic_id: str, reference_index: int) -> str:
    return f"{topic_id}::{reference_index}"


def emit_external_pairs(
    results: Sequence[LabelResult], topics: Sequence[Topic], path: Path | str
) -> int:
    """Write every (candidate, reference) pair to ``path`` for an external
    scorer; returns the pair count."""
    by_id = {topic.id: topic for topic in topics}
    pairs = []
    for result in results:
        topic = by_id.get(result.topic_id)
        if topic is None:
            raise TopicMismatch(f"result references unknown topic {result.topic_id!r}")
        if not topic.references:
            raise MissingReferences(f"topic {topic.id!r} has no gold references")
        for index, reference in enumerate(topic.references):
            pairs.append(
                {"id": pair_id(topic.id, index), "candidate": result.label, "reference": reference}
            )
    Path(path).write_text(json.dumps({"pairs": pairs}, indent=2) + "\n", encoding="utf-8")
    return len(pairs)


def load_external_scores(path: Path | str) -> dict[str, ScoreTriple]:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        scores = {}
        for entry in data["scores"]:
            scores[entry["id"]] = ScoreTriple(
                precision=float(entry["precision"]),
                recall=float(entry["recall"]),
                f1=float(entry["f1"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed external scores file {path}: {exc}") from exc
    return scores


def evaluate_with_external_scores(
    results: Sequence[LabelResult],
    topics: Sequence[Topic],
    scores: Mapping[str, ScoreTriple],
) -> EvalReport:
    """Multi-reference max over externally supplied P/R/F1 triples,
    selecting by f1 (earliest reference wins ties)."""
    by_id = {topic.id: topic for topic in topics}
    rows = []
    for result in results:
        topic = by_id.get(result.topic_id)
        if topic is None:
            raise TopicMismatch(f"result references unknown topic {result.topic_id!r}")
        if not topic.references:
            raise MissingReferences(f"topic {topic.id!r} has no gold references")
        best_index = None
        best_triple = None
        for index in range(len(topic.references)):
            key = pair_id(topic.id, index)
            if key not in scores:
                raise ParseError(f"external scores are missing pair {key!r}")
            triple = scores[key]
            if best_triple is None or triple.f1 > best_triple.f1:
                best_index, best_triple = index, triple
        rows.append(
            TopicScore(
                topic_id=topic.id,
                best_reference=topic.references[best_index],
                score=best_triple.f1,
                triple=best_triple,
            )
        )
    return _assemble_report("bertscore", rows)


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------


def report_to_dict(report: EvalReport) -> dict:
    per_topic = []
    for row in report.per_topic:
        entry: dict = {"topic_id": row.topic_id, "best_reference": row.best_reference}
        if report.mode == "cosine":
            entry["cosine"] = row.score
        else:
            entry.update(
                {"precision": row.triple.precision, "recall": row.triple.recall, "f1": row.triple.f1}
            )
        per_topic.append(entry)
    summary: dict = {"mode": report.mode, "topics": len(report.per_topic)}
    if report.mode == "cosine":
        summary["mean_cosine"] = report.mean_cosine
    else:
        summary["mean_precision"] = report.mean_precision
        summary["mean_recall"] = report.mean_recall
        summary["mean_f1"] = report.mean_f1
    return {"summary": summary, "per_topic": per_topic}


def format_report_table(report: EvalReport) -> str:
    """Fixed-width table: one row per topic plus a MEAN row."""
    if report.mode == "cosine":
        headers = ("topic_id", "best_reference", "cosine")
        rows = [(r.topic_id, r.best_reference, f"{r.score:.4f}") for r in report.per_topic]
        rows.append(("MEAN", "", f"{report.mean_cosine:.4f}"))
    else:
        headers = ("topic_id", "best_reference", "precision", "recall", "f1")
        rows = [
            (
                r.topic_id,
                r.best_reference,
                f"{r.triple.precision:.4f}",
                f"{r.triple.recall:.4f}",
                f"{r.triple.f1:.4f}",
            )
            for r in report.per_topic
        ]
        rows.append(
            (
                "MEAN",
                "",
                f"{report.mean_precision:.4f}",
                f"{report.mean_recall:.4f}",
                f"{report.mean_f1:.4f}",
            )
        )
    widths = [max(len(headers[i]), *(len(row[i]) for row in rows)) for i in range(len(headers))]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    return "\n".join(lines)
