"""Load benchmark corpora into Topic records.

The canonical interchange format is JSONL, one object per line:
``{"id": str, "words": [str, ...], "references": [str, ...]}``. The CSV
and TSV loaders adapt external distributions into that shape:

* ``bhatia_csv`` — columns ``topic_id, domain, terms, label, avg_rating``
  (terms space-separated, one row per candidate label); rows rated below
  2.0 are dropped at load, so topics whose labels all fall below the bar
  never materialize.
* ``newsgroups_tsv`` — tab-separated ``label, word1..wordN``; each line
  becomes one topic whose single reference is the label, with the id
  derived from the label.

Words are normalized on load; references are kept verbatim apart from
lowercasing.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .core import Topic, normalize_word
from .errors import DuplicateTopicId, EmptyDataset, ParseError, TopicLabelError

FORMATS = ("topics_jsonl", "bhatia_csv", "newsgroups_tsv")
BHATIA_RATING_FLOOR = 2.0


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    format: str
    path: Path

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {self.format!r}")
        object.__setattr__(self, "path", Path(self.path))


def load_topics(spec: DatasetSpec) -> list[Topic]:
    loader = {
        "topics_jsonl": load_topics_jsonl,
        "bhatia_csv": load_bhatia_csv,
        "newsgroups_tsv": load_newsgroups_tsv,
    }[spec.format]
    topics = loader(spec.path)
    if not topics:
        raise EmptyDataset(f"{spec.path} produced no topics")
    return topics


def load_topics_jsonl(path: Path | str) -> list[Topic]:
    topics = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                topic = Topic(
                    id=str(record["id"]),
                    words=tuple(record["words"]),
                    references=tuple(str(r).lower() for r in record.get("references", [])),
                )
            except (json.JSONDecodeError, KeyError, TypeError, TopicLabelError) as exc:
                raise ParseError(str(exc), line=line_number) from exc
            if topic.id in seen:
                raise DuplicateTopicId(f"duplicate topic id {topic.id!r} at line {line_number}")
            seen.add(topic.id)
            topics.append(topic)
    return topics


def save_topics_jsonl(topics: Iterable[Topic], path: Path | str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for topic in topics:
            fh.write(
                json.dumps(
                    {"id": topic.id, "words": list(topic.words), "references": list(topic.references)},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_bhatia_csv(path: Path | str) -> list[Topic]:
    words_by_topic: dict[str, tuple[str, ...]] = {}
    references: dict[str, list[str]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"topic_id", "terms", "label", "avg_rating"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ParseError(f"bhatia csv must declare columns {sorted(required)}", line=1)
        for row in reader:
            line_number = reader.line_num
            try:
                topic_id = row["topic_id"].strip()
                words = tuple(row["terms"].split())
                label = row["label"].strip().lower()
                rating = float(row["avg_rating"])
            except (AttributeError, KeyError, ValueError) as exc:
                raise ParseError(str(exc), line=line_number) from exc
            if not topic_id or not words or not label:
                raise ParseError("topic_id, terms and label must be non-empty", line=line_number)
            if rating < BHATIA_RATING_FLOOR:
                continue
            normalized = tuple(normalize_word(w) for w in words)
            if topic_id in words_by_topic:
                if words_by_topic[topic_id] != normalized:
                    raise ParseError(
                        f"topic {topic_id!r} repeats with different terms", line=line_number
                    )
            else:
                words_by_topic[topic_id] = normalized
                references[topic_id] = []
            references[topic_id].append(label)
    return [
        Topic(id=topic_id, words=words, references=tuple(references[topic_id]))
        for topic_id, words in words_by_topic.items()
    ]


def load_newsgroups_tsv(path: Path | str) -> list[Topic]:
    topics = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = [f.strip() for f in line.split("\t")]
            if len(fields) < 2:
                raise ParseError("expected a label and at least one word", line=line_number)
            label = fields[0].lower()
            if not label:
                raise ParseError("label must be non-empty", line=line_number)
            topic_id = normalize_word(label).replace(" ", "_")
            if topic_id in seen:
                raise DuplicateTopicId(f"duplicate topic id {topic_id!r} at line {line_number}")
            seen.add(topic_id)
            try:
                topics.append(Topic(id=topic_id, words=tuple(fields[1:]), references=(label,)))
            except TopicLabelError as exc:
                raise ParseError(str(exc), line=line_number) from exc
    return topics


@dataclass(frozen=True)
class ValidationReport:
    topic_count: int
    reference_pair_count: int
    zero_reference_topics: tuple[str, ...]
    words_per_topic: dict[int, int]


def validate_bhatia(topics: Sequence[Topic]) -> ValidationReport:
    """Shape report: counts, zero-reference topics (which evaluation will
    reject), and a words-per-topic histogram."""
    histogram = Counter(len(topic.words) for topic in topics)
    return ValidationReport(
        topic_count=len(topics),
        reference_pair_count=sum(len(topic.references) for topic in topics),
        zero_reference_topics=tuple(t.id for t in topics if not t.references),
        words_per_topic=dict(sorted(histogram.items())),
    )
