"""Shared domain types and text normalization.

Every term that flows through the pipeline (dataset words, graph node
terms, candidate labels) is reduced to one canonical form by
``normalize_word`` so that knowledge-graph vocabulary and dataset
vocabulary compare equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .errors import EmptyTopic, EmptyWord

#: Slack allowed on |score| <= 1 checks; cosine arithmetic can overshoot by rounding.
SCORE_EPS = 1e-9


def normalize_word(raw: str) -> str:
    """Canonical term form: lowercased, underscores to spaces, whitespace
    runs collapsed to single spaces, trimmed.

    Raises EmptyWord if nothing is left. Idempotent.
    """
    normalized = " ".join(raw.lower().replace("_", " ").split())
    if not normalized:
        raise EmptyWord(f"word is empty after normalization: {raw!r}")
    return normalized


class CandidateSource(str, Enum):
    """Where a candidate label came from."""

    TOPIC_WORD = "topic_word"
    GRAPH_NODE = "graph_node"


@dataclass(frozen=True)
class Topic:
    """One topic-model output: an id, its ranked word list, and optional
    gold reference labels.

    Words are normalized at construction; their order is preserved because
    it is the tie-break key for direct labeling. Duplicates are kept (they
    cannot change the argmax value, only the tie-break).
    """

    id: str
    words: tuple[str, ...]
    references: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.id:
            raise EmptyTopic("topic id must be non-empty")
        words = tuple(normalize_word(w) for w in self.words)
        if not words:
            raise EmptyTopic(f"topic {self.id!r} has no words")
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "references", tuple(str(r) for r in self.references))


@dataclass(frozen=True)
class EmbeddingVector:
    """A fixed-dimension real vector from one embedding model."""

    values: tuple[float, ...]
    model_id: str

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("embedding vector must have at least one component")
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"embedding for model {self.model_id!r} has non-finite components")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ScoredCandidate:
    """A candidate label with its cosine similarity to the topic embedding."""

    text: str
    score: float
    source: CandidateSource

    def __post_init__(self) -> None:
        if not -1.0 - SCORE_EPS <= self.score <= 1.0 + SCORE_EPS:
            raise ValueError(f"cosine score out of range: {self.score}")


@dataclass(frozen=True)
class LabelResult:
    """The selected label for a topic plus the full ranked candidate list.

    The label is always the top-ranked candidate; the candidate order is
    total and deterministic (see the tie-break rules in ``labeling``).
    """

    topic_id: str
    label: str
    score: float
    candidates: tuple[ScoredCandidate, ...] = field(repr=False)

    def __post_init__(self) -> None:
        if not self.candidates:
            raise ValueError(f"label result for {self.topic_id!r} has no candidates")
        top = self.candidates[0]
        if self.label != top.text or self.score != top.score:
            raise ValueError("label must equal the top-ranked candidate")

    @classmethod
    def from_ranked(cls, topic_id: str, candidates: Iterable[ScoredCandidate]) -> "LabelResult":
        ranked = tuple(candidates)
        if not ranked:
            raise ValueError(f"label result for {topic_id!r} has no candidates")
        return cls(topic_id=topic_id, label=ranked[0].text, score=ranked[0].score, candidates=ranked)
