"""topiclabel: single-label selection for topic-model word lists.

A topic's words are joined into one sentence and embedded; candidate
labels (the words themselves, or every node of a ConceptNet-expanded
knowledge graph) are ranked by cosine similarity to that sentence
embedding and the argmax wins.
"""

__version__ = "0.1.0"

from .core import (
    CandidateSource,
    EmbeddingVector,
    LabelResult,
    ScoredCandidate,
    Topic,
    normalize_word,
)
from .embedding import Embedder, EmbedderConfig, cosine, embed_texts, embed_topic
from .graph import ExpansionConfig, KnowledgeGraph, candidate_nodes, connected_components, expand_graph
from .conceptnet import ConceptNetClient, term_to_uri
from .labeling import dsl, gel
from .sentence import build_sentence
from .evaluation import (
    EvalReport,
    ScoreTriple,
    cosine_eval,
    evaluate_corpus,
    multi_reference_best,
    token_bertscore,
)
from .datasets import DatasetSpec, load_topics, validate_bhatia

__all__ = [
    "CandidateSource",
    "ConceptNetClient",
    "DatasetSpec",
    "Embedder",
    "EmbedderConfig",
    "EmbeddingVector",
    "EvalReport",
    "ExpansionConfig",
    "KnowledgeGraph",
    "LabelResult",
    "ScoreTriple",
    "ScoredCandidate",
    "Topic",
    "build_sentence",
    "candidate_nodes",
    "connected_components",
    "cosine",
    "cosine_eval",
    "dsl",
    "embed_texts",
    "embed_topic",
    "evaluate_corpus",
    "expand_graph",
    "gel",
    "load_topics",
    "multi_reference_best",
    "normalize_word",
    "term_to_uri",
    "token_bertscore",
    "validate_bhatia",
]
