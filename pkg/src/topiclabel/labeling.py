"""Label selection: pick the candidate whose embedding is most
cosine-similar to the whole-topic sentence embedding.

``dsl`` draws candidates from the topic words themselves; ``gel`` draws
them from every node of the expanded knowledge graph. Neither synthesizes
text — the label is always an existing candidate. The topic embedding is
computed from the original topic words only, fixed before any graph work.
"""

from __future__ import annotations

from .core import CandidateSource, LabelResult, ScoredCandidate, Topic
from .embedding import Embedder, EmbedderConfig, as_embedder, cosine
from .errors import EmptyGraph
from .graph import ConceptClient, ExpansionConfig, candidate_nodes, expand_graph


def dsl(topic: Topic, embedder: EmbedderConfig | Embedder) -> LabelResult:
    """Direct similarity labeling over the topic's own words.

    Candidates are ranked by score descending; exact ties keep the earlier
    word position (the topic model's own ranking).
    """
    emb = as_embedder(embedder)
    e_topic = emb.embed_topic(topic)
    word_vectors = emb.embed_texts(list(topic.words))
    scores = [cosine(e_topic, v) for v in word_vectors]
    order = sorted(range(len(topic.words)), key=lambda i: (-scores[i], i))
    ranked = tuple(
        ScoredCandidate(text=topic.words[i], score=scores[i], source=CandidateSource.TOPIC_WORD)
        for i in order
    )
    return LabelResult.from_ranked(topic.id, ranked)


def gel(
    topic: Topic,
    embedder: EmbedderConfig | Embedder,
    expansion: ExpansionConfig,
    client: ConceptClient,
) -> LabelResult:
    """Graph-enhanced labeling over every node of the expanded graph.

    Candidates are ranked by score descending; exact ties keep the node
    that comes first in candidate order (hop ascending, then
    lexicographic), privileging terms closer to the original topic.
    """
    graph = expand_graph(topic.words, expansion, client)
    terms = candidate_nodes(graph)
    if not terms:
        raise EmptyGraph(f"expansion for topic {topic.id!r} produced no nodes")
    emb = as_embedder(embedder)
    e_topic = emb.embed_topic(topic)
    node_vectors = emb.embed_texts(terms)
    scores = [cosine(e_topic, v) for v in node_vectors]
    order = sorted(range(len(terms)), key=lambda j: (-scores[j], j))
    ranked = tuple(
        ScoredCandidate(text=terms[j], score=scores[j], source=CandidateSource.GRAPH_NODE)
        for j in order
    )
    return LabelResult.from_ranked(topic.id, ranked)
