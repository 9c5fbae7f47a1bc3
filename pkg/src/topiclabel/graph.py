"""Knowledge-graph construction by hop-limited frontier expansion.

Round k queries every node first discovered at hop k-1 (round 1 queries
the seeds), merging the returned edges and assigning hop = k to newly
discovered endpoints. Expansion stops when the hop budget is spent, when
all seeds share one connected component (if requested), or when the node
cap would be exceeded — in which case the current round's discoveries are
truncated in query order and expansion halts. The graph is undirected for
connectivity and candidate purposes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol

from .core import normalize_word
from .errors import EmptySeeds
from .conceptnet import ConceptQueryResult


class ConceptClient(Protocol):
    def query_concept(self, term: str, limit: int = ...) -> ConceptQueryResult: ...


@dataclass(frozen=True)
class ExpansionConfig:
    max_hops: int = 3
    per_term_edge_limit: int = 50
    max_nodes: int = 5000
    stop_when_connected: bool = True

    def __post_init__(self) -> None:
        if self.max_hops < 1:
            raise ValueError("max_hops must be >= 1")
        if self.per_term_edge_limit < 1:
            raise ValueError("per_term_edge_limit must be >= 1")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")


@dataclass(frozen=True)
class NodeInfo:
    term: str
    hop: int
    degree: int


@dataclass(frozen=True)
class GraphEdge:
    term_a: str
    term_b: str
    relation: str
    weight: float


@dataclass(frozen=True)
class KnowledgeGraph:
    seed_terms: tuple[str, ...]
    nodes: dict[str, NodeInfo]
    edges: tuple[GraphEdge, ...]
    #: Terms queried during expansion, in dispatch order (not exported).
    query_log: tuple[str, ...] = field(default=(), compare=False)


def expand_graph(seeds: Iterable[str], config: ExpansionConfig, client: ConceptClient) -> KnowledgeGraph:
    """Breadth-first expansion of ``seeds`` through the concept client.

    Deterministic given identical client responses: frontiers keep
    discovery order, edges keep first-seen order, and duplicate edges
    (same unordered endpoint pair and relation) are merged.
    """
    seed_terms = tuple(dict.fromkeys(normalize_word(s) for s in seeds))
    if not seed_terms:
        raise EmptySeeds("graph expansion requires at least one seed term")

    hops: dict[str, int] = {term: 0 for term in seed_terms}
    edges: dict[tuple[str, str, str], GraphEdge] = {}
    adjacency: dict[str, set[str]] = {term: set() for term in seed_terms}
    query_log: list[str] = []
    frontier = list(seed_terms)
    truncated = False

    for hop in range(1, config.max_hops + 1):
        if config.stop_when_connected and _seeds_connected(seed_terms, adjacency):
            break
        if not frontier:
            break
        discovered: list[str] = []
        for term in frontier:
            query_log.append(term)
            result = client.query_concept(term, limit=config.per_term_edge_limit)
            for edge in result.edges:
                a, b = edge.start_term, edge.end_term
                if a == b:
                    continue
                new_endpoints = [t for t in dict.fromkeys((a, b)) if t not in hops]
                if len(hops) + len(new_endpoints) > config.max_nodes:
                    truncated = True
                    break
                for endpoint in new_endpoints:
                    hops[endpoint] = hop
                    adjacency[endpoint] = set()
                    discovered.append(endpoint)
                key = (min(a, b), max(a, b), edge.relation)
                if key not in edges:
                    edges[key] = GraphEdge(a, b, edge.relation, edge.weight)
                    adjacency[a].add(b)
                    adjacency[b].add(a)
            if truncated:
                break
        if truncated:
            break
        frontier = discovered

    nodes = {
        term: NodeInfo(term=term, hop=hop, degree=len(adjacency[term]))
        for term, hop in hops.items()
    }
    return KnowledgeGraph(
        seed_terms=seed_terms,
        nodes=nodes,
        edges=tuple(edges.values()),
        query_log=tuple(query_log),
    )


def _seeds_connected(seeds: tuple[str, ...], adjacency: dict[str, set[str]]) -> bool:
    if len(seeds) == 1:
        return True
    target = set(seeds)
    seen = {seeds[0]}
    stack = [seeds[0]]
    while stack:
        for neighbor in adjacency[stack.pop()]:
            if neighbor not in seen:
                seen.add(neighbor)
                stack.append(neighbor)
    return target <= seen


def connected_components(graph: KnowledgeGraph) -> list[set[str]]:
    """Undirected components, ordered by their lexicographically smallest
    member term."""
    adjacency: dict[str, set[str]] = {term: set() for term in graph.nodes}
    for edge in graph.edges:
        adjacency[edge.term_a].add(edge.term_b)
        adjacency[edge.term_b].add(edge.term_a)
    components = []
    seen: set[str] = set()
    for term in sorted(graph.nodes):
        if term in seen:
            continue
        component = {term}
        stack = [term]
        while stack:
            for neighbor in adjacency[stack.pop()]:
                if neighbor not in component:
                    component.add(neighbor)
                    stack.append(neighbor)
        seen |= component
        components.append(component)
    return components


def candidate_nodes(graph: KnowledgeGraph) -> list[str]:
    """All node terms (seeds included), hop ascending then lexicographic."""
    return sorted(graph.nodes, key=lambda term: (graph.nodes[term].hop, term))


# ---------------------------------------------------------------------------
# JSON export (also the committed-fixture format for graphs)
# ---------------------------------------------------------------------------


def graph_to_dict(graph: KnowledgeGraph) -> dict:
    return {
        "seeds": list(graph.seed_terms),
        "nodes": [
            {"term": node.term, "hop": node.hop, "degree": node.degree}
            for node in (graph.nodes[t] for t in candidate_nodes(graph))
        ],
        "edges": [
            {"a": e.term_a, "b": e.term_b, "rel": e.relation, "weight": e.weight}
            for e in graph.edges
        ],
    }


def save_graph_json(graph: KnowledgeGraph, path: Path | str) -> None:
    Path(path).write_text(json.dumps(graph_to_dict(graph), indent=2) + "\n", encoding="utf-8")


def load_graph_json(path: Path | str) -> KnowledgeGraph:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    nodes = {
        entry["term"]: NodeInfo(term=entry["term"], hop=int(entry["hop"]), degree=int(entry["degree"]))
        for entry in data["nodes"]
    }
    edges = tuple(
        GraphEdge(entry["a"], entry["b"], entry["rel"], float(entry["weight"]))
        for entry in data["edges"]
    )
    return KnowledgeGraph(seed_terms=tuple(data["seeds"]), nodes=nodes, edges=edges)
