"""Rate-limited, disk-cached HTTP client for the ConceptNet public API.

Raw API responses are cached one JSON file per (term, limit) under
``cache_dir/conceptnet/``; the cache doubles as the committed-fixture
format, and ``offline=True`` replays it without ever touching the
network (a miss raises CacheMiss instead).
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any
from urllib.parse import quote

import requests

from .core import normalize_word
from .errors import CacheMiss, EmptyWord, NetworkError, RateLimited

DEFAULT_BASE_URL = "https://api.conceptnet.io"
ENV_CONCEPTNET_URL = "TOPICLABEL_CONCEPTNET_URL"
DEFAULT_EDGE_LIMIT = 50

RETRY_BACKOFFS_MS = (250, 500, 1000)

_sleep = time.sleep


def term_to_uri(term: str) -> str:
    """ConceptNet English-concept URI for a normalized term."""
    return "/c/en/" + normalize_word(term).replace(" ", "_")


def _uri_to_term(uri: str) -> str | None:
    # "/c/en/ice_hockey" or "/c/en/ice_hockey/n" -> "ice hockey"
    parts = uri.split("/")
    if len(parts) < 4 or parts[1] != "c":
        return None
    try:
        return normalize_word(parts[3])
    except EmptyWord:
        return None


@dataclass(frozen=True)
class ConceptEdge:
    start_term: str
    end_term: str
    relation: str
    weight: float


@dataclass(frozen=True)
class ConceptQueryResult:
    term: str
    edges: tuple[ConceptEdge, ...]
    fetched_at: float


class TokenBucket:
    """Blocking token bucket; shared across threads to pace API dispatch."""

    def __init__(self, rate_per_second: float, capacity: float | None = None,
                 clock=time.monotonic, sleep=time.sleep):
        if rate_per_second <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate_per_second
        self.capacity = capacity if capacity is not None else max(1.0, rate_per_second)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


class ConceptNetClient:
    """Typed ``query_concept`` over the HTTP API with caching and pacing."""

    def __init__(
        self,
        cache_dir: Path | str | None = None,
        base_url: str | None = None,
        offline: bool = False,
        requests_per_second: float = 2.0,
        timeout_s: float = 30.0,
    ):
        self.cache_dir = Path(cache_dir) / "conceptnet" if cache_dir is not None else None
        self.base_url = (base_url or os.environ.get(ENV_CONCEPTNET_URL) or DEFAULT_BASE_URL).rstrip("/")
        self.offline = offline
        self.timeout_s = timeout_s
        self._bucket = TokenBucket(requests_per_second)
        self._session = requests.Session()

    def query_concept(self, term: str, limit: int = DEFAULT_EDGE_LIMIT) -> ConceptQueryResult:
        """Edges for ``term`` where both endpoints are English concepts.

        Served from the disk cache when present; NotFound answers become
        empty edge lists, not errors.
        """
        term = normalize_word(term)
        if not 1 <= limit <= 1000:
            raise ValueError(f"edge limit must be in [1, 1000], got {limit}")

        cached = self._cache_read(term, limit)
        if cached is not None:
            raw, fetched_at = cached
        elif self.offline:
            raise CacheMiss(f"offline mode: no cached response for ({term!r}, {limit})")
        else:
            raw = self._fetch(term, limit)
            fetched_at = time.time()
            self._cache_write(term, limit, raw)
        return ConceptQueryResult(term=term, edges=self._parse_edges(term, raw), fetched_at=fetched_at)

    # -- cache ------------------------------------------------------------

    def _cache_path(self, term: str, limit: int) -> Path:
        return self.cache_dir / f"{quote(term, safe='')}_{limit}.json"

    def _cache_read(self, term: str, limit: int) -> tuple[dict, float] | None:
        if self.cache_dir is None:
            return None
        path = self._cache_path(term, limit)
        if not path.exists():
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh), path.stat().st_mtime

    def _cache_write(self, term: str, limit: int, raw: dict) -> None:
        if self.cache_dir is None:
            return
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        path = self._cache_path(term, limit)
        tmp = path.parent / (path.name + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(raw, fh)
        os.replace(tmp, path)

    # -- network ----------------------------------------------------------

    def _fetch(self, term: str, limit: int) -> dict:
        url = self.base_url + term_to_uri(term)
        last_error: Exception | str = "unknown"
        rate_limited = False
        for attempt in range(len(RETRY_BACKOFFS_MS) + 1):
            if attempt:
                _sleep(RETRY_BACKOFFS_MS[attempt - 1] / 1000.0)
            self._bucket.acquire()
            try:
                response = self._session.get(url, params={"limit": limit}, timeout=self.timeout_s)
            except requests.RequestException as exc:
                last_error = exc
                rate_limited = False
                continue
            if response.status_code == 404:
                return {"edges": []}
            if response.status_code == 429:
                rate_limited = True
                last_error = "HTTP 429"
                continue
            if response.status_code != 200:
                rate_limited = False
                last_error = f"HTTP {response.status_code}"
                continue
            try:
                return response.json()
            except ValueError as exc:
                last_error = exc
                continue
        if rate_limited:
            raise RateLimited(f"rate limited by API for {term!r} after backoff")
        raise NetworkError(f"ConceptNet query for {term!r} failed after retries: {last_error}")

    # -- parsing ----------------------------------------------------------

    def _parse_edges(self, term: str, raw: Any) -> tuple[ConceptEdge, ...]:
        """Total over arbitrary response shapes: malformed or non-English
        edges are dropped, never raised on."""
        edges = []
        if not isinstance(raw, dict):
            return ()
        for edge in raw.get("edges") or []:
            parsed = self._parse_edge(edge)
            if parsed is None:
                continue
            if term not in (parsed.start_term, parsed.end_term):
                continue
            edges.append(parsed)
        return tuple(edges)

    @staticmethod
    def _parse_edge(edge: Any) -> ConceptEdge | None:
        if not isinstance(edge, dict):
            return None
        start = edge.get("start")
        end = edge.get("end")
        rel = edge.get("rel")
        if not (isinstance(start, dict) and isinstance(end, dict) and isinstance(rel, dict)):
            return None
        if start.get("language") != "en" or end.get("language") != "en":
            return None
        start_term = _uri_to_term(str(start.get("term", "")))
        end_term = _uri_to_term(str(end.get("term", "")))
        relation = rel.get("label")
        if not start_term or not end_term or not relation:
            return None
        try:
            weight = max(0.0, float(edge.get("weight", 1.0)))
        except (TypeError, ValueError):
            weight = 1.0
        return ConceptEdge(start_term=start_term, end_term=end_term, relation=str(relation), weight=weight)
