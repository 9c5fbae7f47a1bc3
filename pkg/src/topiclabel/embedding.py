"""Text-embedding providers and vector math.

Two backends share one contract:

* ``http`` — POSTs ``{"model", "texts"}`` to ``{endpoint_url}/embed`` and
  expects ``{"model", "dim", "embeddings"}`` back, with ``embeddings[i]``
  matching ``texts[i]``.
* ``test_hash`` — a deterministic 64-dim embedder built on FNV-1a hashing,
  so offline tests in any implementation of this contract agree bitwise.

Vectors are cached on disk per model when ``cache_dir`` is set: one
append-only record file per model id, rewritten atomically on flush
(write temp file, rename). Record layout, little-endian throughout:
u32 text length, UTF-8 text bytes, u32 dim, ``dim`` float64 components.
"""

from __future__ import annotations

import os
import struct
import threading
import time
from dataclasses import dataclass
from math import sqrt
from pathlib import Path
from typing import Iterable, Sequence
from urllib.parse import quote

import requests

from .core import EmbeddingVector, Topic
from .errors import BackendUnavailable, DimMismatch, EmptyInput, ZeroVector
from .sentence import build_sentence

ENV_EMBED_URL = "TOPICLABEL_EMBED_URL"

#: Backoff schedule for failed HTTP calls: one sleep before each retry.
RETRY_BACKOFFS_MS = (250, 500, 1000)

# Test hook: retry sleeps go through this indirection.
_sleep = time.sleep


@dataclass(frozen=True)
class EmbedderConfig:
    backend: str = "test_hash"
    model_id: str = "test-hash-fnv1a-64"
    endpoint_url: str = ""
    batch_size: int = 32
    timeout_ms: int = 30000
    cache_dir: Path | None = None

    def __post_init__(self) -> None:
        if self.backend not in ("http", "test_hash"):
            raise ValueError(f"unknown embedding backend: {self.backend!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be positive")
        if self.cache_dir is not None:
            object.__setattr__(self, "cache_dir", Path(self.cache_dir))

    def resolved_endpoint(self) -> str:
        return os.environ.get(ENV_EMBED_URL) or self.endpoint_url


# ---------------------------------------------------------------------------
# Normative hash embedder
# ---------------------------------------------------------------------------

HASH_DIM = 64
HASH_SEED = 0x544F504943  # "TOPIC"
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def _fnv1a(data: bytes, state: int) -> int:
    for byte in data:
        state = ((state ^ byte) * _FNV_PRIME) & _MASK64
    return state


def hash_embed(text: str) -> tuple[float, ...]:
    """64-dim deterministic embedding of ``text``.

    Component i is ``h(text, i) / 2**63 - 1`` where ``h`` is 64-bit FNV-1a
    seeded with ``HASH_SEED`` over the UTF-8 bytes of the text followed by
    the little-endian u32 encoding of i; the vector is then L2-normalized.
    FNV-1a folds strictly left to right, so the per-text prefix state is
    hashed once and only the 4 index bytes differ per component.
    """
    prefix = _fnv1a(text.encode("utf-8"), HASH_SEED)
    components = []
    for i in range(HASH_DIM):
        h = _fnv1a(struct.pack("<I", i), prefix)
        components.append(h / 2**63 - 1.0)
    norm = sqrt(sum(c * c for c in components))
    if norm < 1e-12:
        raise ZeroVector(f"hash embedding degenerated to zero for {text!r}")
    return tuple(c / norm for c in components)


# ---------------------------------------------------------------------------
# Disk cache
# ---------------------------------------------------------------------------


class EmbeddingCache:
    """Per-model vector store. Single-writer, many-reader; values are
    deterministic so duplicate computation and last-write-wins are safe."""

    def __init__(self, cache_dir: Path, model_id: str):
        self.model_id = model_id
        self.path = Path(cache_dir) / "embeddings" / (quote(model_id, safe="") + ".bin")
        self._entries: dict[str, tuple[float, ...]] = {}
        self._lock = threading.Lock()
        self._dirty = False
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        blob = self.path.read_bytes()
        offset = 0
        while offset < len(blob):
            (text_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            text = blob[offset : offset + text_len].decode("utf-8")
            offset += text_len
            (dim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            values = struct.unpack_from(f"<{dim}d", blob, offset)
            offset += 8 * dim
            self._entries[text] = values

    def get(self, text: str) -> tuple[float, ...] | None:
        return self._entries.get(text)

    def put(self, text: str, values: Sequence[float]) -> None:
        with self._lock:
            self._entries[text] = tuple(values)
            self._dirty = True

    def flush(self) -> None:
        with self._lock:
            if not self._dirty:
                return
            self.path.parent.mkdir(parents=True, exist_ok=True)
            tmp = self.path.parent / (self.path.name + ".tmp")
            with open(tmp, "wb") as fh:
                for text, values in self._entries.items():
                    raw = text.encode("utf-8")
                    fh.write(struct.pack("<I", len(raw)))
                    fh.write(raw)
                    fh.write(struct.pack("<I", len(values)))
                    fh.write(struct.pack(f"<{len(values)}d", *values))
            os.replace(tmp, self.path)
            self._dirty = False


# ---------------------------------------------------------------------------
# Embedder
# ---------------------------------------------------------------------------


class Embedder:
    """Resolves texts to vectors through the configured backend, with
    in-memory memoization and optional persistent caching."""

    def __init__(self, config: EmbedderConfig):
        self.config = config
        self._memo: dict[str, tuple[float, ...]] = {}
        self._dim: int | None = None
        self._cache: EmbeddingCache | None = None
        self._session: requests.Session | None = None
        if config.cache_dir is not None:
            self._cache = EmbeddingCache(config.cache_dir, config.model_id)
        if config.backend == "http":
            if not config.resolved_endpoint():
                raise ValueError("http backend requires endpoint_url (or TOPICLABEL_EMBED_URL)")
            self._session = requests.Session()

    def embed_texts(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        """One vector per text, order preserved. All vectors share dim and
        model_id; results are cached by (model_id, text)."""
        if not texts:
            raise EmptyInput("embed_texts requires at least one text")
        if any(not t for t in texts):
            raise EmptyInput("embed_texts texts must be non-empty")

        missing = []
        for text in texts:
            if text in self._memo:
                continue
            cached = self._cache.get(text) if self._cache else None
            if cached is not None:
                self._check_dim(len(cached), "cache")
                self._memo[text] = cached
            else:
                missing.append(text)
        if missing:
            self._compute(list(dict.fromkeys(missing)))
            if self._cache:
                self._cache.flush()

        return [EmbeddingVector(self._memo[t], self.config.model_id) for t in texts]

    def embed_topic(self, topic: Topic) -> EmbeddingVector:
        """Embedding of the topic's comma-joined sentence."""
        return self.embed_texts([build_sentence(topic).text])[0]

    def _check_dim(self, dim: int, origin: str) -> None:
        if self._dim is None:
            self._dim = dim
        elif dim != self._dim:
            raise DimMismatch(
                f"{origin} returned dim {dim} but model {self.config.model_id!r} produced {self._dim}"
            )

    def _compute(self, texts: list[str]) -> None:
        if self.config.backend == "test_hash":
            for text in texts:
                values = hash_embed(text)
                self._store(text, values)
            return
        for start in range(0, len(texts), self.config.batch_size):
            batch = texts[start : start + self.config.batch_size]
            for text, values in zip(batch, self._post_batch(batch)):
                self._store(text, values)

    def _store(self, text: str, values: Sequence[float]) -> None:
        self._check_dim(len(values), "backend")
        self._memo[text] = tuple(values)
        if self._cache:
            self._cache.put(text, values)

    def _post_batch(self, batch: list[str]) -> list[list[float]]:
        url = self.config.resolved_endpoint().rstrip("/") + "/embed"
        payload = {"model": self.config.model_id, "texts": batch}
        timeout = self.config.timeout_ms / 1000.0
        last_error: Exception | str = "unknown"
        for attempt in range(len(RETRY_BACKOFFS_MS) + 1):
            if attempt:
                _sleep(RETRY_BACKOFFS_MS[attempt - 1] / 1000.0)
            try:
                response = self._session.post(url, json=payload, timeout=timeout)
            except requests.RequestException as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                last_error = f"HTTP {response.status_code}"
                continue
            return self._parse_response(response, batch)
        raise BackendUnavailable(f"embedding backend failed after retries: {last_error}")

    def _parse_response(self, response: requests.Response, batch: list[str]) -> list[list[float]]:
        try:
            body = response.json()
            embeddings = body["embeddings"]
            dim = int(body["dim"])
        except (ValueError, KeyError, TypeError) as exc:
            raise BackendUnavailable(f"malformed embedding response: {exc}") from exc
        if len(embeddings) != len(batch):
            raise BackendUnavailable(
                f"embedding backend returned {len(embeddings)} vectors for {len(batch)} texts"
            )
        for row in embeddings:
            if len(row) != dim:
                raise DimMismatch(f"backend row has dim {len(row)}, header says {dim}")
        return embeddings


def as_embedder(embedder: Embedder | EmbedderConfig) -> Embedder:
    return embedder if isinstance(embedder, Embedder) else Embedder(embedder)


def embed_texts(texts: Sequence[str], config: EmbedderConfig) -> list[EmbeddingVector]:
    return Embedder(config).embed_texts(texts)


def embed_topic(topic: Topic, config: EmbedderConfig) -> EmbeddingVector:
    return Embedder(config).embed_topic(topic)


def cosine(u: EmbeddingVector, v: EmbeddingVector) -> float:
    """(u·v)/(‖u‖‖v‖), clamped to [-1, 1]. Exactly symmetric in u, v."""
    if u.dim != v.dim:
        raise DimMismatch(f"cosine over dims {u.dim} and {v.dim}")
    dot = 0.0
    norm_u = 0.0
    norm_v = 0.0
    for a, b in zip(u.values, v.values):
        dot += a * b
        norm_u += a * a
        norm_v += b * b
    norm_u = sqrt(norm_u)
    norm_v = sqrt(norm_v)
    if norm_u < 1e-12 or norm_v < 1e-12:
        raise ZeroVector("cosine is undefined for zero-norm vectors")
    return min(1.0, max(-1.0, dot / (norm_u * norm_v)))
