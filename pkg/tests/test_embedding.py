import json
import math
import struct

import pytest
from hypothesis import given, strategies as st

from topiclabel.core import EmbeddingVector, Topic
from topiclabel.embedding import (
    Embedder,
    EmbedderConfig,
    cosine,
    embed_texts,
    embed_topic,
    hash_embed,
)
from topiclabel.errors import BackendUnavailable, DimMismatch, EmptyInput, ZeroVector

from conftest import FIXTURES


# ---------------------------------------------------------------------------
# Independent oracle for the normative hash embedder: naive FNV-1a, full
# re-hash per component, no prefix sharing with the implementation.
# ---------------------------------------------------------------------------


def oracle_fnv1a(data: bytes, seed: int = 0x544F504943) -> int:
    value = seed
    for byte in data:
        value ^= byte
        value = (value * 0x100000001B3) % 2**64
    return value


def oracle_hash_vector(text: str) -> list[float]:
    components = [
        oracle_fnv1a(text.encode("utf-8") + struct.pack("<I", i)) / 2**63 - 1.0
        for i in range(64)
    ]
    norm = math.sqrt(sum(c * c for c in components))
    return [c / norm for c in components]


class TestHashEmbedder:
    def test_raw_hash_frozen_values(self):
        assert oracle_fnv1a(b"a" + struct.pack("<I", 0)) == 0xC602DC8215D25C26
        assert oracle_fnv1a(b"hockey" + struct.pack("<I", 0)) == 0x554A9E75F89CC422

    @pytest.mark.parametrize("text", ["a", "b", "hockey", "ice hockey", "obama, mccain"])
    def test_matches_oracle_bitwise(self, text):
        assert list(hash_embed(text)) == oracle_hash_vector(text)

    def test_frozen_component_values(self):
        vec_a = hash_embed("a")
        assert vec_a[0] == 0.1181635128435376
        assert vec_a[1] == -0.04389856018403641
        assert vec_a[63] == 0.06236305783604231
        assert hash_embed("b")[0] == 0.09698522911813501
        assert hash_embed("hockey")[0] == -0.07267315176367684

    def test_dim_and_unit_norm(self):
        vec = hash_embed("anything")
        assert len(vec) == 64
        assert math.sqrt(sum(c * c for c in vec)) == pytest.approx(1.0, abs=1e-6)

    def test_identical_texts_identical_vectors(self):
        first, second = embed_texts(["x", "x"], EmbedderConfig())
        assert first.values == second.values
        assert first.dim == 64


class TestCosine:
    def _vec(self, *values, model="m"):
        return EmbeddingVector(tuple(float(v) for v in values), model)

    def test_self_similarity(self):
        vec = self._vec(0.3, -1.2, 7.0)
        assert cosine(vec, vec) == 1.0

    def test_orthogonal(self):
        assert cosine(self._vec(1, 0), self._vec(0, 1)) == 0.0

    def test_analytic_sqrt_half(self):
        assert cosine(self._vec(1, 0), self._vec(1, 1)) == pytest.approx(
            0.70710678, abs=1e-8
        )

    def test_frozen_hash_pair(self):
        u, v = embed_texts(["a", "b"], EmbedderConfig())
        assert cosine(u, v) == -0.2512622489220602

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            cosine(self._vec(1, 0), self._vec(1, 0, 0))

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine(self._vec(1e-13, 0.0), self._vec(1, 0))

    @given(
        st.lists(st.floats(min_value=-10, max_value=10), min_size=2, max_size=8),
        st.lists(st.floats(min_value=-10, max_value=10), min_size=2, max_size=8),
    )
    def test_symmetry_exact(self, u_values, v_values):
        size = min(len(u_values), len(v_values))
        try:
            u = self._vec(*u_values[:size])
            v = self._vec(*v_values[:size])
            assert cosine(u, v) == cosine(v, u)
        except ZeroVector:
            pass

    @given(
        st.lists(st.floats(min_value=-10, max_value=10), min_size=3, max_size=3),
        st.floats(min_value=1e-3, max_value=1e3),
    )
    def test_scale_invariance(self, values, alpha):
        try:
            u = self._vec(*values)
            scaled = self._vec(*(alpha * v for v in values))
            v = self._vec(1.0, 2.0, -0.5)
            assert cosine(scaled, v) == pytest.approx(cosine(u, v), abs=1e-9)
        except ZeroVector:
            pass

    def test_clamped_to_one(self):
        # accumulated rounding can push the ratio a hair above 1
        u = self._vec(*([0.1] * 64))
        assert cosine(u, u) <= 1.0


class TestEmbedTopic:
    def test_single_word_topic_equals_word_embedding(self):
        config = EmbedderConfig()
        topic_vec = embed_topic(Topic(id="t", words=("hockey",)), config)
        word_vec = embed_texts(["hockey"], config)[0]
        assert topic_vec.values == word_vec.values

    def test_sentence_embedding_differs_from_word_embeddings(self):
        config = EmbedderConfig()
        sentence_vec = embed_topic(Topic(id="t", words=("a", "b")), config)
        vec_a, vec_b, vec_ab = embed_texts(["a", "b", "a, b"], config)
        assert sentence_vec.values == vec_ab.values
        assert sentence_vec.values != vec_a.values
        assert sentence_vec.values != vec_b.values


class TestHttpBackend:
    def _config(self, url, **kwargs):
        return EmbedderConfig(backend="http", model_id="fixture-mini-6d", endpoint_url=url, **kwargs)

    def test_recorded_fixture_verbatim(self, stub_server):
        fixture = json.loads((FIXTURES / "embed_hockey.json").read_text())
        stub_server.responses.append((200, fixture))
        [vec] = embed_texts(["hockey"], self._config(stub_server.url))
        assert list(vec.values) == fixture["embeddings"][0]
        assert vec.model_id == "fixture-mini-6d"
        request = stub_server.requests[0]
        assert request.path == "/embed"
        assert request.body == {"model": "fixture-mini-6d", "texts": ["hockey"]}

    def test_batching_respects_batch_size(self, stub_server):
        def handler(request):
            texts = request.body["texts"]
            return 200, {"model": "m", "dim": 2, "embeddings": [[1.0, 0.0]] * len(texts)}

        stub_server.handler = handler
        config = self._config(stub_server.url, batch_size=2)
        embed_texts(["a", "b", "c", "d", "e"], config)
        sizes = [len(r.body["texts"]) for r in stub_server.requests]
        assert sizes == [2, 2, 1]

    def test_retry_then_success(self, stub_server, no_retry_sleep):
        good = {"model": "m", "dim": 1, "embeddings": [[0.5]]}
        stub_server.responses.extend([(500, "boom"), (500, "boom"), (200, good)])
        [vec] = embed_texts(["x"], self._config(stub_server.url))
        assert vec.values == (0.5,)
        assert no_retry_sleep == [0.25, 0.5]

    def test_unavailable_after_retries(self, stub_server, no_retry_sleep):
        stub_server.responses.append((503, "down"))
        with pytest.raises(BackendUnavailable):
            embed_texts(["x"], self._config(stub_server.url))
        assert no_retry_sleep == [0.25, 0.5, 1.0]
        assert len(stub_server.requests) == 4

    def test_length_mismatch_is_unavailable(self, stub_server):
        stub_server.responses.append((200, {"model": "m", "dim": 1, "embeddings": [[0.5]]}))
        with pytest.raises(BackendUnavailable):
            embed_texts(["x", "y"], self._config(stub_server.url))

    def test_inconsistent_dims_rejected(self, stub_server):
        stub_server.responses.append(
            (200, {"model": "m", "dim": 2, "embeddings": [[0.5, 0.1], [0.5]]})
        )
        with pytest.raises(DimMismatch):
            embed_texts(["x", "y"], self._config(stub_server.url))

    def test_env_var_overrides_endpoint(self, stub_server, monkeypatch):
        monkeypatch.setenv("TOPICLABEL_EMBED_URL", stub_server.url)
        stub_server.responses.append((200, {"model": "m", "dim": 1, "embeddings": [[1.0]]}))
        config = EmbedderConfig(backend="http", model_id="m", endpoint_url="http://127.0.0.1:9")
        [vec] = embed_texts(["x"], config)
        assert vec.values == (1.0,)

    def test_missing_endpoint_rejected(self):
        with pytest.raises(ValueError):
            Embedder(EmbedderConfig(backend="http", model_id="m"))


class TestEmptyInput:
    def test_no_texts(self):
        with pytest.raises(EmptyInput):
            embed_texts([], EmbedderConfig())

    def test_empty_text(self):
        with pytest.raises(EmptyInput):
            embed_texts(["ok", ""], EmbedderConfig())


class TestDiskCache:
    def test_cache_hit_skips_backend(self, stub_server, tmp_path):
        def handler(request):
            texts = request.body["texts"]
            return 200, {"model": "m", "dim": 2, "embeddings": [[0.25, -0.5]] * len(texts)}

        stub_server.handler = handler
        config = EmbedderConfig(
            backend="http", model_id="m", endpoint_url=stub_server.url, cache_dir=tmp_path
        )
        first = embed_texts(["alpha", "beta"], config)
        assert len(stub_server.requests) == 1
        # fresh Embedder = simulated process restart; must replay from disk
        second = embed_texts(["alpha", "beta"], config)
        assert len(stub_server.requests) == 1
        assert [v.values for v in first] == [v.values for v in second]

    def test_cache_round_trip_is_bitwise(self, tmp_path):
        config = EmbedderConfig(cache_dir=tmp_path)
        original = embed_texts(["one", "two", "ice hockey"], config)
        replayed = embed_texts(["one", "two", "ice hockey"], config)
        assert [v.values for v in original] == [v.values for v in replayed]

    def test_models_do_not_cross_contaminate(self, tmp_path, stub_server):
        stub_server.responses.append((200, {"model": "other", "dim": 1, "embeddings": [[9.0]]}))
        hash_config = EmbedderConfig(cache_dir=tmp_path)
        http_config = EmbedderConfig(
            backend="http", model_id="other", endpoint_url=stub_server.url, cache_dir=tmp_path
        )
        [hash_vec] = embed_texts(["term"], hash_config)
        [http_vec] = embed_texts(["term"], http_config)
        assert hash_vec.model_id != http_vec.model_id
        assert hash_vec.values != http_vec.values
        assert embed_texts(["term"], hash_config)[0].values == hash_vec.values
