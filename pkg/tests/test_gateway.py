import json

import httpx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from promptgauge.errors import EmptyInput, NetworkFailure, ReplayMiss, UnsupportedCapability
from promptgauge.gateway import (
    Gateway,
    GenerationRequest,
    HTTPBackend,
    ResponseCache,
    ScriptedBackend,
    cache_key,
    tokenize_keep_whitespace,
)
from promptgauge.gateway.recording import ensure_meta, prime_generation, prime_logprobs, prime_embedding


def req(text="hello", **kwargs):
    defaults = dict(context_messages=(("user", text),), temperature=0.7, n_samples=1)
    defaults.update(kwargs)
    return GenerationRequest(**defaults)


class TestRequestValidation:
    def test_rejects_empty_messages(self):
        with pytest.raises(ValueError):
            GenerationRequest(context_messages=())

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            req(n_samples=0)

    def test_rejects_negative_temperature(self):
        with pytest.raises(ValueError):
            req(temperature=-0.1)


class TestCache:
    def test_round_trip(self, tmp_path):
        cache = ResponseCache(tmp_path)
        cache.store("abc", {"text": "x", "n": [1, 2]})
        assert cache.load("abc") == {"text": "x", "n": [1, 2]}

    @given(st.dictionaries(st.sampled_from("abcdef"), st.integers(), min_size=1, max_size=5))
    @settings(max_examples=50, deadline=None)
    def test_key_stable_under_field_reordering(self, payload):
        reordered = dict(reversed(list(payload.items())))
        assert cache_key("b", "generate", payload) == cache_key("b", "generate", reordered)

    def test_key_distinguishes_sample_index(self):
        assert cache_key("b", "generate", {"a": 1}, 0) != cache_key("b", "generate", {"a": 1}, 1)

    def test_read_only_rejects_writes(self, tmp_path):
        cache = ResponseCache(tmp_path, read_only=True)
        with pytest.raises(PermissionError):
            cache.store("k", {})


class TestReplay:
    def test_primed_single_sample_identity(self, tmp_path):
        store = ensure_meta(tmp_path, "scripted/sim-1", "emb")
        request = req("what is the answer", temperature=0.0)
        prime_generation(store, "scripted/sim-1", request, ["42"])
        gateway = Gateway.replay(tmp_path)
        result = gateway.generate(request)
        assert [s.text for s in result.samples] == ["42"]
        assert result.cached is True

    def test_replay_deterministic_across_calls(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        request = req("q", n_samples=3)
        prime_generation(store, "b", request, ["r0", "r1", "r2"])
        gateway = Gateway.replay(tmp_path)
        first = gateway.generate(request)
        second = gateway.generate(request)
        assert [s.text for s in first.samples] == [s.text for s in second.samples]

    def test_miss_raises(self, tmp_path):
        ensure_meta(tmp_path, "b", "emb")
        gateway = Gateway.replay(tmp_path)
        with pytest.raises(ReplayMiss):
            gateway.generate(req("never recorded"))

    def test_primed_logprobs_identity(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        context = (("user", "ctx"),)
        prime_logprobs(store, "b", context, "abc", [("a", -0.1), ("b", -0.3), ("c", -0.2)])
        gateway = Gateway.replay(tmp_path)
        assert gateway.forced_logprobs(context, "abc") == [("a", -0.1), ("b", -0.3), ("c", -0.2)]

    def test_primed_embedding_dimension_and_isolation(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        prime_embedding(store, "b", "emb", "first", [1.0] * 8)
        prime_embedding(store, "b", "emb", "second", [2.0] * 8)
        gateway = Gateway.replay(tmp_path)
        first = gateway.embed("first")
        second = gateway.embed("second")
        assert first.dimension == 8
        assert np.allclose(first.values, 1.0)
        assert np.allclose(second.values, 2.0)

    def test_replay_performs_zero_network_calls(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        request = req("q", n_samples=2)
        prime_generation(store, "b", request, ["x", "y"])
        prime_embedding(store, "b", "emb", "t", [0.5, 0.5])
        gateway = Gateway.replay(tmp_path)
        gateway.generate(request)
        gateway.embed("t")
        assert gateway.counters.network_requests == 0


class TestScriptedThroughGateway:
    def test_sample_count_contract(self, uncached_gateway):
        result = uncached_gateway.generate(req("anything", n_samples=10))
        assert len(result.samples) == 10

    def test_cache_hit_on_second_generate(self, scripted_gateway):
        request = req("cache me", n_samples=4)
        first = scripted_gateway.generate(request)
        second = scripted_gateway.generate(request)
        assert first.cached is False
        assert second.cached is True
        assert [s.text for s in first.samples] == [s.text for s in second.samples]

    def test_embed_deterministic_and_cached(self, scripted_gateway):
        one = scripted_gateway.embed("abc")
        hits_before = scripted_gateway.counters.cache_hits
        two = scripted_gateway.embed("abc")
        assert np.array_equal(one.values, two.values)
        assert scripted_gateway.counters.cache_hits == hits_before + 1

    def test_embed_rejects_empty(self, scripted_gateway):
        with pytest.raises(EmptyInput):
            scripted_gateway.embed("")

    def test_logprobs_nonpositive_and_reconstruct(self, uncached_gateway):
        target = "two words  and\nmore"
        pairs = uncached_gateway.forced_logprobs((("user", "ctx"),), target)
        assert all(lp <= 0 for _, lp in pairs)
        assert "".join(t for t, _ in pairs) == target

    def test_certain_backend_gives_zero_nll(self, tmp_path):
        store = ensure_meta(tmp_path, "b", "emb")
        context = (("user", "c"),)
        prime_logprobs(store, "b", context, "ok", [("ok", 0.0)])
        gateway = Gateway.replay(tmp_path)
        assert gateway.forced_logprobs(context, "ok") == [("ok", 0.0)]

    def test_counters_track_call_kinds(self, scripted_gateway):
        scripted_gateway.generate(req("a"))
        scripted_gateway.forced_logprobs((("user", "c"),), "t")
        scripted_gateway.embed("e")
        counters = scripted_gateway.counters
        assert (counters.generate_calls, counters.logprob_calls, counters.embed_calls) == (1, 1, 1)


def _http_backend(handler, **kwargs) -> HTTPBackend:
    backend = HTTPBackend(
        base_url="https://api.test", model="m", scoring_model="m-score",
        backoff_start=0.0, **kwargs,
    )
    backend._client = httpx.Client(
        transport=httpx.MockTransport(handler), base_url="https://api.test"
    )
    return backend


class TestHTTPBackend:
    def test_chat_parsing_and_usage(self):
        def handler(request):
            payload = json.loads(request.content)
            assert payload["n"] == 2
            return httpx.Response(
                200,
                json={
                    "choices": [
                        {"message": {"content": "one"}},
                        {"message": {"content": "two"}},
                    ],
                    "usage": {"prompt_tokens": 5, "completion_tokens": 7},
                },
            )

        backend = _http_backend(handler)
        response = backend.generate(req("hi", n_samples=2), [0, 1])
        assert [s.text for s in response.samples] == ["one", "two"]
        assert response.usage.prompt_tokens == 5
        assert response.usage.estimated is False

    def test_retries_then_failure(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(500, text="boom")

        backend = _http_backend(handler)
        with pytest.raises(NetworkFailure):
            backend.generate(req("hi"), [0])
        assert calls["n"] == 3  # bounded retries

    def test_retry_recovers_on_second_attempt(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(429, text="slow down")
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        backend = _http_backend(handler)
        response = backend.generate(req("hi"), [0])
        assert response.samples[0].text == "ok"
        assert calls["n"] == 2

    def test_scoring_extracts_target_suffix(self):
        def handler(request):
            payload = json.loads(request.content)
            assert payload["echo"] is True
            prompt = payload["prompt"]
            cut = prompt.index("yes")
            return httpx.Response(
                200,
                json={
                    "choices": [
                        {
                            "logprobs": {
                                "tokens": [prompt[:cut], "yes"],
                                "token_logprobs": [None, -0.25],
                                "text_offset": [0, cut],
                            }
                        }
                    ]
                },
            )

        backend = _http_backend(handler)
        pairs = backend.forced_logprobs((("user", "q"),), "yes")
        assert pairs == [("yes", -0.25)]

    def test_scoring_unsupported_without_scoring_model(self):
        backend = HTTPBackend(base_url="https://api.test", model="m", backoff_start=0.0)
        with pytest.raises(UnsupportedCapability):
            backend.forced_logprobs((("user", "q"),), "yes")

    def test_embedding_parsing(self):
        def handler(request):
            return httpx.Response(200, json={"data": [{"embedding": [0.1, 0.2]}]})

        backend = _http_backend(handler)
        assert np.allclose(backend.embed("t"), [0.1, 0.2])


def test_tokenizer_reconstruction_property():
    for text in ("a b", " leading", "trailing ", "inner\n\nnewlines", "x"):
        assert "".join(tokenize_keep_whitespace(text)) == text
