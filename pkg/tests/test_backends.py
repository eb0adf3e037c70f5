import json
import math

import httpx
import pytest

from lrlkit.backends import (
    HttpBackend,
    MockBackend,
    backend_from_url,
    create_mock_app,
)
from lrlkit.errors import BackendError

from helpers import SyncASGITransport


def http_over_asgi(backend=None, **kwargs):
    app = create_mock_app(backend or MockBackend())
    transport = SyncASGITransport(app)
    return HttpBackend(
        "http://testserver", model="mock-model",
        transport=transport, retry_sleeps=(0, 0, 0), **kwargs,
    )


class TestMockBackend:
    def test_echo_returns_final_text_block(self):
        backend = MockBackend()
        prompt = "Some header. Text: sports ߞߊ ߙߏ. Topic option is:"
        assert backend.generate(prompt, max_tokens=16) == "sports ߞߊ ߙߏ"

    def test_echo_respects_max_tokens(self):
        backend = MockBackend()
        prompt = "Text: one two three four five. Topic option is:"
        assert backend.generate(prompt, max_tokens=2) == "one two"

    def test_constant_mode(self):
        backend = MockBackend(mode="constant", constant_text="I cannot determine")
        assert backend.generate("anything", max_tokens=4) == "I cannot determine"

    def test_scoring_is_per_byte_and_deterministic(self):
        backend = MockBackend(ascii_cost=0.25, other_cost=1.0)
        result = backend.score("ab")
        assert result.nll == pytest.approx(0.5)
        assert result.token_logprobs == (-0.25, -0.25)
        # NKo letters are 2-byte UTF-8.
        assert backend.score("ߞ").nll == pytest.approx(2.0)
        assert backend.score("ߞ").nll == backend.score("ߞ").nll

    def test_score_overrides(self):
        backend = MockBackend(score_overrides={"special": 42.0})
        assert backend.score("special").nll == 42.0

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            MockBackend(mode="chaos")


class TestBackendFromUrl:
    def test_mock_echo(self):
        backend = backend_from_url("mock://echo")
        assert isinstance(backend, MockBackend)
        assert backend.mode == "echo"

    def test_mock_constant_with_text(self):
        backend = backend_from_url("mock://constant?text=sports")
        assert backend.mode == "constant"
        assert backend.constant_text == "sports"

    def test_mock_score_costs(self):
        backend = backend_from_url("mock://echo?ascii_cost=0.5&other_cost=2.0")
        assert backend.score("a").nll == pytest.approx(0.5)

    def test_http_url(self):
        backend = backend_from_url("http://example.test:8000", model="m")
        assert isinstance(backend, HttpBackend)
        assert backend.base_url == "http://example.test:8000/v1"

    def test_base_url_with_v1_not_duplicated(self):
        backend = HttpBackend("http://example.test/v1/", model="m")
        assert backend.base_url == "http://example.test/v1"

    def test_unsupported_scheme(self):
        with pytest.raises(BackendError, match="scheme"):
            backend_from_url("ftp://example.test")


class TestHttpBackendWireFormat:
    def test_generate_round_trip_matches_in_process(self):
        inner = MockBackend()
        over_http = http_over_asgi(inner)
        prompt = "Header. Text: travel ߡߌ ߘߐ. Topic option is:"
        assert over_http.generate(prompt, max_tokens=16) == inner.generate(prompt, max_tokens=16)

    def test_score_round_trip_matches_in_process(self):
        inner = MockBackend()
        over_http = http_over_asgi(inner)
        text = "mixed ascii and ߞߊ"
        via_http = over_http.score(text)
        direct = inner.score(text)
        assert via_http.nll == pytest.approx(direct.nll, abs=1e-9)
        assert via_http.token_logprobs == direct.token_logprobs

    def test_leading_null_logprob_skipped(self):
        # The scoring endpoint emits a null for the BOS position, as real
        # completion APIs do; the client must drop it.
        over_http = http_over_asgi(MockBackend())
        result = over_http.score("ab")
        assert result.token_logprobs == (-0.25, -0.25)

    def test_completions_generate_api(self):
        over_http = http_over_asgi(MockBackend(mode="constant", constant_text="sports"))
        over_http.generate_api = "completions"
        assert over_http.generate("Text: x. Topic option is:", max_tokens=4) == "sports"

    def test_non_greedy_rejected_client_side(self):
        over_http = http_over_asgi()
        with pytest.raises(BackendError, match="greedy"):
            over_http.generate("x", max_tokens=4, greedy=False)

    def test_http_error_includes_request_id(self):
        def handler(request):
            return httpx.Response(404, text="not found")

        backend = HttpBackend(
            "http://dead.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        with pytest.raises(BackendError, match="request_id="):
            backend.generate("x", max_tokens=4)


class TestRetries:
    def test_recovers_from_transient_transport_errors(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] <= 2:
                raise httpx.ConnectError("refused", request=request)
            payload = {"choices": [{"message": {"role": "assistant", "content": "ok"}}]}
            return httpx.Response(200, json=payload)

        backend = HttpBackend(
            "http://flaky.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        assert backend.generate("x", max_tokens=4) == "ok"
        assert calls["n"] == 3

    def test_recovers_from_500(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(503, text="busy")
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        backend = HttpBackend(
            "http://busy.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        assert backend.generate("x", max_tokens=4) == "ok"

    def test_exhausted_retries_raise_unreachable(self):
        def handler(request):
            raise httpx.ConnectError("refused", request=request)

        backend = HttpBackend(
            "http://down.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        with pytest.raises(BackendError, match="unreachable"):
            backend.generate("x", max_tokens=4)

    def test_client_errors_never_retried(self):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            return httpx.Response(400, text="bad request")

        backend = HttpBackend(
            "http://picky.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        with pytest.raises(BackendError, match="rejected"):
            backend.generate("x", max_tokens=4)
        assert calls["n"] == 1


class TestRequestPayloads:
    def test_chat_payload_shape(self):
        seen = {}

        def handler(request):
            seen.update(json.loads(request.content))
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        backend = HttpBackend(
            "http://inspect.test", model="the-model",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        backend.generate("hello prompt", max_tokens=7)
        assert seen == {
            "model": "the-model",
            "messages": [{"role": "user", "content": "hello prompt"}],
            "max_tokens": 7,
            "temperature": 0,
        }

    def test_score_payload_shape(self):
        seen = {}

        def handler(request):
            seen.update(json.loads(request.content))
            return httpx.Response(
                200,
                json={"choices": [{"logprobs": {"token_logprobs": [None, -1.0, -2.0]}}]},
            )

        backend = HttpBackend(
            "http://inspect.test", model="the-model",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        result = backend.score("score me")
        assert seen == {
            "model": "the-model",
            "prompt": "score me",
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
            "temperature": 0,
        }
        assert result.nll == pytest.approx(3.0)
        assert result.token_logprobs == (-1.0, -2.0)

    def test_missing_logprobs_is_backend_error(self):
        def handler(request):
            return httpx.Response(200, json={"choices": [{"text": "no logprobs here"}]})

        backend = HttpBackend(
            "http://broken.test", model="m",
            transport=httpx.MockTransport(handler), retry_sleeps=(0, 0, 0),
        )
        with pytest.raises(BackendError, match="logprobs"):
            backend.score("x")
