import json
import threading
from pathlib import Path

import httpx
import pytest

from lexlab.errors import AuthError, BackendUnavailable, CapabilityError, MockMiss
from lexlab.gateway import (
    BackendConfig,
    ChatMessage,
    ChatRequest,
    GatewayHooks,
    HttpBackend,
    MockBackend,
    MockPolicy,
    RetryConfig,
    ScoreResult,
    build_backend,
    chat_digest,
    load_backend_config,
    mock_token_count,
    register_mock,
    score_digest,
)

GOLDEN = Path(__file__).parent / "golden"


def chat_request(text="什么是法定婚龄？"):
    return ChatRequest.user(text)


class TestChatRequestValidation:
    def test_last_message_must_be_user(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(ChatMessage("user", "hi"), ChatMessage("assistant", "yo")))

    def test_empty_content_rejected(self):
        with pytest.raises(ValueError):
            ChatRequest(messages=(ChatMessage("user", ""),))

    def test_score_result_token_count(self):
        with pytest.raises(ValueError):
            ScoreResult(-1.0, 0)


class TestDigests:
    def test_stable_across_calls(self):
        a = chat_digest([("user", "hello")])
        b = chat_digest([ChatMessage("user", "hello")])
        assert a == b
        assert len(a) == 64

    def test_params_do_not_change_digest(self):
        r1 = ChatRequest.user("hi", temperature=0.0)
        r2 = ChatRequest.user("hi", temperature=1.0)
        assert chat_digest(r1.messages) == chat_digest(r2.messages)

    def test_score_digest_depends_on_both_parts(self):
        assert score_digest("p", "c") != score_digest("p", "d")
        assert score_digest("p", "c") != score_digest("q", "c")


class TestMockBackend:
    def test_chat_table_lookup(self):
        request = chat_request()
        backend = register_mock({chat_digest(request.messages): "法定婚龄为男22周岁，女20周岁。"})
        assert backend.chat(request) == "法定婚龄为男22周岁，女20周岁。"

    def test_score_table_lookup(self):
        backend = register_mock({score_digest("p", "c"): (-4.0, 2)})
        assert backend.score_continuation("p", "c") == ScoreResult(-4.0, 2)

    def test_miss_with_error_policy(self):
        backend = register_mock({})
        with pytest.raises(MockMiss):
            backend.chat(chat_request())

    def test_echo_policy(self):
        backend = MockBackend(default_policy=MockPolicy.echo())
        assert backend.chat(chat_request("回声测试")) == "回声测试"

    def test_constant_per_token_scoring(self):
        backend = MockBackend(default_policy=MockPolicy.constant(per_token_logprob=-1.0))
        result = backend.score_continuation("prompt", "three token continuation")
        assert result == ScoreResult(-3.0, 3)
        assert mock_token_count("three token continuation") == 3

    def test_deterministic(self):
        backend = MockBackend(default_policy=MockPolicy.constant(per_token_logprob=-0.5))
        a = backend.score_continuation("p", "a b c d")
        b = backend.score_continuation("p", "a b c d")
        assert a == b

    def test_empty_continuation_rejected(self):
        backend = MockBackend(default_policy=MockPolicy.echo())
        with pytest.raises(ValueError):
            backend.score_continuation("p", "")

    def test_capability_restriction(self):
        backend = MockBackend(default_policy=MockPolicy.echo(), capabilities={"score"})
        with pytest.raises(CapabilityError):
            backend.chat(chat_request())


class TestConcurrencyWindow:
    def test_inflight_never_exceeds_limit(self):
        observed = []
        lock = threading.Lock()

        def on_inflight(n):
            with lock:
                observed.append(n)

        backend = MockBackend(
            default_policy=MockPolicy.echo(),
            concurrency_limit=3,
            latency=0.01,
            hooks=GatewayHooks(on_inflight=on_inflight),
        )
        threads = [
            threading.Thread(target=backend.chat, args=(chat_request(f"q{i}"),))
            for i in range(12)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert backend.window.high_watermark <= 3
        assert max(observed) <= 3
        assert len(backend.calls) == 12


def flaky_transport(failures: int, payload: dict, capture: list):
    state = {"count": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        capture.append(request)
        state["count"] += 1
        if state["count"] <= failures:
            return httpx.Response(503, text="temporarily down")
        return httpx.Response(200, json=payload)

    return httpx.MockTransport(handler)


def http_config(kind="HTTP_CHAT", max_attempts=3):
    return BackendConfig(
        kind=kind,
        endpoint="http://scorer.test/v1",
        model_name="test-model",
        retry=RetryConfig(max_attempts=max_attempts, backoff=0.0),
        concurrency_limit=2,
    )


class TestHttpBackend:
    def test_two_transient_failures_then_success(self):
        capture: list = []
        attempts: list[int] = []
        backend = HttpBackend(
            http_config(),
            client=httpx.Client(transport=flaky_transport(2, {"text": "ok"}, capture)),
            hooks=GatewayHooks(on_attempt=attempts.append),
        )
        assert backend.chat(chat_request()) == "ok"
        assert attempts == [1, 2, 3]

    def test_retries_exhausted(self):
        backend = HttpBackend(
            http_config(max_attempts=2),
            client=httpx.Client(transport=flaky_transport(5, {"text": "ok"}, [])),
        )
        with pytest.raises(BackendUnavailable):
            backend.chat(chat_request())

    def test_auth_error_never_retried(self):
        calls: list = []

        def handler(request):
            calls.append(request)
            return httpx.Response(401, text="bad key")

        backend = HttpBackend(
            http_config(), client=httpx.Client(transport=httpx.MockTransport(handler))
        )
        with pytest.raises(AuthError):
            backend.chat(chat_request())
        assert len(calls) == 1

    def test_retry_preserves_body_and_idempotency_key(self):
        capture: list = []
        backend = HttpBackend(
            http_config(),
            client=httpx.Client(transport=flaky_transport(2, {"text": "ok"}, capture)),
        )
        backend.chat(chat_request())
        bodies = [r.content for r in capture]
        keys = [r.headers["x-idempotency-key"] for r in capture]
        assert len(set(bodies)) == 1
        assert len(set(keys)) == 1

    def test_score_backend(self):
        def handler(request):
            return httpx.Response(200, json={"logprob_sum": -4.0, "token_count": 2})

        backend = HttpBackend(
            http_config(kind="HTTP_SCORE"),
            client=httpx.Client(transport=httpx.MockTransport(handler)),
        )
        assert backend.score_continuation("p", "c") == ScoreResult(-4.0, 2)
        with pytest.raises(CapabilityError):
            backend.chat(chat_request())

    def test_chat_backend_cannot_score(self):
        backend = HttpBackend(
            http_config(), client=httpx.Client(transport=flaky_transport(0, {"text": "x"}, []))
        )
        with pytest.raises(CapabilityError):
            backend.score_continuation("p", "c")


class TestWireFormatGolden:
    """The JSON field names on the wire are frozen; see docs/api.md."""

    def capture_body(self, kind, call):
        captured: list = []

        def handler(request):
            captured.append(json.loads(request.content.decode("utf-8")))
            payload = (
                {"text": "ok"} if kind == "HTTP_CHAT"
                else {"logprob_sum": -2.0, "token_count": 2}
            )
            return httpx.Response(200, json=payload)

        backend = HttpBackend(
            http_config(kind=kind), client=httpx.Client(transport=httpx.MockTransport(handler))
        )
        call(backend)
        return captured[0]

    def test_chat_request_fields(self):
        body = self.capture_body(
            "HTTP_CHAT",
            lambda b: b.chat(ChatRequest.user("问题", system="你是律师", temperature=0.2,
                                              max_tokens=256)),
        )
        golden = json.loads((GOLDEN / "wire_chat_request.json").read_text("utf-8"))
        assert body == golden

    def test_score_request_fields(self):
        body = self.capture_body(
            "HTTP_SCORE", lambda b: b.score_continuation("前文", "续写")
        )
        golden = json.loads((GOLDEN / "wire_score_request.json").read_text("utf-8"))
        assert body == golden


class TestConfig:
    def test_mock_requires_no_endpoint(self):
        config = BackendConfig(kind="MOCK")
        assert isinstance(build_backend(config), MockBackend)

    def test_http_requires_endpoint(self):
        with pytest.raises(ValueError):
            BackendConfig(kind="HTTP_CHAT")

    def test_env_config(self, monkeypatch):
        monkeypatch.setenv("LEXLAB_LLM_BASE_URL", "http://llm.test")
        monkeypatch.setenv("LEXLAB_LLM_MODEL", "m1")
        config = BackendConfig.from_env("HTTP_CHAT")
        assert config.endpoint == "http://llm.test"
        assert config.model_name == "m1"
        monkeypatch.setenv("LEXLAB_SCORE_BASE_URL", "http://scorer.test")
        assert BackendConfig.from_env("HTTP_SCORE").endpoint == "http://scorer.test"

    def test_load_backend_config(self, tmp_path):
        path = tmp_path / "backend.json"
        path.write_text(
            json.dumps(
                {
                    "kind": "HTTP_SCORE",
                    "endpoint": "http://scorer.test",
                    "model": "m2",
                    "retry": {"max_attempts": 5, "backoff": 0.1},
                    "concurrency_limit": 7,
                }
            )
        )
        config = load_backend_config(str(path))
        assert config.kind == "HTTP_SCORE"
        assert config.retry.max_attempts == 5
        assert config.concurrency_limit == 7
