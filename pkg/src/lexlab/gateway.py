"""Uniform access to chat and continuation-scoring model services.

Two capabilities exist: `chat` (completion for a message list) and `score`
(summed log-likelihood of a forced continuation, natural log). HTTP backends
retry transient failures with exponential backoff and attach idempotency
keys; the mock backend answers from a digest-keyed table so every test runs
offline and bit-deterministically. Secrets come from environment variables
only.

Wire format (frozen by golden files, see docs/api.md):
  POST {base}/chat  {"model", "messages": [{"role", "content"}...],
                     "temperature", "max_tokens"}       -> {"text"}
  POST {base}/score {"model", "prompt", "continuation"} -> {"logprob_sum",
                                                            "token_count"}
"""

import hashlib
import json
import os
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Literal, Mapping, Sequence

import httpx

from .errors import AuthError, BackendUnavailable, CapabilityError, MockMiss

ENV_BASE_URL = "LEXLAB_LLM_BASE_URL"
ENV_API_KEY = "LEXLAB_LLM_API_KEY"
ENV_MODEL = "LEXLAB_LLM_MODEL"
ENV_SCORE_BASE_URL = "LEXLAB_SCORE_BASE_URL"

Role = Literal["system", "user", "assistant"]


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str


@dataclass(frozen=True)
class ChatRequest:
    """Ordered chat messages plus sampling parameters.

    The last message must come from the user and no content may be empty.
    """

    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "messages", tuple(self.messages))
        if not self.messages:
            raise ValueError("chat request needs at least one message")
        if self.messages[-1].role != "user":
            raise ValueError("last chat message must have role=user")
        if any(not m.content for m in self.messages):
            raise ValueError("chat message contents must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def user(cls, content: str, system: str | None = None, **params) -> "ChatRequest":
        messages = []
        if system:
            messages.append(ChatMessage("system", system))
        messages.append(ChatMessage("user", content))
        return cls(messages=tuple(messages), **params)


@dataclass(frozen=True)
class ScoreResult:
    """Natural-log likelihood of a continuation and its token count."""

    logprob_sum: float
    token_count: int

    def __post_init__(self):
        if self.token_count < 1:
            raise ValueError("token_count must be >= 1")


@dataclass(frozen=True)
class RetryConfig:
    max_attempts: int = 3
    backoff: float = 0.5  # seconds; doubles each retry


@dataclass(frozen=True)
class BackendConfig:
    """Where and how to reach a model service.

    kind=MOCK needs no endpoint or auth; HTTP kinds read the API key from
    the named environment variable at call time, never from config files.
    """

    kind: Literal["HTTP_CHAT", "HTTP_SCORE", "MOCK"]
    endpoint: str = ""
    model_name: str = ""
    api_key_env: str = ENV_API_KEY
    retry: RetryConfig = field(default_factory=RetryConfig)
    concurrency_limit: int = 4

    def __post_init__(self):
        if self.kind != "MOCK" and not self.endpoint:
            raise ValueError(f"{self.kind} backend requires an endpoint")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be positive")

    @classmethod
    def from_env(cls, kind: Literal["HTTP_CHAT", "HTTP_SCORE"], **overrides) -> "BackendConfig":
        env_var = ENV_SCORE_BASE_URL if kind == "HTTP_SCORE" else ENV_BASE_URL
        endpoint = os.environ.get(env_var) or os.environ.get(ENV_BASE_URL, "")
        return cls(
            kind=kind,
            endpoint=overrides.pop("endpoint", endpoint),
            model_name=overrides.pop("model_name", os.environ.get(ENV_MODEL, "")),
            **overrides,
        )


def _canonical(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def chat_digest(messages: Sequence[ChatMessage] | Sequence[tuple[str, str]]) -> str:
    """Stable digest of a normalized chat request (roles and contents only)."""
    normalized = [
        [m.role, m.content] if isinstance(m, ChatMessage) else [m[0], m[1]] for m in messages
    ]
    payload = _canonical({"kind": "chat", "messages": normalized})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def score_digest(prompt: str, continuation: str) -> str:
    """Stable digest of a normalized scoring request."""
    payload = _canonical({"kind": "score", "prompt": prompt, "continuation": continuation})
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class GatewayHooks:
    """Optional instrumentation; tests use these to observe retry and
    concurrency behavior."""

    on_attempt: Callable[[int], None] | None = None
    on_inflight: Callable[[int], None] | None = None


class _InflightWindow:
    """Bounded in-flight window enforcing the backend's concurrency limit."""

    def __init__(self, limit: int, hooks: GatewayHooks | None):
        self._semaphore = threading.BoundedSemaphore(limit)
        self._lock = threading.Lock()
        self._hooks = hooks
        self.current = 0
        self.high_watermark = 0

    @contextmanager
    def slot(self):
        with self._semaphore:
            with self._lock:
                self.current += 1
                self.high_watermark = max(self.high_watermark, self.current)
                if self._hooks and self._hooks.on_inflight:
                    self._hooks.on_inflight(self.current)
            try:
                yield
            finally:
                with self._lock:
                    self.current -= 1
                    if self._hooks and self._hooks.on_inflight:
                        self._hooks.on_inflight(self.current)


class Backend:
    """Common capability checks and the bounded in-flight window."""

    capabilities: frozenset[str] = frozenset()

    def __init__(self, concurrency_limit: int = 4, hooks: GatewayHooks | None = None):
        self.hooks = hooks
        self.window = _InflightWindow(concurrency_limit, hooks)

    def chat(self, request: ChatRequest) -> str:
        if "chat" not in self.capabilities:
            raise CapabilityError("backend does not support chat")
        with self.window.slot():
            return self._chat(request)

    def score_continuation(self, prompt: str, continuation: str) -> ScoreResult:
        if "score" not in self.capabilities:
            raise CapabilityError("backend does not support continuation scoring")
        if not continuation:
            raise ValueError("continuation must be non-empty")
        with self.window.slot():
            return self._score(prompt, continuation)

    def _chat(self, request: ChatRequest) -> str:
        raise NotImplementedError

    def _score(self, prompt: str, continuation: str) -> ScoreResult:
        raise NotImplementedError


@dataclass(frozen=True)
class MockPolicy:
    """What a mock does on a table miss: raise, echo, or answer constantly.

    Constant scoring assigns per_token_logprob to each whitespace token of
    the continuation (minimum one token) — that is the mock's documented
    token counting rule.
    """

    kind: Literal["error", "echo", "constant"] = "error"
    text: str = ""
    per_token_logprob: float = -1.0

    @classmethod
    def error(cls) -> "MockPolicy":
        return cls("error")

    @classmethod
    def echo(cls) -> "MockPolicy":
        return cls("echo")

    @classmethod
    def constant(cls, text: str = "", per_token_logprob: float = -1.0) -> "MockPolicy":
        return cls("constant", text=text, per_token_logprob=per_token_logprob)


def mock_token_count(text: str) -> int:
    """The mock's tokenizer: whitespace splitting, at least one token."""
    return max(1, len(text.split()))


class MockBackend(Backend):
    """Table-driven deterministic backend for offline runs and tests.

    Chat entries map chat_digest(messages) to completion text; score
    entries map score_digest(prompt, continuation) to a ScoreResult.
    """

    capabilities = frozenset({"chat", "score"})

    def __init__(
        self,
        table: Mapping[str, object] | None = None,
        default_policy: MockPolicy | None = None,
        capabilities: frozenset[str] | set[str] | None = None,
        concurrency_limit: int = 8,
        latency: float = 0.0,
        hooks: GatewayHooks | None = None,
    ):
        super().__init__(concurrency_limit, hooks)
        self.table = dict(table or {})
        self.default_policy = default_policy or MockPolicy.error()
        if capabilities is not None:
            self.capabilities = frozenset(capabilities)
        self.latency = latency
        self.calls: list[str] = []
        self._calls_lock = threading.Lock()

    def _record(self, digest: str):
        with self._calls_lock:
            self.calls.append(digest)
        if self.latency:
            time.sleep(self.latency)

    def _chat(self, request: ChatRequest) -> str:
        digest = chat_digest(request.messages)
        self._record(digest)
        if digest in self.table:
            return str(self.table[digest])
        policy = self.default_policy
        if policy.kind == "echo":
            return request.messages[-1].content
        if policy.kind == "constant":
            return policy.text
        raise MockMiss(f"no mock chat entry for digest {digest[:12]}…")

    def _score(self, prompt: str, continuation: str) -> ScoreResult:
        digest = score_digest(prompt, continuation)
        self._record(digest)
        if digest in self.table:
            entry = self.table[digest]
            if isinstance(entry, ScoreResult):
                return entry
            logprob_sum, token_count = entry
            return ScoreResult(float(logprob_sum), int(token_count))
        policy = self.default_policy
        if policy.kind in ("constant", "echo"):
            n = mock_token_count(continuation)
            return ScoreResult(policy.per_token_logprob * n, n)
        raise MockMiss(f"no mock score entry for digest {digest[:12]}…")


def register_mock(
    table: Mapping[str, object],
    default_policy: MockPolicy | None = None,
    **kwargs,
) -> MockBackend:
    """Create a mock backend answering from a digest-keyed table."""
    return MockBackend(table=table, default_policy=default_policy, **kwargs)


class HttpBackend(Backend):
    """JSON-over-HTTP backend with retries and idempotency keys.

    Transient failures (transport errors, 429, 5xx) are retried up to the
    configured attempts with exponential backoff; authentication failures
    raise immediately and are never retried. The request body never changes
    across retries and carries the same idempotency key.
    """

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        hooks: GatewayHooks | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(config.concurrency_limit, hooks)
        if config.kind == "HTTP_CHAT":
            self.capabilities = frozenset({"chat"})
        elif config.kind == "HTTP_SCORE":
            self.capabilities = frozenset({"score"})
        else:
            raise ValueError(f"HttpBackend cannot serve kind={config.kind}")
        self.config = config
        self._client = client or httpx.Client(timeout=60.0)
        self._sleep = sleep

    def _headers(self, idempotency_key: str) -> dict[str, str]:
        headers = {"Content-Type": "application/json", "X-Idempotency-Key": idempotency_key}
        api_key = os.environ.get(self.config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def _post(self, path: str, body: dict, idempotency_key: str) -> dict:
        url = self.config.endpoint.rstrip("/") + path
        retry = self.config.retry
        last_error: Exception | None = None
        for attempt in range(1, retry.max_attempts + 1):
            if self.hooks and self.hooks.on_attempt:
                self.hooks.on_attempt(attempt)
            try:
                response = self._client.post(
                    url, json=body, headers=self._headers(idempotency_key)
                )
            except httpx.HTTPError as exc:
                last_error = exc
            else:
                if response.status_code in (401, 403):
                    raise AuthError(f"authentication rejected ({response.status_code})")
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = BackendUnavailable(
                        f"HTTP {response.status_code}: {response.text[:200]}"
                    )
                elif response.status_code >= 400:
                    raise BackendUnavailable(
                        f"HTTP {response.status_code}: {response.text[:200]}"
                    )
                else:
                    return response.json()
            if attempt < retry.max_attempts and retry.backoff > 0:
                self._sleep(retry.backoff * (2 ** (attempt - 1)))
        raise BackendUnavailable(
            f"{url} still failing after {retry.max_attempts} attempts: {last_error}"
        )

    def _chat(self, request: ChatRequest) -> str:
        body = {
            "model": self.config.model_name,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        data = self._post("/chat", body, chat_digest(request.messages))
        return data["text"]

    def _score(self, prompt: str, continuation: str) -> ScoreResult:
        body = {
            "model": self.config.model_name,
            "prompt": prompt,
            "continuation": continuation,
        }
        data = self._post("/score", body, score_digest(prompt, continuation))
        return ScoreResult(float(data["logprob_sum"]), int(data["token_count"]))


def build_backend(
    config: BackendConfig,
    table: Mapping[str, object] | None = None,
    client: httpx.Client | None = None,
    hooks: GatewayHooks | None = None,
) -> Backend:
    """Instantiate the backend a config describes."""
    if config.kind == "MOCK":
        return MockBackend(
            table=table, concurrency_limit=config.concurrency_limit, hooks=hooks
        )
    return HttpBackend(config, client=client, hooks=hooks)


def load_backend_config(path: str) -> BackendConfig:
    """Read a backend config JSON file ({kind, endpoint?, model?, retry?...})."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    retry = raw.get("retry", {})
    return BackendConfig(
        kind=raw["kind"],
        endpoint=raw.get("endpoint", ""),
        model_name=raw.get("model", raw.get("model_name", "")),
        api_key_env=raw.get("api_key_env", ENV_API_KEY),
        retry=RetryConfig(
            max_attempts=int(retry.get("max_attempts", 3)),
            backoff=float(retry.get("backoff", 0.5)),
        ),
        concurrency_limit=int(raw.get("concurrency_limit", 4)),
    )
