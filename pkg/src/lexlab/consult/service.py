"""Consultation sessions: retrieve, compose, generate, audit, persist.

Sessions are append-only; one consult is in flight per session at a time
while separate sessions proceed in parallel. The clock and session-id
factory are injectable so a scripted session with a mock backend replays
byte-identically.
"""

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

from ..audit import AuditReport, audit_response
from ..corpus import Article, ArticleIndex, CitationKey
from ..errors import LexlabError
from ..gateway import Backend, ChatRequest
from ..retrieval import LexicalIndex, RetrievalResult, retrieve
from .prompting import (
    DEFAULT_PROMPT_CONFIG,
    ConsultPromptConfig,
    HistoryTurn,
    compose_inference_prompt,
)

DEFAULT_TOP_K = 3


def _key_json(key: CitationKey) -> dict:
    return {"title": key.law_title, "article": key.article_no, "paragraph": key.paragraph_no}


@dataclass
class ConsultTurn:
    user_message: str
    retrieved: RetrievalResult
    included_keys: tuple[CitationKey, ...]
    prompt: str
    answer: str
    audit: AuditReport
    timing: float
    failed: bool = False
    error: str = ""

    def to_json(self) -> dict:
        return {
            "user_message": self.user_message,
            "retrieved": [
                {**_key_json(key), "score": score} for key, score in self.retrieved.ranked
            ],
            "included": [_key_json(key) for key in self.included_keys],
            "prompt": self.prompt,
            "answer": self.answer,
            "audit": self.audit.to_json(),
            "timing": self.timing,
            "failed": self.failed,
            "error": self.error,
        }


@dataclass
class ConsultSession:
    session_id: str
    created_at: float
    config: dict
    turns: list[ConsultTurn] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "config": self.config,
            "turns": [turn.to_json() for turn in self.turns],
        }


class SessionStore(Protocol):
    def create(self, session: ConsultSession) -> None: ...

    def append_turn(self, session: ConsultSession, turn: ConsultTurn) -> None: ...


class InMemorySessionStore:
    def create(self, session: ConsultSession) -> None:
        pass

    def append_turn(self, session: ConsultSession, turn: ConsultTurn) -> None:
        pass


class JsonlSessionStore:
    """One append-only JSONL file per session under a data directory."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id: str) -> Path:
        return self.data_dir / f"{session_id}.jsonl"

    def create(self, session: ConsultSession) -> None:
        header = {
            "record": "session",
            "session_id": session.session_id,
            "created_at": session.created_at,
            "config": session.config,
        }
        with open(self._path(session.session_id), "w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")

    def append_turn(self, session: ConsultSession, turn: ConsultTurn) -> None:
        record = {"record": "turn", **turn.to_json()}
        with open(self._path(session.session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


class ConsultService:
    """The inference loop behind both the CLI and the HTTP API."""

    def __init__(
        self,
        article_index: ArticleIndex,
        lexical_index: LexicalIndex,
        backend: Backend,
        k: int = DEFAULT_TOP_K,
        sim_threshold: float = 0.35,
        prompt_config: ConsultPromptConfig = DEFAULT_PROMPT_CONFIG,
        store: SessionStore | None = None,
        clock: Callable[[], float] = time.time,
        id_factory: Callable[[], str] | None = None,
    ):
        self.article_index = article_index
        self.lexical_index = lexical_index
        self.backend = backend
        self.k = k
        self.sim_threshold = sim_threshold
        self.prompt_config = prompt_config
        self.store = store or InMemorySessionStore()
        self.clock = clock
        self.id_factory = id_factory or (lambda: uuid.uuid4().hex[:12])
        self._sessions: dict[str, ConsultSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create_session(self) -> ConsultSession:
        session = ConsultSession(
            session_id=self.id_factory(),
            created_at=self.clock(),
            config={
                "k": self.k,
                "sim_threshold": self.sim_threshold,
                "backend": type(self.backend).__name__,
            },
        )
        with self._registry_lock:
            if session.session_id in self._sessions:
                raise LexlabError(f"session id collision: {session.session_id}")
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        self.store.create(session)
        return session

    def get_session(self, session_id: str) -> ConsultSession | None:
        return self._sessions.get(session_id)

    def _articles_for(self, keys: Sequence[CitationKey]) -> list[Article]:
        articles = []
        for key in keys:
            article = self.article_index.lookup(key)
            if article is not None:
                articles.append(article)
        return articles

    def _history(self, session: ConsultSession) -> list[HistoryTurn]:
        return [
            HistoryTurn(turn.user_message, turn.answer)
            for turn in session.turns
            if not turn.failed
        ]

    def consult(
        self,
        session_id: str,
        user_message: str,
        k: int | None = None,
        included_keys: Sequence[CitationKey] | None = None,
    ) -> ConsultTurn:
        """Run one turn: retrieve, restrict to included keys, prompt, chat,
        audit, append.

        Retrieval, generation and audit failures come back as a turn marked
        failed (and still appended); an included key outside the retrieved
        set is a caller error and raises.
        """
        session = self._sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        lock = self._locks[session_id]
        with lock:
            start = self.clock()
            top_k = k if k is not None else self.k
            retrieved = RetrievalResult(query=user_message, ranked=[])
            included: tuple[CitationKey, ...] = ()
            prompt = ""
            answer = ""
            audit = AuditReport.from_findings([])
            failed = False
            error = ""
            try:
                retrieved = retrieve(self.lexical_index, user_message, top_k)
                retrieved_keys = retrieved.keys()
                if included_keys is None:
                    included = tuple(retrieved_keys)
                else:
                    included = tuple(included_keys)
                    extra = set(included) - set(retrieved_keys)
                    if extra:
                        raise ValueError(
                            f"included_keys not in retrieved set: {sorted(extra)[0]}"
                        )
                articles = self._articles_for(included)
                prompt = compose_inference_prompt(
                    user_message, articles, self._history(session), self.prompt_config
                )
                answer = self.backend.chat(ChatRequest.user(prompt))
                audit = audit_response(answer, self.article_index, self.sim_threshold)
            except ValueError:
                raise
            except LexlabError as exc:
                failed = True
                error = f"{type(exc).__name__}: {exc}"
            turn = ConsultTurn(
                user_message=user_message,
                retrieved=retrieved,
                included_keys=included,
                prompt=prompt,
                answer=answer,
                audit=audit,
                timing=self.clock() - start,
                failed=failed,
                error=error,
            )
            session.turns.append(turn)
            self.store.append_turn(session, turn)
            return turn


@dataclass
class BatchResponse:
    question_id: str
    question: str
    condition: str  # "r0" or "r1"
    prompt: str
    answer: str
    audit: AuditReport
    failed: bool = False
    error: str = ""

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "question": self.question,
            "condition": self.condition,
            "prompt": self.prompt,
            "answer": self.answer,
            "audit": self.audit.to_json(),
            "failed": self.failed,
            "error": self.error,
        }


def run_condition_batch(
    questions: Sequence[str],
    with_retrieval: bool,
    backend: Backend,
    article_index: ArticleIndex,
    lexical_index: LexicalIndex | None = None,
    k: int = DEFAULT_TOP_K,
    sim_threshold: float = 0.35,
    prompt_config: ConsultPromptConfig = DEFAULT_PROMPT_CONFIG,
) -> list[BatchResponse]:
    """Generate the no-reference or with-reference response for every question.

    Question ids are positional, so the two conditions pair up response ids
    deterministically. Per-question failures are recorded and the batch
    continues.
    """
    if not questions:
        raise ValueError("questions must be non-empty")
    if with_retrieval and lexical_index is None:
        raise ValueError("with_retrieval=True requires a lexical index")
    condition = "r1" if with_retrieval else "r0"
    responses = []
    for i, question in enumerate(questions):
        question_id = f"q{i:04d}-{condition}"
        prompt = ""
        answer = ""
        audit = AuditReport.from_findings([])
        failed = False
        error = ""
        try:
            articles: list[Article] = []
            if with_retrieval:
                result = retrieve(lexical_index, question, k)
                articles = [
                    a
                    for a in (article_index.lookup(key) for key in result.keys())
                    if a is not None
                ]
            prompt = compose_inference_prompt(question, articles, (), prompt_config)
            answer = backend.chat(ChatRequest.user(prompt))
            audit = audit_response(answer, article_index, sim_threshold)
        except LexlabError as exc:
            failed = True
            error = f"{type(exc).__name__}: {exc}"
        responses.append(
            BatchResponse(
                question_id=question_id,
                question=question,
                condition=condition,
                prompt=prompt,
                answer=answer,
                audit=audit,
                failed=failed,
                error=error,
            )
        )
    return responses
