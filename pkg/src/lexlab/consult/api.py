"""HTTP API over the consultation service, the audit and the ranking
workbench. The console (a static bundle) is served from /console when a
build is present."""

import random
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..audit import audit_response
from ..corpus import CitationKey
from ..errors import EmptyQuery, MalformedBallot, NoData
from ..humaneval import BallotStore, HumanRankRecord
from ..retrieval import retrieve
from .service import ConsultService


class KeyModel(BaseModel):
    title: str
    article: int | None = None
    paragraph: int | None = None

    def to_key(self) -> CitationKey:
        return CitationKey(self.title, self.article, self.paragraph)


class TurnRequest(BaseModel):
    message: str
    k: int | None = Field(default=None, ge=1)
    included_keys: list[KeyModel] | None = None


class RetrieveRequest(BaseModel):
    query: str
    k: int = Field(default=3, ge=1)


class AuditRequest(BaseModel):
    text: str


class RankEntry(BaseModel):
    system_id: str | None = None
    token: str | None = None
    rank: int = Field(ge=1)


class RankingRequest(BaseModel):
    question_id: str
    entries: list[RankEntry] = Field(default_factory=list)
    draw: bool = False


class BallotTask:
    """One blind-ranking task: responses shuffled and keyed by opaque tokens
    so the console never sees system identities before submission."""

    def __init__(self, question_id: str, question: str, responses: dict[str, str], seed: int):
        self.question_id = question_id
        self.question = question
        systems = sorted(responses)
        random.Random(seed).shuffle(systems)
        self.token_to_system = {f"resp-{i + 1}": system for i, system in enumerate(systems)}
        self.responses = {token: responses[system] for token, system in self.token_to_system.items()}

    def to_json(self) -> dict:
        return {
            "question_id": self.question_id,
            "question": self.question,
            "responses": [
                {"token": token, "text": text} for token, text in sorted(self.responses.items())
            ],
        }


def create_app(
    service: ConsultService,
    ballots: BallotStore | None = None,
    systems: Sequence[str] | None = None,
    ballot_tasks: Sequence[BallotTask] = (),
    console_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="lexlab consultation service")
    ballots = ballots if ballots is not None else BallotStore()
    tasks = {task.question_id: task for task in ballot_tasks}
    system_list = list(systems) if systems else sorted(
        {system for task in ballot_tasks for system in task.token_to_system.values()}
    )

    @app.post("/api/sessions", status_code=201)
    def create_session():
        session = service.create_session()
        return {"session_id": session.session_id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str):
        session = service.get_session(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session.to_json()

    @app.post("/api/sessions/{session_id}/turns")
    def post_turn(session_id: str, body: TurnRequest):
        included = (
            [k.to_key() for k in body.included_keys] if body.included_keys is not None else None
        )
        try:
            turn = service.consult(session_id, body.message, k=body.k, included_keys=included)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return turn.to_json()

    @app.post("/api/retrieve")
    def post_retrieve(body: RetrieveRequest):
        try:
            result = retrieve(service.lexical_index, body.query, body.k)
        except EmptyQuery as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "query": result.query,
            "ranked": [
                {
                    "title": key.law_title,
                    "article": key.article_no,
                    "paragraph": key.paragraph_no,
                    "score": score,
                }
                for key, score in result.ranked
            ],
        }

    @app.post("/api/audit")
    def post_audit(body: AuditRequest):
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="text is empty")
        return audit_response(body.text, service.article_index, service.sim_threshold).to_json()

    @app.get("/api/rankings/tasks")
    def get_ballot_tasks():
        return {"tasks": [task.to_json() for task in tasks.values()]}

    @app.post("/api/rankings", status_code=201)
    def post_ranking(body: RankingRequest):
        entries = []
        for entry in body.entries:
            system_id = entry.system_id
            if system_id is None:
                task = tasks.get(body.question_id)
                if task is None or entry.token not in task.token_to_system:
                    raise HTTPException(status_code=400, detail=f"unknown token {entry.token!r}")
                system_id = task.token_to_system[entry.token]
            entries.append((system_id, entry.rank))
        record = HumanRankRecord(
            question_id=body.question_id, entries=tuple(entries), draw=body.draw
        )
        try:
            _validate_ballot(record, system_list)
        except MalformedBallot as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        ballots.add(record)
        return {"accepted": True, "n_records": len(ballots.records)}

    @app.get("/api/rankings/summary")
    def rankings_summary():
        systems = system_list or sorted(
            {system for record in ballots.records for system, _ in record.entries}
        )
        try:
            return ballots.summary(systems).to_json()
        except NoData:
            return {"systems": systems, "proportions": {}, "draw": 0.0, "n_records": 0}
        except MalformedBallot as exc:
            raise HTTPException(status_code=409, detail=str(exc))

    if console_dir and Path(console_dir).is_dir():
        app.mount("/console", StaticFiles(directory=str(console_dir), html=True), name="console")

    return app


def _validate_ballot(record: HumanRankRecord, systems: Sequence[str]) -> None:
    if record.draw:
        if record.entries:
            raise MalformedBallot(record.question_id, "draw ballots must not carry ranks")
        return
    if not record.entries:
        raise MalformedBallot(record.question_id, "ballot has no entries")
    ranked = sorted(r for _, r in record.entries)
    if ranked != list(range(1, len(record.entries) + 1)):
        raise MalformedBallot(record.question_id, f"ranks {ranked} are not a permutation")
    if systems and sorted(s for s, _ in record.entries) != sorted(systems):
        raise MalformedBallot(record.question_id, "ballot systems do not match")
