import pytest
from fastapi.testclient import TestClient

from lexlab.consult.api import BallotTask, create_app
from lexlab.consult.service import ConsultService
from lexlab.gateway import MockBackend, MockPolicy
from lexlab.humaneval import BallotStore

from .conftest import TickingClock

SYSTEMS = ["expert", "q2ea", "qa2e"]
QUESTION = "我和对象想结婚，请问结婚年龄是多少岁？"


@pytest.fixture
def client(marriage_index, marriage_lexical):
    backend = MockBackend(default_policy=MockPolicy.constant(
        text="根据《民法典》第一千零四十七条规定，男不得早于二十二周岁。"
    ))
    service = ConsultService(
        marriage_index,
        marriage_lexical,
        backend,
        clock=TickingClock(),
        id_factory=iter(f"s{i:03d}" for i in range(100)).__next__,
    )
    tasks = [
        BallotTask(
            "hq1",
            "结婚年龄是多少？",
            {system: f"{system}的回答" for system in SYSTEMS},
            seed=7,
        )
    ]
    app = create_app(service, BallotStore(), systems=SYSTEMS, ballot_tasks=tasks)
    return TestClient(app)


class TestSessions:
    def test_create_and_fetch(self, client):
        created = client.post("/api/sessions")
        assert created.status_code == 201
        session_id = created.json()["session_id"]
        fetched = client.get(f"/api/sessions/{session_id}")
        assert fetched.status_code == 200
        assert fetched.json()["turns"] == []

    def test_unknown_session_404(self, client):
        assert client.get("/api/sessions/nope").status_code == 404
        assert (
            client.post("/api/sessions/nope/turns", json={"message": "hi"}).status_code == 404
        )

    def test_post_turn(self, client):
        session_id = client.post("/api/sessions").json()["session_id"]
        response = client.post(
            f"/api/sessions/{session_id}/turns", json={"message": QUESTION}
        )
        assert response.status_code == 200
        turn = response.json()
        assert len(turn["retrieved"]) == 3
        assert turn["included"] == [
            {"title": r["title"], "article": r["article"], "paragraph": r["paragraph"]}
            for r in turn["retrieved"]
        ]
        assert not turn["failed"]
        assert turn["audit"]["has_h1"] is False

    def test_post_turn_with_included_keys(self, client):
        session_id = client.post("/api/sessions").json()["session_id"]
        first = client.post(
            f"/api/sessions/{session_id}/turns", json={"message": QUESTION}
        ).json()
        keep = first["retrieved"][:1]
        response = client.post(
            f"/api/sessions/{session_id}/turns",
            json={
                "message": QUESTION,
                "included_keys": [
                    {"title": keep[0]["title"], "article": keep[0]["article"]}
                ],
            },
        )
        assert response.status_code == 200
        assert len(response.json()["included"]) == 1

    def test_included_keys_outside_retrieved_400(self, client):
        session_id = client.post("/api/sessions").json()["session_id"]
        response = client.post(
            f"/api/sessions/{session_id}/turns",
            json={
                "message": QUESTION,
                "included_keys": [{"title": "民法典", "article": 26}],
            },
        )
        assert response.status_code == 400


class TestRetrieveAndAudit:
    def test_retrieve_endpoint(self, client):
        response = client.post("/api/retrieve", json={"query": "结婚年龄", "k": 3})
        assert response.status_code == 200
        ranked = response.json()["ranked"]
        assert len(ranked) == 3
        assert ranked[0]["article"] == 1047
        scores = [r["score"] for r in ranked]
        assert scores == sorted(scores, reverse=True)

    def test_retrieve_empty_query_400(self, client):
        assert client.post("/api/retrieve", json={"query": "，。", "k": 3}).status_code == 400

    def test_audit_endpoint(self, client):
        response = client.post(
            "/api/audit",
            json={"text": "根据《婚姻家庭管理条例》第三十二条规定，男不得早于二十二周岁，女不得早于二十周岁。"},
        )
        assert response.status_code == 200
        payload = response.json()
        assert payload["has_h2"] is True
        assert payload["findings"][0]["verdict"] == "H2"

    def test_audit_empty_text_400(self, client):
        assert client.post("/api/audit", json={"text": "  "}).status_code == 400


class TestRankings:
    def test_tasks_are_anonymized(self, client):
        tasks = client.get("/api/rankings/tasks").json()["tasks"]
        assert len(tasks) == 1
        payload = str(tasks[0]["responses"])
        for system in SYSTEMS:
            assert system not in str([r["token"] for r in tasks[0]["responses"]])
        tokens = [r["token"] for r in tasks[0]["responses"]]
        assert sorted(tokens) == ["resp-1", "resp-2", "resp-3"]
        assert payload  # responses text present

    def test_submit_by_token_and_summary(self, client):
        tokens = [r["token"] for r in client.get("/api/rankings/tasks").json()["tasks"][0]["responses"]]
        response = client.post(
            "/api/rankings",
            json={
                "question_id": "hq1",
                "entries": [{"token": token, "rank": i + 1} for i, token in enumerate(tokens)],
            },
        )
        assert response.status_code == 201
        summary = client.get("/api/rankings/summary").json()
        assert summary["n_records"] == 1
        assert summary["systems"] == SYSTEMS
        total = sum(summary["proportions"]["expert"].values()) + summary["draw"]
        assert total == pytest.approx(1.0)

    def test_submit_by_system_id(self, client):
        response = client.post(
            "/api/rankings",
            json={
                "question_id": "hq2",
                "entries": [
                    {"system_id": system, "rank": i + 1} for i, system in enumerate(SYSTEMS)
                ],
            },
        )
        assert response.status_code == 201

    def test_draw_ballot(self, client):
        response = client.post("/api/rankings", json={"question_id": "hq3", "draw": True})
        assert response.status_code == 201

    def test_invalid_permutation_400(self, client):
        response = client.post(
            "/api/rankings",
            json={
                "question_id": "hq4",
                "entries": [
                    {"system_id": "expert", "rank": 1},
                    {"system_id": "q2ea", "rank": 1},
                    {"system_id": "qa2e", "rank": 3},
                ],
            },
        )
        assert response.status_code == 400

    def test_unknown_token_400(self, client):
        response = client.post(
            "/api/rankings",
            json={"question_id": "hq1", "entries": [{"token": "resp-99", "rank": 1}]},
        )
        assert response.status_code == 400

    def test_empty_summary(self, client):
        summary = client.get("/api/rankings/summary").json()
        assert summary["n_records"] == 0
        assert summary["proportions"] == {}

    def test_summary_derives_systems_when_unconfigured(self, marriage_index, marriage_lexical):
        backend = MockBackend(default_policy=MockPolicy.constant(text="答复。"))
        service = ConsultService(marriage_index, marriage_lexical, backend)
        app = create_app(service)  # no systems, no tasks
        client = TestClient(app)
        response = client.post(
            "/api/rankings",
            json={
                "question_id": "q1",
                "entries": [
                    {"system_id": system, "rank": i + 1} for i, system in enumerate(SYSTEMS)
                ],
            },
        )
        assert response.status_code == 201
        summary = client.get("/api/rankings/summary").json()
        assert summary["systems"] == sorted(SYSTEMS)
        assert summary["n_records"] == 1
