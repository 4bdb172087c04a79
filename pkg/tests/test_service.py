"""HTTP API tests: endpoint contracts, error codes, snapshot isolation."""

import json
import shutil
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from streamweave import service
from streamweave.kb import load_kb

from conftest import DATA


@pytest.fixture()
def kb_file(tmp_path):
    target = tmp_path / "kb.json"
    shutil.copy(DATA / "combined.kb.json", target)
    return target


@pytest.fixture()
def client(kb_file):
    app = service.create_app(kb_file)
    return TestClient(app)


def _start_session(client):
    response = client.post("/sessions")
    assert response.status_code == 201
    return response.json()["session_id"]


def _walk_to_solutions(client, sid):
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": "q-domain", "answer": "agriculture"})
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": "q-goal", "answer": "disease-monitoring"})
    response = client.post(f"/sessions/{sid}/task", json={"task_id": "task-phytophtora"})
    assert response.status_code == 200
    return response.json()


def test_full_flow(client):
    sid = _start_session(client)
    body = _walk_to_solutions(client, sid)
    assert len(body["solutions"]) == 1
    solution_hash = body["solutions"][0]["hash"]

    scores = client.post(f"/sessions/{sid}/weights",
                         json={"energy": 2, "accuracy": 1}).json()
    assert scores["scores"][0]["solution"] == solution_hash

    extras = client.get(f"/sessions/{sid}/context").json()["extras"]
    assert {"label": "airStress", "value_type": "text", "unit": "none"} in \
        [e["kind"] for e in extras]

    plan = client.post(f"/sessions/{sid}/plan",
                       json={"solution_hash": solution_hash, "extras": ["location"]})
    assert plan.status_code == 200
    doc = plan.json()
    assert doc["task"] == "task-phytophtora"
    assert [o["kind"]["label"] for o in doc["output_stream"]] == \
        ["phytophtoraDisease", "location"]


def test_golden_transcript(client):
    steps = json.loads((Path(__file__).parent / "data/golden_transcript.json").read_text())
    sid = None
    for step in steps:
        path = step["path"].replace("$SID", sid or "$SID")
        response = client.request(step["method"], path, json=step["body"])
        assert response.status_code == step["status"], path
        payload = response.json()
        if step["path"] == "/sessions":
            sid = payload["session_id"]
        normalized = json.loads(json.dumps(payload, sort_keys=True).replace(sid, "$SID"))
        assert normalized == step["response"], path


def test_error_codes(client):
    sid = _start_session(client)

    r = client.get("/sessions/nope/questions")
    assert (r.status_code, r.json()["error"]) == (404, "unknown_session")

    r = client.post(f"/sessions/{sid}/answers",
                    json={"question_id": "q-domain", "answer": "mars"})
    assert (r.status_code, r.json()["error"]) == (400, "invalid_answer")

    r = client.get(f"/sessions/{sid}/questions/q-missing/answers")
    assert (r.status_code, r.json()["error"]) == (404, "unknown_question")

    r = client.delete(f"/sessions/{sid}/answers/q-domain")
    assert (r.status_code, r.json()["error"]) == (404, "unknown_question")

    r = client.post(f"/sessions/{sid}/task", json={"task_id": "task-nope"})
    assert (r.status_code, r.json()["error"]) == (404, "unknown_task")

    r = client.post(f"/sessions/{sid}/weights", json={"energy": 1})
    assert (r.status_code, r.json()["error"]) == (404, "unknown_task")

    _walk_to_solutions(client, sid)

    r = client.post(f"/sessions/{sid}/weights", json={"karma": 1})
    assert (r.status_code, r.json()["error"]) == (400, "invalid_weights")

    r = client.post(f"/sessions/{sid}/weights", json={"energy": -2})
    assert (r.status_code, r.json()["error"]) == (400, "invalid_weights")

    r = client.post(f"/sessions/{sid}/plan",
                    json={"solution_hash": "ffffffffffffffff", "extras": []})
    assert (r.status_code, r.json()["error"]) == (404, "unknown_solution")

    solutions = client.post(f"/sessions/{sid}/task",
                            json={"task_id": "task-phytophtora"}).json()["solutions"]
    r = client.post(f"/sessions/{sid}/plan",
                    json={"solution_hash": solutions[0]["hash"],
                          "extras": ["darkMatter"]})
    assert (r.status_code, r.json()["error"]) == (400, "underivable_extra")

    r = client.post("/kb/entities", json={"type": "sensor", "entity": {"id": "s-at"}})
    assert (r.status_code, r.json()["error"]) == (400, "kb_validation_failed")


def test_undo_answer(client):
    sid = _start_session(client)
    before = client.get(f"/sessions/{sid}/tasks").json()["count"]
    client.post(f"/sessions/{sid}/answers",
                json={"question_id": "q-domain", "answer": "agriculture"})
    narrowed = client.get(f"/sessions/{sid}/tasks").json()["count"]
    assert narrowed < before
    restored = client.delete(f"/sessions/{sid}/answers/q-domain").json()["count"]
    assert restored == before


def test_get_idempotent(client):
    sid = _start_session(client)
    a = client.get(f"/sessions/{sid}/questions").text
    b = client.get(f"/sessions/{sid}/questions").text
    assert a == b


def test_repeated_compose_identical(client):
    sid = _start_session(client)
    first = _walk_to_solutions(client, sid)
    again = client.post(f"/sessions/{sid}/task",
                        json={"task_id": "task-phytophtora"}).json()
    assert first == again


def test_snapshot_isolation(client, kb_file):
    sid = _start_session(client)
    baseline = _walk_to_solutions(client, sid)
    baseline_scores = client.post(f"/sessions/{sid}/weights",
                                  json={"energy": 1}).json()

    entity = {
        "id": "s-at2", "name": "Backup Temperature Sensor",
        "outputs": ["airTemperature"],
        "context": {"accuracy": 0.5, "energy": 0.5, "latency": 0.5, "reliability": 0.5},
    }
    r = client.post("/kb/entities", json={"type": "sensor", "entity": entity})
    assert r.status_code == 201

    # the pinned session still composes and ranks against its snapshot
    again = client.post(f"/sessions/{sid}/task",
                        json={"task_id": "task-phytophtora"}).json()
    assert again == baseline
    again_scores = client.post(f"/sessions/{sid}/weights",
                               json={"energy": 1}).json()
    assert again_scores == baseline_scores

    # a fresh session sees the enlarged KB: two ways to sense temperature
    sid2 = _start_session(client)
    grown = _walk_to_solutions(client, sid2)
    assert len(grown["solutions"]) == 2

    # and the mutation was persisted to the file
    assert any(s.id == "s-at2" for s in load_kb(kb_file).sensors)


def test_kb_endpoints(client, kb_file):
    r = client.get("/kb")
    assert r.status_code == 200
    assert r.json()["version_hash"] == load_kb(kb_file).version_hash()
    assert {s["id"] for s in r.json()["document"]["sensors"]} >= {"s-at", "s-nd"}

    r = client.get("/kb/validate")
    assert r.status_code == 200
    assert r.json()["valid"] is True


def test_session_expiry(kb_file):
    now = [0.0]
    app = service.create_app(kb_file, session_ttl=10.0, clock=lambda: now[0])
    client = TestClient(app)
    sid = _start_session(client)
    assert client.get(f"/sessions/{sid}/tasks").status_code == 200
    now[0] = 11.0
    r = client.get(f"/sessions/{sid}/tasks")
    assert (r.status_code, r.json()["error"]) == (404, "unknown_session")


def test_api_token(kb_file):
    app = service.create_app(kb_file, api_token="sesame")
    client = TestClient(app)
    assert client.post("/sessions").status_code == 401
    assert client.post("/sessions").json()["error"] == "unauthorized"
    ok = client.post("/sessions", headers={"Authorization": "Bearer sesame"})
    assert ok.status_code == 201


def test_endpoints_reduce_to_module_operations(client, kb_file):
    # contract: every endpoint result equals the pure operation called
    # directly on the same snapshot
    from streamweave import composer, context, cost, qa

    kb = load_kb(kb_file)
    sid = _start_session(client)

    got_questions = client.get(f"/sessions/{sid}/questions").json()["questions"]
    want_questions = qa.available_questions(kb, qa.ConstraintSet())
    assert [q["id"] for q in got_questions] == [q.id for q in want_questions]

    got_answers = client.get(f"/sessions/{sid}/questions/q-domain/answers").json()
    assert tuple(got_answers["answers"]) == \
        qa.answers_for(kb, qa.ConstraintSet(), "q-domain")

    body = _walk_to_solutions(client, sid)
    constraints = qa.ConstraintSet((("q-domain", "agriculture"),
                                    ("q-goal", "disease-monitoring")))
    want_tasks = qa.matching_tasks(kb, constraints)
    got_tasks = client.get(f"/sessions/{sid}/tasks").json()["tasks"]
    assert [t["id"] for t in got_tasks] == [t.id for t in want_tasks]

    want_compose = composer.compose(kb, "task-phytophtora")
    assert [s["hash"] for s in body["solutions"]] == \
        [composer.canonical_hash(s) for s in want_compose.solutions]

    got_scores = client.post(f"/sessions/{sid}/weights",
                             json={"energy": 3, "accuracy": 2}).json()["scores"]
    want_scores = cost.rank(kb, want_compose.solutions,
                            cost.WeightVector({"energy": 3, "accuracy": 2}))
    assert [s["solution"] for s in got_scores] == \
        [composer.canonical_hash(s.solution) for s in want_scores]
    assert [s["total"] for s in got_scores] == [s.total for s in want_scores]

    got_extras = client.get(f"/sessions/{sid}/context").json()["extras"]
    available, _ = context.discover(kb)
    required = set(kb.task("task-phytophtora").required_stream)
    want_extras = sorted(((k, t) for k, t in available.items() if k not in required),
                         key=lambda kv: (kv[1], kv[0]))
    assert [(e["kind"]["label"], e["tier"]) for e in got_extras] == \
        [(k.label, t) for k, t in want_extras]


def test_static_ui_serving(kb_file, tmp_path):
    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<!DOCTYPE html><title>ui</title>")
    client = TestClient(service.create_app(kb_file, static_dir=static))
    page = client.get("/")
    assert page.status_code == 200
    assert "<title>ui</title>" in page.text
    # API routes take precedence over the static mount
    assert client.post("/sessions").status_code == 201


def test_zero_solution_flow(tmp_path):
    target = tmp_path / "partial.json"
    shutil.copy(DATA / "pollution-partial.kb.json", target)
    client = TestClient(service.create_app(target))
    sid = _start_session(client)
    body = client.post(f"/sessions/{sid}/task",
                       json={"task_id": "task-pollution"}).json()
    assert body["solutions"] == []
    sets = [[k["label"] for k in ms["kinds"]] for ms in body["report"]["missing_sets"]]
    assert sets == [["airTemperature"], ["nitrogenDioxide"]]
    scores = client.post(f"/sessions/{sid}/weights", json={"energy": 1})
    assert scores.json() == {"scores": []}
