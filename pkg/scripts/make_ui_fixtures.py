#!/usr/bin/env python3
"""Record real service responses as fixtures for the frontend tests.

The UI is a thin client, so its tests assert rendered output against raw
API payloads; recording the actual service keeps the two in lockstep.
Re-run after changing wire formats:

    python scripts/make_ui_fixtures.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient

from streamweave import service


class Recorder:
    """Plays a scenario and records normalized request/response pairs."""

    def __init__(self, kb_path):
        self.client = TestClient(service.create_app(kb_path, persist=False))
        self.sid = None
        self.steps = []

    def call(self, method, path, body=None):
        real_path = path.replace("$SID", self.sid or "$SID")
        response = self.client.request(method, real_path, json=body)
        payload = response.json()
        if path == "/sessions" and response.status_code == 201:
            self.sid = payload["session_id"]
        text = json.dumps(payload)
        if self.sid:
            text = text.replace(self.sid, "SID")
        self.steps.append({
            "method": method,
            "path": path.replace("$SID", "SID"),
            "body": body,
            "status": response.status_code,
            "response": json.loads(text),
        })
        return payload


def wizard_scenario():
    """Use case 1: answer -> (undo -> re-answer) -> task -> weights -> plan.

    The undo round in the middle lets the flow tests replay either path:
    per-endpoint queues are FIFO, so the straight-through test consumes a
    prefix and the undo test consumes one refresh round more.
    """
    r = Recorder(ROOT / "data/combined.kb.json")
    r.call("GET", "/kb")
    r.call("POST", "/sessions")
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-domain/answers")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("POST", "/sessions/$SID/answers",
           {"question_id": "q-domain", "answer": "agriculture"})
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("DELETE", "/sessions/$SID/answers/q-domain")
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-domain/answers")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("POST", "/sessions/$SID/answers",
           {"question_id": "q-domain", "answer": "agriculture"})
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    compose = r.call("POST", "/sessions/$SID/task", {"task_id": "task-phytophtora"})
    solution_hash = compose["solutions"][0]["hash"]
    equal = {name: 5 for name in ("accuracy", "energy", "latency", "reliability")}
    r.call("POST", "/sessions/$SID/weights", equal)
    r.call("GET", "/sessions/$SID/context")
    r.call("POST", "/sessions/$SID/plan",
           {"solution_hash": solution_hash, "extras": ["batteryLevel"]})
    return r.steps


def pollution_scenario():
    """Use case 2 on the full KB: slider moves reorder three solutions."""
    r = Recorder(ROOT / "data/pollution.kb.json")
    r.call("GET", "/kb")
    r.call("POST", "/sessions")
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-domain/answers")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("POST", "/sessions/$SID/task", {"task_id": "task-pollution"})
    equal = {name: 5 for name in ("accuracy", "energy", "latency", "reliability")}
    r.call("POST", "/sessions/$SID/weights", equal)
    r.call("GET", "/sessions/$SID/context")
    r.call("POST", "/sessions/$SID/weights", dict(equal, energy=10))
    return r.steps


def partial_scenario():
    """Zero-solution flow: recommendation chips for the partial KB."""
    r = Recorder(ROOT / "data/pollution-partial.kb.json")
    r.call("GET", "/kb")
    r.call("POST", "/sessions")
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-domain/answers")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("POST", "/sessions/$SID/task", {"task_id": "task-pollution"})
    return r.steps


def describe_scenario():
    """Form-based ingestion: one success, one duplicate-id rejection."""
    r = Recorder(ROOT / "data/combined.kb.json")
    r.call("GET", "/kb")
    r.call("POST", "/sessions")
    r.call("GET", "/sessions/$SID/tasks")
    r.call("GET", "/sessions/$SID/questions")
    r.call("GET", "/sessions/$SID/questions/q-domain/answers")
    r.call("GET", "/sessions/$SID/questions/q-goal/answers")
    r.call("POST", "/kb/entities", {
        "type": "sensor",
        "entity": {
            "id": "s-sm", "name": "Soil Moisture Sensor",
            "outputs": [{"label": "soilMoisture", "value_type": "real",
                         "unit": "percent"}],
            "active": True,
            "context": {"accuracy": 0.85, "energy": 0.8, "latency": 0.2,
                        "reliability": 0.9},
            "domains": ["agriculture"],
        },
    })
    r.call("POST", "/kb/entities", {
        "type": "sensor",
        "entity": {"id": "s-at", "name": "clash", "outputs": ["airTemperature"]},
    })
    return r.steps


def main():
    fixtures = {
        "wizard": wizard_scenario(),
        "pollution": pollution_scenario(),
        "partial": partial_scenario(),
        "describe": describe_scenario(),
    }
    out = ROOT / "frontend/tests/fixtures.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(fixtures, indent=2, sort_keys=True) + "\n")
    total = sum(len(steps) for steps in fixtures.values())
    print(f"wrote {out} ({total} recorded calls)")


if __name__ == "__main__":
    main()
