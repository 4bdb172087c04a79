#!/usr/bin/env python3
"""Regenerate frozen golden files from the current implementation.

Run after intentionally changing a canonical format or a shipped KB, then
review the diff before committing:

    python scripts/regenerate_goldens.py
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT / "src"))

from fastapi.testclient import TestClient

from streamweave import composer, deploy, kb, service

SID = "$SID"


def golden_plan():
    agri = kb.load_kb(ROOT / "data/agri.kb.json")
    sol = composer.compose(agri, "task-phytophtora").solutions[0]
    plan = deploy.generate_plan(agri, sol)
    out = ROOT / "data/golden/agri-plan.json"
    out.write_text(deploy.emit_plan(plan))
    print(f"wrote {out} ({plan.plan_id})")


TRANSCRIPT_SCRIPT = [
    ("POST", "/sessions", None),
    ("GET", f"/sessions/{SID}/questions", None),
    ("GET", f"/sessions/{SID}/questions/q-domain/answers", None),
    ("POST", f"/sessions/{SID}/answers",
     {"question_id": "q-domain", "answer": "agriculture"}),
    ("GET", f"/sessions/{SID}/questions", None),
    ("POST", f"/sessions/{SID}/answers",
     {"question_id": "q-goal", "answer": "disease-monitoring"}),
    ("GET", f"/sessions/{SID}/tasks", None),
    ("POST", f"/sessions/{SID}/task", {"task_id": "task-phytophtora"}),
    ("GET", f"/sessions/{SID}/context", None),
    ("POST", f"/sessions/{SID}/weights",
     {"accuracy": 1, "energy": 1, "latency": 1, "reliability": 1}),
    ("POST", f"/sessions/{SID}/plan",
     {"solution_hash": "$SOLUTION", "extras": ["batteryLevel"]}),
]


def run_transcript(client):
    sid = None
    solution_hash = None
    steps = []
    for method, path, body in TRANSCRIPT_SCRIPT:
        real_path = path.replace(SID, sid or SID)
        real_body = body
        if body and body.get("solution_hash") == "$SOLUTION":
            real_body = dict(body, solution_hash=solution_hash)
        response = client.request(method, real_path, json=real_body)
        payload = response.json()
        if path == "/sessions":
            sid = payload["session_id"]
        if path.endswith("/task") and payload.get("solutions"):
            solution_hash = payload["solutions"][0]["hash"]
        text = json.dumps(payload, sort_keys=True)
        if sid:
            text = text.replace(sid, SID)
        steps.append({
            "method": method,
            "path": path,
            "body": real_body,
            "status": response.status_code,
            "response": json.loads(text),
        })
    return steps


def golden_transcript():
    app = service.create_app(ROOT / "data/combined.kb.json", persist=False)
    steps = run_transcript(TestClient(app))
    out = ROOT / "tests/data/golden_transcript.json"
    out.parent.mkdir(exist_ok=True)
    out.write_text(json.dumps(steps, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({len(steps)} steps)")


if __name__ == "__main__":
    golden_plan()
    golden_transcript()
