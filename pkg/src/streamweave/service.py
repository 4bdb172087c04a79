"""HTTP session API over a file-backed KB.

Exposes the full flow: question answering, task selection, composition,
ranking, extra context discovery, and plan generation. Sessions pin the KB
snapshot that was current when they were created, so later KB mutations
never change a session's results (snapshot isolation). KB mutations are
serialized through a single writer lock and persisted back to the KB file.
"""

from __future__ import annotations

import functools
import secrets
import time
from dataclasses import dataclass
from pathlib import Path
from threading import Lock
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import composer, context, cost, deploy, qa
from . import kb as kb_mod

DEFAULT_SESSION_TTL = 3600.0


class ApiError(Exception):
    def __init__(self, status, code, detail, extra=None):
        self.status = status
        self.code = code
        self.detail = detail
        self.extra = extra or {}
        super().__init__(detail)


def _err(status, code, detail, extra=None):
    return ApiError(status, code, detail, extra)


@dataclass
class ServerSession:
    id: str
    kb: kb_mod.KnowledgeBase
    expires_at: float
    qa: qa.QaSession = None
    compose_result: Optional[composer.ComposeResult] = None
    weights: Optional[cost.WeightVector] = None

    def __post_init__(self):
        if self.qa is None:
            self.qa = qa.new_session(self.kb)


class KbStore:
    """Current KB snapshot plus the single-writer mutation queue."""

    def __init__(self, path, persist=True):
        self.path = Path(path)
        self.persist = persist
        self._lock = Lock()
        self._kb = kb_mod.load_kb(self.path)

    @property
    def kb(self):
        return self._kb

    def mutate(self, entity):
        with self._lock:
            new = kb_mod.add_description(self._kb, entity)
            if self.persist:
                kb_mod.save_kb(new, self.path)
            self._kb = new
            return new


class SessionStore:
    def __init__(self, ttl, clock=time.monotonic):
        self.ttl = ttl
        self.clock = clock
        self._lock = Lock()
        self._sessions = {}

    def create(self, kb):
        with self._lock:
            self._purge()
            sid = secrets.token_hex(12)
            session = ServerSession(id=sid, kb=kb, expires_at=self.clock() + self.ttl)
            self._sessions[sid] = session
            return session

    def get(self, sid):
        with self._lock:
            self._purge()
            session = self._sessions.get(sid)
            if session is None:
                raise _err(404, "unknown_session", f"no session {sid!r}")
            session.expires_at = self.clock() + self.ttl
            return session

    def _purge(self):
        now = self.clock()
        for sid in [s for s, sess in self._sessions.items() if sess.expires_at <= now]:
            del self._sessions[sid]


# -- wire formats -----------------------------------------------------------


def _kind_json(kind):
    return {"label": kind.label, "value_type": kind.value_type, "unit": kind.unit}


def _question_json(q):
    return {"id": q.id, "text": q.text, "concept": q.concept}


def _task_json(t):
    return {
        "id": t.id,
        "name": t.name,
        "required_stream": [_kind_json(k) for k in t.required_stream],
        "concepts": {c: v for c, v in t.concept_bindings},
    }


def _node_json(node):
    if isinstance(node, composer.SensorUse):
        return {"type": "sensor", "resource": node.sensor_id, "kind": _kind_json(node.kind)}
    return {"type": "dpc", "resource": node.dpc_id, "signature": node.signature,
            "kind": _kind_json(node.kind)}


def _node_ref(node):
    if isinstance(node, composer.SensorUse):
        return f"sensor:{node.sensor_id}:{node.kind.label}"
    return f"dpc:{node.dpc_id}[{node.signature}]:{node.kind.label}"


def _solution_json(kb, solution):
    nodes = sorted(solution.nodes, key=composer.node_key)
    edges = sorted(solution.edges,
                   key=lambda e: (composer.node_key(e[0]), composer.node_key(e[1]), e[2]))
    return {
        "hash": composer.canonical_hash(solution),
        "task": solution.task_id,
        "expression": composer.expression(kb, solution),
        "nodes": [_node_json(n) for n in nodes],
        "edges": [
            {"from": _node_ref(p), "to": _node_ref(c), "kind": _kind_json(k)}
            for p, c, k in edges
        ],
        "sinks": [{"kind": _kind_json(k), "node": _node_ref(n)} for k, n in solution.sinks],
    }


def _report_json(report):
    return {
        "unsatisfiable_kinds": [_kind_json(k) for k in report.unsatisfiable_kinds],
        "missing_sets": [
            {
                "kinds": [_kind_json(k) for k in ms.kinds],
                "unlocks": [{"dpc": d, "signature": i} for d, i in ms.unlocks],
            }
            for ms in report.missing_sets
        ],
    }


def _score_json(kb, score):
    return {
        "solution": composer.canonical_hash(score.solution),
        "expression": composer.expression(kb, score.solution),
        "raw": {a: score.raw[a] for a in sorted(score.raw)},
        "normalized": {a: score.normalized[a] for a in sorted(score.normalized)},
        "total": score.total,
    }


def _tasks_summary(session):
    tasks = qa.matching_tasks(session.kb, session.qa.constraints)
    return {
        "count": len(tasks),
        "tasks": [_task_json(t) for t in tasks],
        "constraints": [
            {"question_id": q, "answer": a} for q, a in session.qa.constraints.entries
        ],
    }


def _validation_json(report):
    def vio(v):
        return {"entity": v.entity, "field": v.field, "message": v.message}
    return {
        "valid": report.ok,
        "errors": [vio(v) for v in report.errors],
        "warnings": [vio(v) for v in report.warnings],
    }


# -- entity ingestion ---------------------------------------------------------


def _entity_from_json(current_kb, body):
    etype = body.get("type")
    entity = body.get("entity")
    if etype not in ("sensor", "dpc", "task", "question") or not isinstance(entity, dict):
        raise _err(400, "kb_validation_failed",
                   "body must carry 'type' (sensor|dpc|task|question) and 'entity'")
    # Reuse the file-format parser by wrapping the entity in a KB skeleton
    # carrying the current kind declarations, so label references and inline
    # kind declarations work exactly as in the file format.
    import json as _json
    key = {"sensor": "sensors", "dpc": "dpcs", "task": "tasks", "question": "questions"}[etype]
    doc = {
        "version": "1",
        "kinds": [_kind_json(k) for k in current_kb.kinds],
        key: [entity],
    }
    try:
        skeleton = kb_mod.parse_kb(_json.dumps(doc), validate=False)
    except kb_mod.KbParseError as exc:
        raise _err(400, "kb_validation_failed", str(exc))
    collection = getattr(skeleton, key)
    return collection[0]


class AnswerBody(BaseModel):
    question_id: str
    answer: str


class TaskBody(BaseModel):
    task_id: str


class PlanBody(BaseModel):
    solution_hash: str
    extras: list[str] = []
    rate_seconds: float = deploy.DEFAULT_RATE_SECONDS
    window_seconds: Optional[float] = None


def create_app(kb_path, *, session_ttl=DEFAULT_SESSION_TTL,
               limits=composer.ComposeLimits(), static_dir=None,
               api_token=None, persist=True, clock=time.monotonic) -> FastAPI:
    """Build the API app; engine calls are pure over pinned snapshots."""
    app = FastAPI(title="streamweave", docs_url=None, redoc_url=None)
    store = KbStore(kb_path, persist=persist)
    sessions = SessionStore(session_ttl, clock=clock)
    app.state.store = store
    app.state.sessions = sessions

    @app.exception_handler(ApiError)
    async def _api_error(request, exc: ApiError):
        body = {"error": exc.code, "detail": exc.detail}
        body.update(exc.extra)
        return JSONResponse(status_code=exc.status, content=body)

    def translate(exc):
        if isinstance(exc, qa.UnknownQuestionError):
            return _err(404, "unknown_question", str(exc))
        if isinstance(exc, (qa.AnswerNotOfferedError, qa.QuestionNotAvailableError)):
            return _err(400, "invalid_answer", str(exc))
        if isinstance(exc, (qa.UnknownTaskError, composer.UnknownTaskError)):
            return _err(404, "unknown_task", str(exc))
        if isinstance(exc, (cost.InvalidWeightsError, cost.UnknownAttributeError)):
            return _err(400, "invalid_weights", str(exc))
        if isinstance(exc, deploy.UnderivableExtraError):
            return _err(400, "underivable_extra", str(exc))
        if isinstance(exc, (kb_mod.KbValidationError, kb_mod.DuplicateIdError)):
            extra = {}
            if isinstance(exc, kb_mod.KbValidationError):
                extra = {"report": _validation_json(exc.report)}
            return _err(400, "kb_validation_failed", str(exc), extra)
        return exc

    def guard(fn):
        @functools.wraps(fn)
        def wrapped(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except ApiError:
                raise
            except Exception as exc:  # noqa: BLE001 - mapped to wire codes
                mapped = translate(exc)
                if isinstance(mapped, ApiError):
                    raise mapped from exc
                raise
        return wrapped

    def check_token(request: Request):
        if api_token is None:
            return
        header = request.headers.get("authorization", "")
        if header != f"Bearer {api_token}":
            raise _err(401, "unauthorized", "missing or invalid API token")

    # -- session flow -----------------------------------------------------

    @app.post("/sessions", status_code=201)
    @guard
    def create_session(request: Request):
        check_token(request)
        session = sessions.create(store.kb)
        return {
            "session_id": session.id,
            "kb_version": session.kb.version_hash(),
            "task_count": len(session.kb.tasks),
        }

    @app.get("/sessions/{sid}/questions")
    @guard
    def list_questions(sid: str, request: Request):
        check_token(request)
        session = sessions.get(sid)
        questions = qa.available_questions(session.kb, session.qa.constraints)
        return {"questions": [_question_json(q) for q in questions]}

    @app.get("/sessions/{sid}/questions/{qid}/answers")
    @guard
    def list_answers(sid: str, qid: str, request: Request):
        check_token(request)
        session = sessions.get(sid)
        answers = qa.answers_for(session.kb, session.qa.constraints, qid)
        return {"question_id": qid, "answers": list(answers)}

    @app.post("/sessions/{sid}/answers")
    @guard
    def post_answer(sid: str, body: AnswerBody, request: Request):
        check_token(request)
        session = sessions.get(sid)
        session.qa = qa.apply_answer(session.qa, body.question_id, body.answer)
        session.compose_result = None
        return _tasks_summary(session)

    @app.delete("/sessions/{sid}/answers/{qid}")
    @guard
    def delete_answer(sid: str, qid: str, request: Request):
        check_token(request)
        session = sessions.get(sid)
        session.qa = qa.remove_answer(session.qa, qid)
        session.compose_result = None
        return _tasks_summary(session)

    @app.get("/sessions/{sid}/tasks")
    @guard
    def list_tasks(sid: str, request: Request):
        check_token(request)
        session = sessions.get(sid)
        return _tasks_summary(session)

    @app.post("/sessions/{sid}/task")
    @guard
    def choose_task(sid: str, body: TaskBody, request: Request):
        check_token(request)
        session = sessions.get(sid)
        session.qa = qa.select_task(session.qa, body.task_id)
        result = composer.compose(session.kb, body.task_id, limits)
        session.compose_result = result
        return {
            "task": body.task_id,
            "solutions": [_solution_json(session.kb, s) for s in result.solutions],
            "report": _report_json(result.report),
            "truncated": result.truncated,
        }

    @app.get("/sessions/{sid}/context")
    @guard
    def list_context(sid: str, request: Request):
        check_token(request)
        session = sessions.get(sid)
        if session.qa.selected_task is None:
            raise _err(404, "unknown_task", "select a task before requesting extras")
        task = session.kb.task(session.qa.selected_task)
        available, _ = context.discover(session.kb)
        required = set(task.required_stream)
        extras = [
            {"kind": _kind_json(k), "tier": tier}
            for k, tier in sorted(available.items(), key=lambda kv: (kv[1], kv[0]))
            if k not in required
        ]
        return {"extras": extras}

    @app.post("/sessions/{sid}/weights")
    @guard
    def post_weights(sid: str, body: dict[str, float], request: Request):
        # Body is the raw attribute->weight map; an empty map means the
        # default (all registered attributes weighted equally).
        check_token(request)
        session = sessions.get(sid)
        if session.compose_result is None:
            raise _err(404, "unknown_task", "compose a task before ranking")
        weights = cost.WeightVector(body) if body else None
        session.weights = weights
        solutions = session.compose_result.solutions
        if not solutions:
            return {"scores": []}
        ranked = cost.rank(session.kb, solutions, weights)
        return {"scores": [_score_json(session.kb, r) for r in ranked]}

    @app.post("/sessions/{sid}/plan")
    @guard
    def post_plan(sid: str, body: PlanBody, request: Request):
        check_token(request)
        session = sessions.get(sid)
        if session.compose_result is None:
            raise _err(404, "unknown_task", "compose a task before planning")
        solution = None
        for s in session.compose_result.solutions:
            if composer.canonical_hash(s) == body.solution_hash:
                solution = s
                break
        if solution is None:
            raise _err(404, "unknown_solution",
                       f"no composed solution with hash {body.solution_hash!r}")
        available, _ = context.discover(session.kb)
        by_label = {k.label: k for k in available}
        extras = set()
        for label in body.extras:
            if label not in by_label:
                raise _err(400, "underivable_extra",
                           f"kind {label!r} cannot be derived")
            extras.add(by_label[label])
        plan = deploy.generate_plan(session.kb, solution, extras,
                                    rate_seconds=body.rate_seconds,
                                    window_seconds=body.window_seconds)
        return Response(content=deploy.emit_plan(plan), media_type="application/json")

    # -- KB inspection / ingestion ----------------------------------------

    @app.get("/kb")
    @guard
    def get_kb(request: Request):
        check_token(request)
        return {
            "version_hash": store.kb.version_hash(),
            "document": kb_mod.kb_document(store.kb),
        }

    @app.get("/kb/validate")
    @guard
    def get_kb_validate(request: Request):
        check_token(request)
        return _validation_json(kb_mod.validate_kb(store.kb))

    @app.post("/kb/entities", status_code=201)
    @guard
    def post_entity(request: Request, body: dict):
        check_token(request)
        entity = _entity_from_json(store.kb, body)
        new = store.mutate(entity)
        return {"version_hash": new.version_hash()}

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def run(kb_path, listen="127.0.0.1:8080", **kwargs):  # pragma: no cover - thin wrapper
    import uvicorn

    host, _, port = listen.rpartition(":")
    app = create_app(kb_path, **kwargs)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
