"""Deployment plan generation.

A chosen solution, plus any extra derivable context kinds the user picked,
becomes a declarative middleware-agnostic plan: topologically ordered
stages with explicit wiring, the output stream schema, and the KB version
hash for drift detection. The plan embeds resource names and full kind
definitions so it stands alone without the KB. Stage order is canonical
(dependency depth, then resource id) so the same solution always emits the
same bytes. Format documented in docs/plan-format.md.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from . import context as context_mod
from .composer import DpcUse, SensorUse, Solution, node_key
from .kb import Kind, KnowledgeBase


class DeployError(Exception):
    pass


class UnderivableExtraError(DeployError):
    pass


class PlanParseError(DeployError):
    pass


#: Default stream rate and aggregation window when the user does not set
#: them; both are plan metadata, never derived from the KB.
DEFAULT_RATE_SECONDS = 5.0
DEFAULT_WINDOW_SECONDS = None


@dataclass(frozen=True)
class PlanStage:
    stage_id: str
    resource_id: str
    resource_name: str
    resource_type: str  # "sensor" | "dpc"
    signature: Optional[int]
    inputs: tuple[str, ...]
    output: Kind


@dataclass(frozen=True)
class DeploymentPlan:
    plan_id: str
    kb_version: str
    task_id: str
    rate_seconds: float
    window_seconds: Optional[float]
    stages: tuple[PlanStage, ...]
    output_stream: tuple[tuple[Kind, str], ...]
    extras: tuple[Kind, ...]


def _resolve_extra_nodes(kb, table, produced, kind):
    """Nodes needed to produce one extra kind, reusing anything already
    produced. Derived kinds follow the discovery table's chosen signature;
    sensed kinds pick the lowest-id active sensor."""
    if kind in produced:
        return []
    source = table.derivations.get(kind)
    if source is None:
        sensors = [s for s in kb.producers_of(kind) if s.active]
        node = SensorUse(sensors[0].id, kind)
        produced[kind] = node
        return [node]
    dpc_id, sig_i = source
    new_nodes = []
    for inp in kb.dpc(dpc_id).signatures[sig_i].inputs:
        new_nodes.extend(_resolve_extra_nodes(kb, table, produced, inp))
    node = DpcUse(dpc_id, sig_i, kind)
    produced[kind] = node
    new_nodes.append(node)
    return new_nodes


def generate_plan(kb: KnowledgeBase, solution: Solution,
                  extras: Iterable[Kind] = (),
                  rate_seconds: float = DEFAULT_RATE_SECONDS,
                  window_seconds=DEFAULT_WINDOW_SECONDS) -> DeploymentPlan:
    """Deterministic plan for a solution plus optional extra context kinds.

    Every extra must be derivable (context.discover); its derivation is
    merged into the stage graph, reusing nodes wherever a kind is already
    produced by the solution or an earlier extra.
    """
    task = kb.task(solution.task_id)
    available, table = context_mod.discover(kb)

    required = set(task.required_stream)
    extra_kinds = tuple(sorted(set(extras) - required))
    for kind in extra_kinds:
        if kind not in available:
            raise UnderivableExtraError(f"kind {kind.label!r} cannot be derived")

    produced = {}
    for node in sorted(solution.nodes, key=node_key):
        produced.setdefault(node.kind, node)
    nodes = set(solution.nodes)
    edges = set(solution.edges)
    for kind in extra_kinds:
        for node in _resolve_extra_nodes(kb, table, produced, kind):
            nodes.add(node)
            if isinstance(node, DpcUse):
                for inp in kb.dpc(node.dpc_id).signatures[node.signature].inputs:
                    edges.add((produced[inp], node, inp))

    producer_for = {}
    for producer, consumer, kind in edges:
        producer_for[(consumer, kind)] = producer

    depth = {}
    def node_depth(node):
        if node in depth:
            return depth[node]
        if isinstance(node, SensorUse):
            depth[node] = 0
        else:
            inputs = kb.dpc(node.dpc_id).signatures[node.signature].inputs
            depth[node] = 1 + max(node_depth(producer_for[(node, k)]) for k in inputs)
        return depth[node]

    ordered = sorted(nodes, key=lambda n: (node_depth(n),) + node_key(n))
    stage_ids = {node: f"st-{i + 1}" for i, node in enumerate(ordered)}

    stages = []
    for node in ordered:
        if isinstance(node, SensorUse):
            sensor = kb.sensor(node.sensor_id)
            stages.append(PlanStage(
                stage_id=stage_ids[node], resource_id=sensor.id,
                resource_name=sensor.name, resource_type="sensor",
                signature=None, inputs=(), output=node.kind))
        else:
            dpc = kb.dpc(node.dpc_id)
            inputs = dpc.signatures[node.signature].inputs
            stages.append(PlanStage(
                stage_id=stage_ids[node], resource_id=dpc.id,
                resource_name=dpc.name, resource_type="dpc",
                signature=node.signature,
                inputs=tuple(stage_ids[producer_for[(node, k)]] for k in inputs),
                output=node.kind))

    output_stream = [(kind, stage_ids[solution.sink_for(kind)])
                     for kind in task.required_stream]
    output_stream.extend((kind, stage_ids[produced[kind]]) for kind in extra_kinds)

    plan = DeploymentPlan(
        plan_id="", kb_version=kb.version_hash(), task_id=task.id,
        rate_seconds=float(rate_seconds),
        window_seconds=None if window_seconds is None else float(window_seconds),
        stages=tuple(stages),
        output_stream=tuple(output_stream), extras=extra_kinds)
    return replace(plan, plan_id="pl-" + _content_hash(plan))


def _content_hash(plan):
    doc = _plan_document(plan)
    doc.pop("plan", None)
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def _kind_json(kind):
    return {"label": kind.label, "value_type": kind.value_type, "unit": kind.unit}


def _plan_document(plan):
    return {
        "plan": plan.plan_id,
        "kb_version": plan.kb_version,
        "task": plan.task_id,
        "rate_seconds": plan.rate_seconds,
        "window_seconds": plan.window_seconds,
        "stages": [
            {
                "stage": st.stage_id,
                "resource": st.resource_id,
                "resource_name": st.resource_name,
                "type": st.resource_type,
                **({"signature": st.signature} if st.signature is not None else {}),
                "inputs": list(st.inputs),
                "output": _kind_json(st.output),
            }
            for st in plan.stages
        ],
        "output_stream": [
            {"kind": _kind_json(kind), "stage": stage_id}
            for kind, stage_id in plan.output_stream
        ],
        "extras": [_kind_json(k) for k in plan.extras],
    }


def emit_plan(plan: DeploymentPlan) -> str:
    """Canonical textual form; parse_plan(emit_plan(plan)) == plan."""
    return json.dumps(_plan_document(plan), indent=2) + "\n"


def _parse_kind(obj, where):
    if not isinstance(obj, dict) or not {"label", "value_type", "unit"} <= set(obj):
        raise PlanParseError(f"{where}: malformed kind")
    return Kind(label=obj["label"], value_type=obj["value_type"], unit=obj["unit"])


def parse_plan(text) -> DeploymentPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanParseError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(doc, dict):
        raise PlanParseError("plan document must be an object")
    try:
        stages = tuple(
            PlanStage(
                stage_id=st["stage"], resource_id=st["resource"],
                resource_name=st.get("resource_name", ""), resource_type=st["type"],
                signature=st.get("signature"),
                inputs=tuple(st.get("inputs", ())),
                output=_parse_kind(st["output"], st.get("stage", "stage")),
            )
            for st in doc["stages"]
        )
        output_stream = tuple(
            (_parse_kind(entry["kind"], "output_stream"), entry["stage"])
            for entry in doc["output_stream"]
        )
        extras = tuple(_parse_kind(k, "extras") for k in doc.get("extras", ()))
        window = doc.get("window_seconds")
        return DeploymentPlan(
            plan_id=doc["plan"], kb_version=doc["kb_version"], task_id=doc["task"],
            rate_seconds=float(doc["rate_seconds"]),
            window_seconds=None if window is None else float(window),
            stages=stages,
            output_stream=output_stream, extras=extras)
    except (KeyError, TypeError) as exc:
        raise PlanParseError(f"missing or malformed field: {exc}") from exc


def check_plan(plan: DeploymentPlan) -> tuple[str, ...]:
    """Symbolic executability check.

    Fires stages in plan order (a stage fires when all its input stages
    already fired) and verifies that every stage fires, inputs only point
    backwards, and every output stream entry maps to a fired stage that
    produces exactly that kind.
    """
    problems = []
    seen = set()
    by_id = {}
    fired_kind = {}
    for st in plan.stages:
        if st.stage_id in by_id:
            problems.append(f"stage {st.stage_id}: duplicate stage id")
        by_id[st.stage_id] = st
        for inp in st.inputs:
            if inp not in seen:
                problems.append(f"stage {st.stage_id}: input {inp} not fired yet")
        if st.resource_type == "sensor" and st.inputs:
            problems.append(f"stage {st.stage_id}: sensor stages take no inputs")
        if st.resource_type not in ("sensor", "dpc"):
            problems.append(f"stage {st.stage_id}: unknown resource type {st.resource_type!r}")
        seen.add(st.stage_id)
        fired_kind[st.stage_id] = st.output
    for kind, stage_id in plan.output_stream:
        if stage_id not in seen:
            problems.append(f"output {kind.label}: source stage {stage_id} missing")
        elif fired_kind[stage_id] != kind:
            problems.append(
                f"output {kind.label}: stage {stage_id} produces "
                f"{fired_kind[stage_id].label!r} instead")
    return tuple(problems)
