"""Acceptance criteria A1-A10.

Each test enforces one criterion at its stated tolerance and prints one
PASS line (visible with `pytest -s` or in the failure output otherwise).
Performance bounds follow the desk-scale substitutes with the allowed 2x
tolerance.
"""

import json
import random
import time
from dataclasses import replace
from pathlib import Path

from streamweave import composer, context, cost, deploy, qa
from streamweave import kb as kb_mod
from streamweave.composer import ComposeLimits, DpcUse, SensorUse

from conftest import DATA
from kbgen import random_compose_kb, random_context_kb, random_qa_kb
from oracles import (
    oracle_answers_for,
    oracle_available_questions,
    oracle_discover,
    oracle_matching_tasks,
    oracle_solutions,
    solution_normal_form,
)


def _report(criterion, detail=""):
    suffix = f"  ({detail})" if detail else ""
    print(f"{criterion}: PASS{suffix}")


def test_a1_use_case_1_reproduction(agri_kb):
    t0 = time.perf_counter()
    result = composer.compose(agri_kb, "task-phytophtora")
    elapsed = time.perf_counter() - t0

    assert len(result.solutions) == 1
    sol = result.solutions[0]
    stress = kb_mod.Kind("airStress", "text", "none")
    disease = kb_mod.Kind("phytophtoraDisease", "boolean", "none")
    expected_nodes = frozenset({
        SensorUse("s-at", kb_mod.Kind("airTemperature", "real", "celsius")),
        SensorUse("s-ah", kb_mod.Kind("airHumidity", "real", "percent")),
        SensorUse("s-lw", kb_mod.Kind("leafWetness", "real", "percent")),
        DpcUse("c-1", 0, stress),
        DpcUse("c-2", 0, disease),
    })
    assert sol.nodes == expected_nodes
    assert composer.expression(agri_kb, sol) == "((s-ah, s-at) => c-1, s-lw) => c-2"
    assert sol.sinks == ((disease, DpcUse("c-2", 0, disease)),)
    assert elapsed < 0.1, f"compose took {elapsed * 1000:.1f} ms"
    _report("A1", f"{elapsed * 1000:.1f} ms")


def test_a2_use_case_2_reproduction(pollution_kb):
    result = composer.compose(pollution_kb, "task-pollution")
    normal_forms = {solution_normal_form(s) for s in result.solutions}
    pollution = kb_mod.Kind("airPollution", "real", "index")

    def kinds(*labels):
        lookup = {k.label: k for k in pollution_kb.kinds}
        return [lookup[label] for label in labels]

    def form(sensor_ids, dpc_id, sig):
        entries = {(k, ("sensor", s)) for s, k in sensor_ids}
        entries.add((pollution, ("dpc", dpc_id, sig)))
        return frozenset(entries)

    cm, cd, mo, me, nd, at = kinds("carbonMonoxide", "carbonDioxide",
                                   "molecularOxygen", "methane",
                                   "nitrogenDioxide", "airTemperature")
    expected = {
        form([("s-cm", cm), ("s-cd", cd), ("s-mo", mo), ("s-me", me), ("s-nd", nd)],
             "c-4", 0),
        form([("s-cd", cd), ("s-nd", nd)], "c-3", 0),
        form([("s-at", at), ("s-cd", cd), ("s-me", me)], "c-4", 1),
    }
    assert normal_forms == expected
    hashes = [composer.canonical_hash(s) for s in result.solutions]
    assert hashes == sorted(hashes) and len(set(hashes)) == 3
    _report("A2", "3 solutions incl. both c-4 signatures")


def test_a3_recommendation_reproduction(partial_kb):
    result = composer.compose(partial_kb, "task-pollution")
    assert result.solutions == ()
    got = {frozenset(k.label for k in ms.kinds) for ms in result.report.missing_sets}
    assert got == {frozenset({"nitrogenDioxide"}), frozenset({"airTemperature"})}
    _report("A3", "missing sets {nitrogenDioxide}, {airTemperature}")


def test_a4_composer_oracle_equivalence():
    rng = random.Random(2024)
    limits = ComposeLimits(max_solutions=5000)
    t0 = time.perf_counter()
    agreements = 0
    for _ in range(500):
        kb = random_compose_kb(rng)
        want = oracle_solutions(kb, "t0")
        result = composer.compose(kb, "t0", limits)
        got = {solution_normal_form(s) for s in result.solutions}
        assert got == want, "solution set diverges from brute-force oracle"
        for sol in result.solutions:
            assert composer.validate_solution(kb, sol) == ()
            plan = deploy.generate_plan(kb, sol)
            assert deploy.check_plan(plan) == ()
        agreements += 1
    elapsed = time.perf_counter() - t0
    assert agreements == 500
    assert elapsed < 60.0, f"suite took {elapsed:.1f} s"
    _report("A4", f"500/500 KBs agree in {elapsed:.1f} s")


def test_a5_context_fixpoint_oracle():
    rng = random.Random(2025)
    for _ in range(500):
        kb = random_context_kb(rng)
        available, table = context.discover(kb)
        want_tiers, want_derivations = oracle_discover(kb)
        assert available == want_tiers
        assert dict(table.derivations) == want_derivations

        # monotonicity: a new sensor never shrinks the available set
        fresh = kb_mod.Kind("fresh", "real", "count")
        grown = replace(kb, sensors=kb.sensors + (
            kb_mod.SensorDescription(id="s-x", name="", outputs=[fresh]),))
        grown_available, _ = context.discover(grown)
        assert set(available) <= set(grown_available)

        # order independence: shuffled collections, same fixpoint
        sensors, dpcs = list(kb.sensors), list(kb.dpcs)
        rng.shuffle(sensors)
        rng.shuffle(dpcs)
        shuffled, _ = context.discover(kb_mod.KnowledgeBase(sensors=sensors, dpcs=dpcs))
        assert shuffled == available
    _report("A5", "500/500 KBs match the naive saturation oracle")


def test_a6_qa_properties():
    rng = random.Random(2026)
    for _ in range(500):
        kb = random_qa_kb(rng)
        constraints = qa.ConstraintSet()
        # build a random valid dialogue, checking properties along the way
        for _ in range(rng.randint(0, 4)):
            questions = qa.available_questions(kb, constraints)
            if not questions:
                break
            question = rng.choice(questions)
            offered = qa.answers_for(kb, constraints, question.id)
            assert offered, "available question offered no answers (dead end)"
            before = {t.id for t in qa.matching_tasks(kb, constraints)}
            constraints = constraints.with_answer(question.id, rng.choice(offered))
            after = {t.id for t in qa.matching_tasks(kb, constraints)}
            assert after and after <= before, "narrowing must be monotone, non-empty"

        assert list(qa.matching_tasks(kb, constraints)) == \
            oracle_matching_tasks(kb, constraints)
        assert {q.id for q in qa.available_questions(kb, constraints)} == \
            oracle_available_questions(kb, constraints)
        for question in qa.available_questions(kb, constraints):
            assert qa.answers_for(kb, constraints, question.id) == \
                tuple(oracle_answers_for(kb, constraints, question.id))

        entries = list(constraints.entries)
        rng.shuffle(entries)
        assert qa.matching_tasks(kb, qa.ConstraintSet(tuple(entries))) == \
            qa.matching_tasks(kb, constraints)
    _report("A6", "500/500 KBs: monotone, order-independent, oracle-equal")


def test_a7_cost_properties():
    from test_cost import POLARITY, _dyadic, _random_raws

    rng = random.Random(2027)
    attrs = sorted(POLARITY)
    for _ in range(500):
        n = rng.randint(1, 6)
        raws = _random_raws(rng, n, attrs)
        weights = {a: rng.randint(0, 5) / 4.0 for a in attrs}
        if not any(weights.values()):
            weights["energy"] = 1.0
        total_w = sum(weights.values())
        weights = {a: w / total_w for a, w in weights.items()}
        base = cost.score_raws(raws, weights, POLARITY)

        # exact scale invariance under positive affine transforms
        target = rng.choice(attrs)
        a, b = rng.choice([0.5, 2.0, 3.0, 4.0]), float(rng.randint(-8, 8))
        transformed = [{k: (a * v + b if k == target else v) for k, v in row.items()}
                       for row in raws]
        assert cost.score_raws(transformed, weights, POLARITY) == base

        # weight-zero irrelevance
        dead = rng.choice(attrs)
        zeroed = dict(weights, **{dead: 0.0})
        if any(zeroed.values()):
            before = [t for _, t in cost.score_raws(raws, zeroed, POLARITY)]
            perturbed = [dict(row, **{dead: _dyadic(rng)}) for row in raws]
            after = [t for _, t in cost.score_raws(perturbed, zeroed, POLARITY)]
            assert before == after

        # dominance: a candidate strictly better on a positively weighted
        # attribute (and no worse elsewhere) never ranks below
        if n >= 1:
            strict = rng.choice([a for a in attrs if weights[a] > 0])
            dominator = {}
            for attr in attrs:
                v = raws[0][attr]
                delta = 0.25 if attr == strict else rng.choice([0.0, 0.25])
                if POLARITY[attr] == "benefit":
                    dominator[attr] = v + delta
                else:
                    dominator[attr] = max(0.0, v - delta)
            if POLARITY[strict] == "cost" and dominator[strict] == raws[0][strict]:
                raws[0] = dict(raws[0], **{strict: raws[0][strict] + 0.25})
            scored = cost.score_raws(raws + [dominator], weights, POLARITY)
            assert scored[-1][1] < scored[0][1]
    _report("A7", "500/500 rounds: scale-invariant, zero-weight-blind, dominance-safe")


def _write_scale_kb(path, n):
    kinds = [{"label": f"m{i}", "value_type": "real", "unit": "count"} for i in range(n)]
    kinds += [{"label": f"d{j}", "value_type": "real", "unit": "index"} for j in range(n)]
    doc = {
        "version": "1",
        "attributes": {
            "accuracy": {"polarity": "benefit", "default": 0.5, "aggregate": "min"},
            "energy": {"polarity": "cost", "default": 0.0, "aggregate": "sum"},
        },
        "kinds": kinds,
        "sensors": [
            {"id": f"s{i:05d}", "name": f"sensor {i}", "outputs": [f"m{i}"],
             "active": True, "context": {"accuracy": 0.9, "energy": 1.0}}
            for i in range(n)
        ],
        "dpcs": [
            {"id": f"c{j:05d}", "name": f"dpc {j}",
             "signatures": [{
                 "inputs": [f"m{3 * j % n}", f"m{(3 * j + 1) % n}", f"m{(3 * j + 2) % n}"],
                 "output": f"d{j}"}],
             "context": {"accuracy": 0.9, "energy": 1.0}}
            for j in range(n)
        ],
        "tasks": [
            {"id": f"t{i:05d}", "name": f"task {i}", "required_stream": [f"d{i}"],
             "concepts": {"domain": f"dom{i % 20}", "goal": f"goal{i % 50}",
                          "region": f"reg{i % 100}"}}
            for i in range(n)
        ],
        "questions": [
            {"id": "q-domain", "text": "domain?", "concept": "domain"},
            {"id": "q-goal", "text": "goal?", "concept": "goal"},
            {"id": "q-region", "text": "region?", "concept": "region"},
        ],
    }
    path.write_text(json.dumps(doc))


def test_a8_scaled_performance(tmp_path):
    n = 10_000
    path = tmp_path / "scale.kb.json"
    _write_scale_kb(path, n)

    size_mb = path.stat().st_size / 1e6
    assert size_mb < 200.0, f"on-disk KB is {size_mb:.1f} MB"

    t0 = time.perf_counter()
    kb = kb_mod.load_kb(path)
    load_s = time.perf_counter() - t0
    assert load_s < 40.0, f"load took {load_s:.1f} s"
    assert len(kb.sensors) == n and len(kb.dpcs) == n and len(kb.tasks) == n

    constraints = qa.ConstraintSet((("q-domain", "dom3"), ("q-goal", "goal13")))
    t0 = time.perf_counter()
    tasks = qa.matching_tasks(kb, constraints)
    query_s = time.perf_counter() - t0
    assert query_s < 3.0, f"task filter took {query_s:.2f} s"
    assert len(tasks) == 100

    t0 = time.perf_counter()
    result = composer.compose(kb, "t00042")
    compose_s = time.perf_counter() - t0
    assert compose_s < 5.0, f"compose took {compose_s:.2f} s"
    assert len(result.solutions) == 1 and len(result.solutions[0].nodes) == 4

    _report("A8", f"size {size_mb:.1f} MB, load {load_s:.1f} s, "
                  f"filter {query_s * 1000:.0f} ms, compose {compose_s * 1000:.0f} ms")


def test_a9_plan_determinism(agri_kb, pollution_kb):
    sol = composer.compose(agri_kb, "task-phytophtora").solutions[0]

    emissions = {deploy.emit_plan(deploy.generate_plan(agri_kb, sol))
                 for _ in range(10)}
    assert len(emissions) == 1

    permuted = composer.Solution(
        task_id=sol.task_id,
        nodes=frozenset(sorted(sol.nodes, key=composer.node_key, reverse=True)),
        edges=frozenset(sorted(sol.edges, key=lambda e: composer.node_key(e[1]))),
        sinks=sol.sinks)
    assert deploy.emit_plan(deploy.generate_plan(agri_kb, permuted)) in emissions

    golden = (DATA / "golden" / "agri-plan.json").read_text()
    assert emissions == {golden}

    checked = 0
    for kb, task in ((agri_kb, "task-phytophtora"), (pollution_kb, "task-pollution")):
        for solution in composer.compose(kb, task).solutions:
            plan = deploy.generate_plan(kb, solution)
            assert deploy.check_plan(plan) == ()
            assert deploy.parse_plan(deploy.emit_plan(plan)) == plan
            checked += 1
    # A4's loop additionally plan-checks every randomly composed solution.
    _report("A9", f"byte-identical over 10 runs; {checked} plans executable")


def test_a10_end_to_end_transcript(tmp_path):
    import shutil
    from fastapi.testclient import TestClient
    from streamweave import service

    kb_file = tmp_path / "kb.json"
    shutil.copy(DATA / "combined.kb.json", kb_file)
    client = TestClient(service.create_app(kb_file))

    steps = json.loads((Path(__file__).parent / "data/golden_transcript.json").read_text())
    sid = None
    for step in steps:
        path = step["path"].replace("$SID", sid or "$SID")
        response = client.request(step["method"], path, json=step["body"])
        assert response.status_code == step["status"], path
        payload = response.json()
        if step["path"] == "/sessions":
            sid = payload["session_id"]
        normalized = json.loads(
            json.dumps(payload, sort_keys=True).replace(sid, "$SID"))
        assert normalized == step["response"], f"divergence at {path}"
    _report("A10", f"{len(steps)}-step golden transcript matches")
