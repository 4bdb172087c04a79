"""Seeded random KB generators for property tests.

Sizes are kept small enough that the brute-force oracles in oracles.py
stay tractable; every generator takes a random.Random so failures
reproduce from the seed.
"""

from __future__ import annotations

import random

from streamweave.kb import (
    AttributeSpec,
    DpcDescription,
    Kind,
    KnowledgeBase,
    Question,
    SensorDescription,
    Signature,
    TaskDescription,
)

DEFAULT_ATTRIBUTES = (
    AttributeSpec("accuracy", "benefit", default=0.5),
    AttributeSpec("energy", "cost", default=0.0),
    AttributeSpec("reliability", "benefit", default=0.5),
    AttributeSpec("latency", "cost", default=0.0),
)


def kind_pool(n):
    return [Kind(f"k{i}", "real", "count") for i in range(n)]


def random_compose_kb(rng: random.Random, max_kinds=6, max_producers_per_kind=3):
    """A KB sized for exhaustive solution enumeration by the oracle."""
    kinds = kind_pool(rng.randint(3, max_kinds))
    producer_count = {k: 0 for k in kinds}

    sensors = []
    for i in range(rng.randint(1, 8)):
        outputs = rng.sample(kinds, rng.randint(1, min(2, len(kinds))))
        active = rng.random() < 0.8
        usable = [k for k in outputs if producer_count[k] < max_producers_per_kind]
        if not usable:
            continue
        if active:
            for k in usable:
                producer_count[k] += 1
        sensors.append(SensorDescription(
            id=f"s{i}", name=f"sensor {i}", outputs=usable, active=active))

    dpcs = []
    for i in range(rng.randint(0, 8)):
        signatures = []
        for _ in range(rng.randint(1, 3)):
            output = rng.choice(kinds)
            if producer_count[output] >= max_producers_per_kind:
                continue
            others = [k for k in kinds if k != output]
            if not others:
                continue
            inputs = rng.sample(others, rng.randint(1, min(3, len(others))))
            sig = Signature(inputs=inputs, output=output)
            if sig in signatures:
                continue
            signatures.append(sig)
            producer_count[output] += 1
        if signatures:
            dpcs.append(DpcDescription(id=f"c{i}", name=f"dpc {i}", signatures=signatures))

    required = rng.sample(kinds, rng.randint(1, min(2, len(kinds))))
    task = TaskDescription(id="t0", name="task", required_stream=required)
    return KnowledgeBase(sensors=sensors, dpcs=dpcs, tasks=[task])


def random_context_kb(rng: random.Random, max_kinds=10):
    """A KB for saturation tests; cycles and unreachable kinds welcome."""
    kinds = kind_pool(rng.randint(3, max_kinds))
    sensors = []
    for i in range(rng.randint(1, 6)):
        outputs = rng.sample(kinds, rng.randint(1, min(3, len(kinds))))
        sensors.append(SensorDescription(
            id=f"s{i}", name=f"sensor {i}", outputs=outputs,
            active=rng.random() < 0.7))
    dpcs = []
    for i in range(rng.randint(0, 8)):
        signatures = []
        for _ in range(rng.randint(1, 3)):
            output = rng.choice(kinds)
            others = [k for k in kinds if k != output]
            if not others:
                continue
            sig = Signature(inputs=rng.sample(others, rng.randint(1, min(3, len(others)))),
                            output=output)
            if sig not in signatures:
                signatures.append(sig)
        if signatures:
            dpcs.append(DpcDescription(id=f"c{i}", name=f"dpc {i}", signatures=signatures))
    return KnowledgeBase(sensors=sensors, dpcs=dpcs)


def random_qa_kb(rng: random.Random, max_tasks=50, max_concepts=10):
    """Tasks with overlapping concept bindings plus one question per concept."""
    n_concepts = rng.randint(1, max_concepts)
    concepts = [f"c{i}" for i in range(n_concepts)]
    vocab = {c: [f"v{j}" for j in range(rng.randint(1, 4))] for c in concepts}
    questions = [Question(id=f"q-{c}", text=f"which {c}?", concept=c) for c in concepts]
    kind = Kind("k0", "real", "count")
    tasks = []
    for i in range(rng.randint(1, max_tasks)):
        bound = rng.sample(concepts, rng.randint(0, n_concepts))
        bindings = [(c, rng.choice(vocab[c])) for c in bound]
        tasks.append(TaskDescription(
            id=f"t{i:02d}", name=f"task {i}", required_stream=[kind],
            concept_bindings=bindings))
    sensor = SensorDescription(id="s0", name="sensor", outputs=[kind])
    return KnowledgeBase(sensors=[sensor], tasks=tasks, questions=questions)


def random_cost_fixture(rng: random.Random):
    """A KB plus composed solutions suitable for ranking tests."""
    from streamweave import composer

    while True:
        base = random_compose_kb(rng)
        sensors = [
            SensorDescription(
                id=s.id, name=s.name, outputs=s.outputs, active=s.active,
                context={
                    "accuracy": round(rng.uniform(0.5, 1.0), 2),
                    "energy": round(rng.uniform(0.1, 3.0), 2),
                    "reliability": round(rng.uniform(0.5, 1.0), 2),
                    "latency": round(rng.uniform(0.0, 2.0), 2),
                })
            for s in base.sensors
        ]
        dpcs = [
            DpcDescription(
                id=d.id, name=d.name, signatures=d.signatures,
                context={
                    "accuracy": round(rng.uniform(0.5, 1.0), 2),
                    "energy": round(rng.uniform(0.1, 3.0), 2),
                })
            for d in base.dpcs
        ]
        kb = KnowledgeBase(attributes=DEFAULT_ATTRIBUTES, sensors=sensors,
                           dpcs=dpcs, tasks=base.tasks)
        solutions = composer.compose(kb, "t0").solutions
        if len(solutions) >= 2:
            return kb, solutions
