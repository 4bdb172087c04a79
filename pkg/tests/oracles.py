"""Brute-force reference implementations the engine is checked against.

Each oracle uses a deliberately different formulation from the engine:
solution enumeration tries every per-kind producer choice function and
filters, saturation repeatedly rescans all signatures, the QA oracles scan
tasks linearly, and the scorer recomputes formulas inline. Keep them dumb;
their value is independence.
"""

from __future__ import annotations

from streamweave.composer import SensorUse


def backward_relevant_kinds(kb, required):
    """Kinds that could possibly appear in a solution for `required`."""
    relevant = set(required)
    stack = list(required)
    while stack:
        kind = stack.pop()
        for dpc, i in kb.signature_producers_of(kind):
            for inp in dpc.signatures[i].inputs:
                if inp not in relevant:
                    relevant.add(inp)
                    stack.append(inp)
    return relevant


def oracle_solutions(kb, task_id):
    """Every valid shared-subtree solution, as a set of normal forms.

    A normal form is frozenset of (kind, producer tag): producer tags are
    ("sensor", id) or ("dpc", id, signature index).
    """
    task = kb.task(task_id)
    required = list(dict.fromkeys(task.required_stream))
    kinds = sorted(backward_relevant_kinds(kb, required))
    index = {k: i for i, k in enumerate(kinds)}
    required_idx = {index[k] for k in required}

    producers = []
    for k in kinds:
        opts = []
        for s in kb.producers_of(k):
            if s.active:
                opts.append((("sensor", s.id), ()))
        for d, i in kb.signature_producers_of(k):
            inputs = tuple(index[inp] for inp in d.signatures[i].inputs
                           if inp in index)
            # An input outside the relevant set can never be produced by a
            # relevant solution, but it still has to be produced: keep the
            # signature only if all inputs are relevant.
            if len(inputs) == len(d.signatures[i].inputs):
                opts.append((("dpc", d.id, i), inputs))
        producers.append(opts)

    n = len(kinds)
    solutions = set()
    choice = [None] * n

    def valid():
        domain = {i for i in range(n) if choice[i] is not None}
        if not required_idx <= domain:
            return False
        for i in domain:
            _, inputs = choice[i]
            if not set(inputs) <= domain:
                return False
        # no dead kinds: everything assigned must serve the required set
        reached = set(required_idx)
        stack = list(required_idx)
        while stack:
            i = stack.pop()
            for j in choice[i][1]:
                if j not in reached:
                    reached.add(j)
                    stack.append(j)
        if reached != domain:
            return False
        # acyclicity via Kahn over the dependency relation
        indeg = {i: 0 for i in domain}
        consumers = {i: [] for i in domain}
        for i in domain:
            for j in choice[i][1]:
                indeg[i] += 1
                consumers[j].append(i)
        queue = [i for i in domain if indeg[i] == 0]
        seen = 0
        while queue:
            j = queue.pop()
            seen += 1
            for i in consumers[j]:
                indeg[i] -= 1
                if indeg[i] == 0:
                    queue.append(i)
        return seen == len(domain)

    def rec(i):
        if i == n:
            if valid():
                solutions.add(frozenset(
                    (kinds[j], choice[j][0]) for j in range(n)
                    if choice[j] is not None))
            return
        rec(i + 1)
        for opt in producers[i]:
            choice[i] = opt
            rec(i + 1)
        choice[i] = None

    rec(0)
    return solutions


def solution_normal_form(solution):
    out = set()
    for node in solution.nodes:
        if isinstance(node, SensorUse):
            out.add((node.kind, ("sensor", node.sensor_id)))
        else:
            out.add((node.kind, ("dpc", node.dpc_id, node.signature)))
    return frozenset(out)


def oracle_discover(kb):
    """Naive saturation: full rescans of every signature until stable."""
    tiers = {}
    for s in kb.sensors:
        if s.active:
            for k in s.outputs:
                tiers[k] = 0
    derivations = {}
    level = 0
    while True:
        level += 1
        additions = {}
        for d in kb.dpcs:
            for i, sig in enumerate(d.signatures):
                if sig.output in tiers:
                    continue
                if all(k in tiers for k in sig.inputs):
                    key = (d.id, i)
                    if sig.output not in additions or key < additions[sig.output]:
                        additions[sig.output] = key
        if not additions:
            break
        for kind, key in additions.items():
            tiers[kind] = level
            derivations[kind] = key
    return tiers, derivations


def oracle_matching_tasks(kb, constraints):
    out = []
    for t in kb.tasks:
        ok = True
        for qid, answer in constraints.entries:
            concept = kb.question(qid).concept
            if t.binding(concept) != answer:
                ok = False
                break
        if ok:
            out.append(t)
    return sorted(out, key=lambda t: t.id)


def oracle_available_questions(kb, constraints):
    tasks = oracle_matching_tasks(kb, constraints)
    answered = {q for q, _ in constraints.entries}
    concepts = set()
    for t in tasks:
        concepts.update(c for c, _ in t.concept_bindings)
    out = set()
    for q in kb.questions:
        if q.concept in concepts and q.id not in answered:
            out.add(q.id)
    return out


def oracle_answers_for(kb, constraints, question_id):
    concept = kb.question(question_id).concept
    values = set()
    for t in oracle_matching_tasks(kb, constraints):
        for c, v in t.concept_bindings:
            if c == concept:
                values.add(v)
    return sorted(values)


def oracle_rank(kb, solutions, weights):
    """Naive re-derivation of scores; returns totals in input order."""
    specs = {a.name: a for a in kb.attributes}
    total_w = sum(weights.values())
    raws = []
    for solution in solutions:
        row = {}
        for name, spec in specs.items():
            values = []
            for node in solution.nodes:
                if isinstance(node, SensorUse):
                    ctx = kb.sensor(node.sensor_id).context
                else:
                    ctx = kb.dpc(node.dpc_id).context
                values.append(ctx.get(name))
            if spec.aggregate == "sum":
                row[name] = sum(spec.default if v is None else v for v in values)
            else:
                present = [v for v in values if v is not None]
                row[name] = min(present) if present else spec.default
        raws.append(row)
    totals = []
    for row in raws:
        total = 0.0
        for name, value in row.items():
            column = [r[name] for r in raws]
            lo, hi = min(column), max(column)
            if hi == lo:
                norm = 0.0
            elif specs[name].polarity == "benefit":
                norm = 1.0 - (value - lo) / (hi - lo)
            else:
                norm = (value - lo) / (hi - lo)
            total += weights.get(name, 0.0) / total_w * norm
        totals.append(total)
    return raws, totals
