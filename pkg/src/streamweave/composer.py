"""Composition of sensors and DPCs into solution DAGs.

Given a task, enumerate every distinct way the KB's active sensors and DPC
signatures can be wired into a directed acyclic graph producing the task's
required stream. Search runs backwards from each required kind: sensor
alternatives are tried before DPC alternatives, DPC alternatives recurse
into their signature inputs, and a signature needing a kind already being
expanded on the current path is pruned (cycle cut). When nothing works,
the recommendation report lists minimal sets of kinds that would unblock
at least one solution if they became sensable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import combinations, product
from typing import Union

from .kb import Kind, KnowledgeBase, Violation


class ComposeError(Exception):
    pass


class UnknownTaskError(ComposeError):
    pass


@dataclass(frozen=True)
class SensorUse:
    """A solution node reading one kind from a sensor."""

    sensor_id: str
    kind: Kind


@dataclass(frozen=True)
class DpcUse:
    """A solution node running one DPC signature to produce a kind."""

    dpc_id: str
    signature: int
    kind: Kind


Node = Union[SensorUse, DpcUse]


def node_key(node: Node):
    if isinstance(node, SensorUse):
        return ("sensor", node.sensor_id, -1, node.kind)
    return ("dpc", node.dpc_id, node.signature, node.kind)


@dataclass(frozen=True)
class Solution:
    """A validated DAG whose sinks produce the task's required stream.

    ``edges`` are (producer, consumer, kind): the producer's output feeds
    the consumer's signature input of that kind. ``sinks`` designates the
    node serving each required kind.
    """

    task_id: str
    nodes: frozenset
    edges: frozenset
    sinks: tuple[tuple[Kind, Node], ...]

    def sink_for(self, kind) -> Node:
        for k, node in self.sinks:
            if k == kind:
                return node
        raise KeyError(kind)


@dataclass(frozen=True)
class PartialSolution:
    """A grounded sub-DAG producing one kind (the root node's output)."""

    root: Node
    nodes: frozenset
    edges: frozenset


@dataclass(frozen=True)
class SatisfyResult:
    """Per-kind alternatives plus the kinds found unproducible on the way."""

    alternatives: tuple[PartialSolution, ...]
    missing: tuple[Kind, ...]


@dataclass(frozen=True)
class MissingSet:
    """A minimal set of kinds that unlocks >=1 solution if newly sensable."""

    kinds: tuple[Kind, ...]
    unlocks: tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class RecommendationReport:
    unsatisfiable_kinds: tuple[Kind, ...] = ()
    missing_sets: tuple[MissingSet, ...] = ()


@dataclass(frozen=True)
class ComposeLimits:
    max_depth: int = 16
    max_solutions: int = 64
    allow_shared_subtrees: bool = True

    def __post_init__(self):
        if self.max_depth < 1 or self.max_solutions < 1:
            raise ValueError("compose limits must be positive")


@dataclass(frozen=True)
class ComposeResult:
    solutions: tuple[Solution, ...]
    report: RecommendationReport
    truncated: bool = False


def canonical_hash(solution: Solution) -> str:
    """Stable content hash: equal for solutions with the same node set,
    edge relation, and sink assignment, regardless of construction order."""
    parts = []
    for node in sorted(solution.nodes, key=node_key):
        parts.append(repr(node_key(node)))
    for producer, consumer, kind in sorted(
            solution.edges, key=lambda e: (node_key(e[0]), node_key(e[1]), e[2])):
        parts.append(repr((node_key(producer), node_key(consumer), kind)))
    for kind, node in solution.sinks:
        parts.append(repr((kind, node_key(node))))
    blob = "\n".join(parts).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _producers(kb, kind):
    """Choice order implements sensor preference: direct sensor outputs
    first, then DPC signatures."""
    out = [SensorUse(s.id, kind) for s in kb.producers_of(kind) if s.active]
    out.extend(DpcUse(d.id, i, kind) for d, i in kb.signature_producers_of(kind))
    return out


def _sig_inputs(kb, node):
    return kb.dpc(node.dpc_id).signatures[node.signature].inputs


# -- shared-subtree enumeration ----------------------------------------------


class _SharedSearch:
    """Backtracking over a global kind -> producer assignment.

    With shared subtrees, one solution uses exactly one producer per kind;
    every consumer of that kind is wired to the same node. An assigned
    kind's derivation is always fully grounded before anything reuses it,
    so reuse can never introduce a cycle.
    """

    def __init__(self, kb, limits):
        self.kb = kb
        self.limits = limits
        self.assignment = {}
        self.missing = set()
        self.depth_pruned = False

    def solve(self, goals, path):
        if not goals:
            yield None
            return
        kind, rest = goals[0], goals[1:]
        if kind in self.assignment:
            yield from self.solve(rest, path)
            return
        alternatives = _producers(self.kb, kind)
        if not alternatives:
            self.missing.add(kind)
            return
        for producer in alternatives:
            if isinstance(producer, SensorUse):
                self.assignment[kind] = producer
                yield from self.solve(rest, path)
                del self.assignment[kind]
            else:
                inputs = _sig_inputs(self.kb, producer)
                new_path = path | {kind}
                if any(i in new_path for i in inputs):
                    continue
                if len(new_path) > self.limits.max_depth:
                    self.depth_pruned = True
                    continue
                self.assignment[kind] = producer
                for _ in self.solve(inputs, new_path):
                    yield from self.solve(rest, path)
                del self.assignment[kind]

    def materialize(self, task):
        nodes = frozenset(self.assignment.values())
        edges = set()
        for kind, node in self.assignment.items():
            if isinstance(node, DpcUse):
                for i in _sig_inputs(self.kb, node):
                    edges.add((self.assignment[i], node, i))
        sinks = tuple(sorted(
            ((k, self.assignment[k]) for k in set(task.required_stream)),
            key=lambda kv: kv[0]))
        return Solution(task_id=task.id, nodes=nodes, edges=frozenset(edges), sinks=sinks)


# -- independent-subtree enumeration ------------------------------------------


def _alternatives(kb, kind, path, limits, missing, cap):
    """All grounded sub-DAGs producing `kind`, sensors first.

    Merging input subtrees can make two branches route different producers
    into the same DPC node for the same input kind; such combinations are
    dropped because a node takes exactly one edge per signature input.
    """
    results = []
    producers = _producers(kb, kind)
    if not producers:
        missing.add(kind)
        return results
    for producer in producers:
        if len(results) >= cap:
            break
        if isinstance(producer, SensorUse):
            results.append(PartialSolution(
                root=producer, nodes=frozenset([producer]), edges=frozenset()))
            continue
        inputs = _sig_inputs(kb, producer)
        new_path = path | {kind}
        if any(i in new_path for i in inputs):
            continue
        if len(new_path) > limits.max_depth:
            continue
        per_input = [_alternatives(kb, i, new_path, limits, missing, cap) for i in inputs]
        if any(not alts for alts in per_input):
            continue
        for combo in product(*per_input):
            if len(results) >= cap:
                break
            nodes = {producer}
            edges = set()
            ok = True
            for i, part in zip(inputs, combo):
                nodes.update(part.nodes)
                edges.update(part.edges)
                edges.add((part.root, producer, i))
            fanin = {}
            for p, c, k in edges:
                key = (c, k)
                if key in fanin and fanin[key] != p:
                    ok = False
                    break
                fanin[key] = p
            if ok:
                results.append(PartialSolution(
                    root=producer, nodes=frozenset(nodes), edges=frozenset(edges)))
    return results


def satisfy_kind(kb, kind, path=frozenset(), limits=ComposeLimits()) -> SatisfyResult:
    """Alternatives for producing a single kind, with missing-kind records.

    ``path`` is the set of kinds already being expanded on the caller's
    recursion stack; signatures needing any of them are pruned so the
    search always terminates, even on cyclic DPC graphs.
    """
    missing = set()
    alts = _alternatives(kb, kind, frozenset(path), limits, missing,
                         cap=limits.max_solutions)
    return SatisfyResult(alternatives=tuple(alts), missing=tuple(sorted(missing)))


def _merge_independent(parts, task):
    nodes = set()
    edges = set()
    for part in parts:
        nodes.update(part.nodes)
        edges.update(part.edges)
    fanin = {}
    for p, c, k in edges:
        key = (c, k)
        if key in fanin and fanin[key] != p:
            return None
        fanin[key] = p
    sinks = []
    for kind, part in zip(task.required_stream, parts):
        sinks.append((kind, part.root))
    sinks = tuple(sorted(set(sinks)))
    return Solution(task_id=task.id, nodes=frozenset(nodes),
                    edges=frozenset(edges), sinks=sinks)


# -- fixpoint helpers for the recommender -------------------------------------


def _derivable(kb, base):
    """Least fixpoint of signature application over a set of sensable kinds."""
    have = set(base)
    changed = True
    while changed:
        changed = False
        for d in kb.dpcs:
            for sig in d.signatures:
                if sig.output not in have and all(i in have for i in sig.inputs):
                    have.add(sig.output)
                    changed = True
    return have


def _need_closure(kb, kinds):
    """Kinds transitively needed to produce `kinds` through any signature."""
    closure = set(kinds)
    frontier = list(kinds)
    while frontier:
        kind = frontier.pop()
        for d, i in kb.signature_producers_of(kind):
            for inp in d.signatures[i].inputs:
                if inp not in closure:
                    closure.add(inp)
                    frontier.append(inp)
    return closure


def _newly_fired(kb, base, extended):
    before = _derivable(kb, base)
    after = _derivable(kb, extended)
    unlocked = []
    for d in kb.dpcs:
        for i, sig in enumerate(d.signatures):
            if all(k in after for k in sig.inputs) and not all(k in before for k in sig.inputs):
                unlocked.append((d.id, i))
    return tuple(sorted(unlocked))


def _recommend(kb, task) -> RecommendationReport:
    active = {k for s in kb.sensors if s.active for k in s.outputs}
    derivable = _derivable(kb, active)
    required = set(task.required_stream)
    unsatisfiable = tuple(sorted(required - derivable))
    if not unsatisfiable:
        return RecommendationReport()

    closure = _need_closure(kb, required)
    candidates = set(closure - derivable - required)
    # A required kind with no producer of any sort can only be sensed
    # directly, so it is its own recommendation.
    for kind in unsatisfiable:
        if not kb.producers_of(kind) and not kb.signature_producers_of(kind):
            candidates.add(kind)

    missing_sets = _minimal_enabling_sets(kb, active, required, sorted(candidates))
    if not missing_sets:
        # Last resort: allow recommending direct sensing of the required
        # kinds themselves (e.g. mutually cyclic signatures).
        fallback = sorted(candidates | set(unsatisfiable))
        missing_sets = _minimal_enabling_sets(kb, active, required, fallback)

    reported = []
    for kinds in missing_sets:
        unlocked = _newly_fired(kb, active, active | set(kinds))
        reported.append(MissingSet(kinds=kinds, unlocks=unlocked))
    return RecommendationReport(unsatisfiable_kinds=unsatisfiable,
                                missing_sets=tuple(reported))


def _minimal_enabling_sets(kb, active, required, candidates, exhaustive_up_to=3):
    """Hitting-set style search: exhaustive (hence exactly minimal) up to
    size 3, greedy shrinking beyond that."""
    found = []
    for size in range(1, min(exhaustive_up_to, len(candidates)) + 1):
        for combo in combinations(candidates, size):
            if any(set(f) <= set(combo) for f in found):
                continue
            if required <= _derivable(kb, active | set(combo)):
                found.append(tuple(sorted(combo)))
    if not found and candidates:
        full = set(candidates)
        if required <= _derivable(kb, active | full):
            for kind in sorted(full):
                trial = full - {kind}
                if required <= _derivable(kb, active | trial):
                    full = trial
            found.append(tuple(sorted(full)))
    found.sort(key=lambda kinds: (len(kinds), kinds))
    return found


# -- compose -------------------------------------------------------------------


def compose(kb: KnowledgeBase, task_id, limits: ComposeLimits = ComposeLimits()) -> ComposeResult:
    """Enumerate all distinct solutions for a task, ordered by canonical hash.

    Exceeding the limits is not an error; the result is flagged truncated.
    An empty solution list comes with a recommendation report explaining
    which kinds are unsatisfiable and what would unblock them.
    """
    if not kb.has_task(task_id):
        raise UnknownTaskError(f"unknown task {task_id!r}")
    task = kb.task(task_id)

    by_hash = {}
    truncated = False

    if limits.allow_shared_subtrees:
        search = _SharedSearch(kb, limits)
        gen = search.solve(tuple(task.required_stream), frozenset())
        while True:
            step = next(gen, _DONE)
            if step is _DONE:
                break
            solution = search.materialize(task)
            by_hash.setdefault(canonical_hash(solution), solution)
            if len(by_hash) >= limits.max_solutions:
                if next(gen, _DONE) is not _DONE:
                    truncated = True
                break
        truncated = truncated or search.depth_pruned
    else:
        missing = set()
        per_kind = [
            _alternatives(kb, kind, frozenset(), limits, missing,
                          cap=limits.max_solutions)
            for kind in task.required_stream
        ]
        truncated = any(len(alts) >= limits.max_solutions for alts in per_kind)
        if all(per_kind):
            for combo in product(*per_kind):
                solution = _merge_independent(combo, task)
                if solution is None:
                    continue
                by_hash.setdefault(canonical_hash(solution), solution)
                if len(by_hash) >= limits.max_solutions:
                    truncated = True
                    break

    solutions = tuple(by_hash[h] for h in sorted(by_hash))
    if solutions:
        report = RecommendationReport()
    else:
        report = _recommend(kb, task)
    return ComposeResult(solutions=solutions, report=report, truncated=truncated)


_DONE = object()


# -- validation ----------------------------------------------------------------


def validate_solution(kb: KnowledgeBase, solution: Solution) -> tuple[Violation, ...]:
    """Independent structural check of a solution against the KB.

    Empty result iff the solution holds every invariant: existing
    references, exact kind matches along edges, one edge per signature
    input, acyclicity, no dead nodes, and full coverage of the task's
    required stream.
    """
    out = []

    def nid(node):
        if isinstance(node, SensorUse):
            return f"node:sensor:{node.sensor_id}:{node.kind.label}"
        return f"node:dpc:{node.dpc_id}[{node.signature}]:{node.kind.label}"

    for node in sorted(solution.nodes, key=node_key):
        if isinstance(node, SensorUse):
            try:
                sensor = kb.sensor(node.sensor_id)
            except KeyError:
                out.append(Violation(nid(node), "sensor_id", "unknown sensor"))
                continue
            if node.kind not in sensor.outputs:
                out.append(Violation(nid(node), "kind",
                                     f"sensor does not output {node.kind.label!r}"))
            if not sensor.active:
                out.append(Violation(nid(node), "sensor_id",
                                     "sensor has no active wrapper"))
        else:
            try:
                dpc = kb.dpc(node.dpc_id)
            except KeyError:
                out.append(Violation(nid(node), "dpc_id", "unknown dpc"))
                continue
            if not (0 <= node.signature < len(dpc.signatures)):
                out.append(Violation(nid(node), "signature", "signature index out of range"))
                continue
            if dpc.signatures[node.signature].output != node.kind:
                out.append(Violation(nid(node), "kind",
                                     "node kind differs from the signature output"))

    incoming = {}
    for producer, consumer, kind in solution.edges:
        eid = f"edge:{nid(producer)}->{nid(consumer)}"
        if producer not in solution.nodes or consumer not in solution.nodes:
            out.append(Violation(eid, "nodes", "edge references a node outside the solution"))
            continue
        if not isinstance(consumer, DpcUse):
            out.append(Violation(eid, "consumer", "only DPC nodes consume inputs"))
            continue
        if producer.kind != kind:
            out.append(Violation(eid, "kind",
                                 f"edge kind {kind.label!r} differs from producer output "
                                 f"{producer.kind.label!r}"))
        try:
            expected = _sig_inputs(kb, consumer)
        except (KeyError, IndexError):
            continue
        if kind not in expected:
            out.append(Violation(eid, "kind",
                                 f"consumer signature does not take {kind.label!r} "
                                 f"(unit/type mismatch)"))
        incoming.setdefault(consumer, {}).setdefault(kind, []).append(producer)

    for node in sorted(solution.nodes, key=node_key):
        if not isinstance(node, DpcUse):
            continue
        try:
            expected = _sig_inputs(kb, node)
        except (KeyError, IndexError):
            continue
        got = incoming.get(node, {})
        for kind in expected:
            n = len(got.get(kind, []))
            if n == 0:
                out.append(Violation(nid(node), "inputs",
                                     f"no incoming edge for input {kind.label!r}"))
            elif n > 1:
                out.append(Violation(nid(node), "inputs",
                                     f"{n} incoming edges for input {kind.label!r}"))

    # Cycle check over producer -> consumer adjacency.
    adjacency = {}
    for producer, consumer, _ in solution.edges:
        adjacency.setdefault(producer, []).append(consumer)
    state = {}
    def cyclic(node):
        state[node] = 1
        for nxt in adjacency.get(node, ()):
            s = state.get(nxt, 0)
            if s == 1 or (s == 0 and cyclic(nxt)):
                return True
        state[node] = 2
        return False
    for node in solution.nodes:
        if state.get(node, 0) == 0 and cyclic(node):
            out.append(Violation(nid(node), "edges", "solution contains a cycle"))
            break

    sink_nodes = {node for _, node in solution.sinks}
    for kind, node in solution.sinks:
        if node not in solution.nodes:
            out.append(Violation(f"sink:{kind.label}", "node", "sink node not in solution"))
        elif node.kind != kind:
            out.append(Violation(f"sink:{kind.label}", "node",
                                 f"sink node produces {node.kind.label!r}"))
    reaches = set(sink_nodes)
    stack = list(sink_nodes)
    backward = {}
    for producer, consumer, _ in solution.edges:
        backward.setdefault(consumer, []).append(producer)
    while stack:
        node = stack.pop()
        for prev in backward.get(node, ()):
            if prev not in reaches:
                reaches.add(prev)
                stack.append(prev)
    for node in sorted(solution.nodes - reaches, key=node_key):
        out.append(Violation(nid(node), "edges", "node feeds no sink (dead node)"))

    if kb.has_task(solution.task_id):
        required = set(kb.task(solution.task_id).required_stream)
        covered = {kind for kind, _ in solution.sinks}
        for kind in sorted(required - covered):
            out.append(Violation(f"sink:{kind.label}", "kind",
                                 "required kind has no sink"))
        for kind in sorted(covered - required):
            out.append(Violation(f"sink:{kind.label}", "kind",
                                 "sink kind is not in the required stream"))
    return tuple(out)


# -- presentation ---------------------------------------------------------------


def expression(kb: KnowledgeBase, solution: Solution, kind=None) -> str:
    """Human-readable composition expression, one per sink kind.

    A DPC node renders as "(input, input, ...) => dpc-id" with inputs in
    signature order; sensors render as their id.
    """
    producer_of = {}
    for p, c, k in solution.edges:
        producer_of[(c, k)] = p

    def render(node):
        if isinstance(node, SensorUse):
            return node.sensor_id
        parts = [render(producer_of[(node, k)]) for k in _sig_inputs(kb, node)]
        return "(" + ", ".join(parts) + ") => " + node.dpc_id

    if kind is not None:
        return render(solution.sink_for(kind))
    return "; ".join(f"{k.label}: {render(node)}" if len(solution.sinks) > 1
                     else render(node)
                     for k, node in solution.sinks)
