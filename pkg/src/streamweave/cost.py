"""Context-based scoring and ranking of alternative solutions.

Each solution aggregates the context attributes of its nodes: cost
attributes (energy, latency, ...) add up along the pipeline, benefit
attributes (accuracy, reliability) take the weakest link. Raw aggregates
are min-max normalized across the candidate set, benefit attributes
inverted so that lower is always better, and combined into a weighted
total. Users steer the trade-off by reweighting; by default every
registered attribute counts equally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .composer import SensorUse, Solution, canonical_hash, node_key
from .kb import KnowledgeBase


class CostError(Exception):
    pass


class UnknownAttributeError(CostError):
    pass


class InvalidWeightsError(CostError):
    pass


@dataclass(frozen=True)
class WeightVector:
    """Non-negative attribute weights; renormalized to sum 1 when applied."""

    weights: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "weights", dict(self.weights))
        if not self.weights:
            raise InvalidWeightsError("weight vector must name at least one attribute")
        for name, w in self.weights.items():
            if isinstance(w, bool) or not isinstance(w, (int, float)) or w < 0 or w != w:
                raise InvalidWeightsError(f"weight for {name!r} must be a non-negative number")
        if not any(w > 0 for w in self.weights.values()):
            raise InvalidWeightsError("at least one weight must be positive")

    def normalized(self) -> dict:
        total = sum(self.weights.values())
        return {name: w / total for name, w in self.weights.items()}

    @classmethod
    def equal(cls, kb: KnowledgeBase) -> "WeightVector":
        if not kb.attributes:
            raise InvalidWeightsError("KB declares no attributes to weight")
        return cls({a.name: 1.0 for a in kb.attributes})


@dataclass(frozen=True)
class SolutionScore:
    solution: Solution
    raw: Mapping[str, float]
    normalized: Mapping[str, float]
    total: float


def _node_context(kb, node):
    if isinstance(node, SensorUse):
        return kb.sensor(node.sensor_id).context
    return kb.dpc(node.dpc_id).context


def aggregate_attributes(kb: KnowledgeBase, solution: Solution,
                         attributes: Optional[Sequence[str]] = None) -> dict:
    """Raw per-attribute aggregate over the solution's nodes.

    Sum-aggregated attributes substitute the registry default for nodes
    without a value; min-aggregated ones ignore such nodes and fall back to
    the default only when no node carries the attribute at all.
    """
    if attributes is None:
        specs = kb.attributes
    else:
        unknown = [a for a in attributes if not kb.has_attribute(a)]
        if unknown:
            raise UnknownAttributeError(
                f"attributes not in the KB registry: {sorted(unknown)}")
        specs = tuple(kb.attribute(a) for a in attributes)

    # Canonical node order keeps float sums bit-identical across processes
    # (set iteration order varies with hash randomization).
    contexts = [_node_context(kb, node) for node in sorted(solution.nodes, key=node_key)]
    raw = {}
    for spec in specs:
        if spec.aggregate == "sum":
            raw[spec.name] = sum(ctx.get(spec.name, spec.default) for ctx in contexts)
        else:
            present = [ctx[spec.name] for ctx in contexts if spec.name in ctx]
            raw[spec.name] = min(present) if present else spec.default
    return raw


def score_raws(raws: Sequence[Mapping[str, float]], weights: Mapping[str, float],
               polarity: Mapping[str, str]) -> list[tuple[dict, float]]:
    """Min-max normalize a raw matrix and total it under normalized weights.

    Returns (normalized values, total) per candidate, in input order.
    Benefit attributes are inverted (1 - minmax); attributes constant
    across the candidate set normalize to 0 and cannot affect the order.
    """
    attrs = set()
    for row in raws:
        attrs.update(row)
    normalized = [dict() for _ in raws]
    for attr in sorted(attrs):
        values = [row[attr] for row in raws]
        lo, hi = min(values), max(values)
        for i, value in enumerate(values):
            if hi == lo:
                n = 0.0
            else:
                n = (value - lo) / (hi - lo)
                if polarity.get(attr) == "benefit":
                    n = 1.0 - n
            normalized[i][attr] = n
    totals = []
    for norm in normalized:
        totals.append(sum(weights.get(a, 0.0) * n for a, n in norm.items()))
    return list(zip(normalized, totals))


def rank(kb: KnowledgeBase, solutions: Sequence[Solution],
         weights: Optional[WeightVector] = None) -> tuple[SolutionScore, ...]:
    """Score and order candidate solutions, lowest total first.

    Ties break toward fewer nodes, then canonical hash, so the ordering is
    deterministic. A singleton candidate set trivially scores 0.
    """
    if not solutions:
        raise ValueError("rank needs at least one solution")
    if weights is None:
        weights = WeightVector.equal(kb)
    unknown = [a for a in weights.weights if not kb.has_attribute(a)]
    if unknown:
        raise UnknownAttributeError(f"attributes not in the KB registry: {sorted(unknown)}")

    raws = [aggregate_attributes(kb, s) for s in solutions]
    polarity = {a.name: a.polarity for a in kb.attributes}
    scored = score_raws(raws, weights.normalized(), polarity)
    results = [
        SolutionScore(solution=s, raw=raw, normalized=norm, total=total)
        for s, raw, (norm, total) in zip(solutions, raws, scored)
    ]
    results.sort(key=lambda r: (r.total, len(r.solution.nodes),
                                canonical_hash(r.solution)))
    return tuple(results)
