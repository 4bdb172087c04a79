"""Forward-chaining discovery of derivable context kinds.

Starting from what active sensors emit (tier 0), repeatedly fire every DPC
signature whose inputs are already available; each newly derived kind lands
on tier 1 + max(input tiers). The result is the least fixpoint: every
available kind has a finite derivation grounded in tier 0, and nothing
else does.

Evaluation is a worklist (semi-naive) pass per tier level rather than
repeated full scans, which yields the same fixpoint. Results are cached on
the KB snapshot; any mutation produces a new KB and therefore a fresh
computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

from .kb import Kind, KnowledgeBase


class ContextError(Exception):
    pass


class KindNotAvailableError(ContextError):
    pass


@dataclass(frozen=True)
class DerivationTable:
    """Provenance of the saturation run.

    ``tiers`` maps every available kind to its tier (0 = sensed directly).
    ``derivations`` maps each derived kind to the signature chosen for it:
    the lowest-tier one, ties broken by (dpc id, signature index).
    ``satisfied_inputs`` records, per signature, which of its inputs ended
    up available; ``fired`` lists the signatures whose inputs all did.
    """

    tiers: Mapping[Kind, int]
    derivations: Mapping[Kind, tuple[str, int]]
    satisfied_inputs: Mapping[tuple[str, int], frozenset]
    fired: frozenset


@dataclass(frozen=True)
class DerivationNode:
    """Finite derivation tree: leaves are tier-0 kinds."""

    kind: Kind
    source: Optional[tuple[str, int]]
    children: tuple["DerivationNode", ...] = ()


def _saturate(kb: KnowledgeBase):
    tiers = {}
    derivations = {}
    frontier = []
    for sensor in kb.sensors:
        if not sensor.active:
            continue
        for kind in sensor.outputs:
            if kind not in tiers:
                tiers[kind] = 0
                frontier.append(kind)

    signatures = []
    watchers = {}
    pending = []
    for d in kb.dpcs:
        for i, sig in enumerate(d.signatures):
            idx = len(signatures)
            signatures.append((d.id, i, sig))
            pending.append(len(sig.inputs))
            for kind in sig.inputs:
                watchers.setdefault(kind, []).append(idx)

    level = 0
    while frontier:
        ready = []
        for kind in frontier:
            for idx in watchers.get(kind, ()):
                pending[idx] -= 1
                if pending[idx] == 0:
                    ready.append(idx)
        # Everything in `ready` completed at this level, so all outputs it
        # can newly derive belong to tier level + 1.
        by_output = {}
        for idx in ready:
            dpc_id, sig_i, sig = signatures[idx]
            if sig.output in tiers:
                continue
            key = (dpc_id, sig_i)
            if sig.output not in by_output or key < by_output[sig.output]:
                by_output[sig.output] = key
        frontier = []
        for kind in sorted(by_output):
            tiers[kind] = level + 1
            derivations[kind] = by_output[kind]
            frontier.append(kind)
        level += 1

    satisfied = {}
    fired = set()
    for dpc_id, sig_i, sig in signatures:
        present = frozenset(k for k in sig.inputs if k in tiers)
        satisfied[(dpc_id, sig_i)] = present
        if len(present) == len(sig.inputs):
            fired.add((dpc_id, sig_i))

    table = DerivationTable(
        tiers=dict(tiers),
        derivations=dict(derivations),
        satisfied_inputs=satisfied,
        fired=frozenset(fired),
    )
    return dict(tiers), table


def discover(kb: KnowledgeBase) -> tuple[dict, DerivationTable]:
    """All kinds obtainable from this KB, with tiers and provenance.

    Cached per KB snapshot: repeated calls return the same result object
    without recomputation.
    """
    with kb._discovery_lock:
        if kb._discovery_cache is None:
            object.__setattr__(kb, "_discovery_cache", _saturate(kb))
        available, table = kb._discovery_cache
    return dict(available), table


def derivation_of(table: DerivationTable, kind: Kind) -> DerivationNode:
    """The derivation tree the table recorded for an available kind."""
    if kind not in table.tiers:
        raise KindNotAvailableError(f"kind {kind.label!r} is not derivable")
    source = table.derivations.get(kind)
    if source is None:
        return DerivationNode(kind=kind, source=None)
    # Tiers strictly decrease toward the leaves, so recursion terminates.
    sig_inputs = _signature_inputs(table, source)
    children = tuple(derivation_of(table, k) for k in sig_inputs)
    return DerivationNode(kind=kind, source=source, children=children)


def _signature_inputs(table, source):
    inputs = table.satisfied_inputs.get(source)
    if inputs is None:
        raise ContextError(f"derivation table has no signature {source}")
    return tuple(sorted(inputs))
