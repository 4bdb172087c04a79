#!/usr/bin/env python3
"""Discovering everything the deployment could know.

Active sensors give the primary context (tier 0). Forward chaining
through DPC signatures saturates to the full set of derivable kinds:
tier 1 needs one processing stage, tier 2 two, and so on. Each derived
kind keeps its provenance, so we can print the derivation tree.
"""

from pathlib import Path

from streamweave import Kind, derivation_of, discover, load_kb

DATA = Path(__file__).parent.parent / "data"

kb = load_kb(DATA / "combined.kb.json")
available, table = discover(kb)

by_tier = {}
for kind, tier in available.items():
    by_tier.setdefault(tier, []).append(kind.label)
for tier in sorted(by_tier):
    label = "sensed directly" if tier == 0 else f"{tier} stage(s) of processing"
    print(f"tier {tier} ({label}):")
    print(f"  {', '.join(sorted(by_tier[tier]))}")

print("\nhow phytophtoraDisease is derived:")


def show(node, indent="  "):
    if node.source is None:
        print(f"{indent}{node.kind.label}  <- sensor")
    else:
        dpc, sig = node.source
        print(f"{indent}{node.kind.label}  <- {dpc}[{sig}]")
    for child in node.children:
        show(child, indent + "    ")


show(derivation_of(table, Kind("phytophtoraDisease", "boolean", "none")))

# The computation is cached on the snapshot: calling discover again on the
# same KB reuses the result until the KB changes.
_, table_again = discover(kb)
print(f"\ncached across calls: {table_again is table}")
