#!/usr/bin/env python3
"""Composing sensors and DPCs into solution DAGs.

Given a task's required data stream, the composer enumerates every
distinct DAG of active sensors and DPC signatures that produces it:
one route for the crop-disease task, three for the pollution task
(including two different signatures of the same DPC). When nothing works,
it reports the minimal sets of kinds whose sensors would unblock a
solution.
"""

from pathlib import Path

from streamweave import compose, expression, load_kb, validate_solution

DATA = Path(__file__).parent.parent / "data"

print("=== use case 1: one way to monitor the disease ===")
agri = load_kb(DATA / "agri.kb.json")
result = compose(agri, "task-phytophtora")
for sol in result.solutions:
    print(f"  {expression(agri, sol)}")
    print(f"  nodes={len(sol.nodes)} edges={len(sol.edges)} "
          f"valid={validate_solution(agri, sol) == ()}")

print("\n=== use case 2: three alternative pipelines ===")
pollution = load_kb(DATA / "pollution.kb.json")
result = compose(pollution, "task-pollution")
for sol in result.solutions:
    print(f"  {expression(pollution, sol)}")

print("\n=== use case 2 with only s-cd and s-me active ===")
partial = load_kb(DATA / "pollution-partial.kb.json")
result = compose(partial, "task-pollution")
print(f"  solutions: {len(result.solutions)}")
for kind in result.report.unsatisfiable_kinds:
    print(f"  cannot produce: {kind.label}")
for ms in result.report.missing_sets:
    kinds = ", ".join(k.label for k in ms.kinds)
    unlocks = ", ".join(f"{d}[{i}]" for d, i in ms.unlocks)
    print(f"  deploy a sensor for {{{kinds}}} -> unlocks {unlocks}")
