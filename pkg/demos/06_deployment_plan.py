#!/usr/bin/env python3
"""From a chosen solution to a deployable configuration.

The plan is the hand-off artifact: topologically ordered stages with
explicit wiring, the output stream schema, and embedded resource metadata.
Extra context kinds (battery level, location, even derived kinds) merge
into the same stage graph, reusing whatever the solution already produces.
"""

from pathlib import Path

from streamweave import Kind, check_plan, compose, emit_plan, generate_plan, load_kb

DATA = Path(__file__).parent.parent / "data"

kb = load_kb(DATA / "agri.kb.json")
solution = compose(kb, "task-phytophtora").solutions[0]

plan = generate_plan(kb, solution)
print("bare plan:")
for stage in plan.stages:
    wiring = f" <- {', '.join(stage.inputs)}" if stage.inputs else ""
    print(f"  {stage.stage_id}: {stage.resource_id} ({stage.resource_type}) "
          f"-> {stage.output.label}{wiring}")
print(f"  stream: {[k.label for k, _ in plan.output_stream]}")

extras = {Kind("batteryLevel", "real", "percent"), Kind("location", "text", "none"),
          Kind("airStress", "text", "none")}
rich = generate_plan(kb, solution, extras)
print(f"\nwith extras {sorted(k.label for k in extras)}:")
print(f"  stages: {len(rich.stages)} (airStress rides along for free: "
      f"it is already produced inside the solution)")
print(f"  stream: {[k.label for k, _ in rich.output_stream]}")

problems = check_plan(rich)
print(f"\nsymbolic executability check: {'OK' if not problems else problems}")

print("\ncanonical emission (first 12 lines):")
for line in emit_plan(rich).splitlines()[:12]:
    print(f"  {line}")
