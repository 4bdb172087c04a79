#!/usr/bin/env python3
"""The knowledge base: loading, validating, growing, saving.

Everything the engine does starts from a KB file describing sensors, data
processing components (DPCs), tasks, and questions. This walkthrough loads
the agriculture KB, pokes at its indexes, adds a new sensor description,
and round-trips it through the canonical serialization.
"""

import tempfile
from pathlib import Path

from streamweave import (
    Kind,
    SensorDescription,
    add_description,
    load_kb,
    save_kb,
    validate_kb,
)

DATA = Path(__file__).parent.parent / "data"

kb = load_kb(DATA / "agri.kb.json")
print(f"loaded {len(kb.sensors)} sensors, {len(kb.dpcs)} dpcs, "
      f"{len(kb.tasks)} tasks (version {kb.version_hash()})")

report = validate_kb(kb)
print(f"validation: {'clean' if report.ok else report.errors}")

# The derived indexes answer "who can produce this kind?" in O(1).
stress = Kind("airStress", "text", "none")
print(f"\nsensors producing airStress: "
      f"{[s.id for s in kb.producers_of(stress)] or 'none'}")
print(f"signatures producing airStress: "
      f"{[(d.id, i) for d, i in kb.signature_producers_of(stress)]}")

# KB values are immutable: adding a description returns a NEW snapshot.
soil = SensorDescription(
    id="s-sm",
    name="Soil Moisture Sensor",
    outputs=[Kind("soilMoisture", "real", "percent")],
    context={"accuracy": 0.85, "energy": 0.8, "latency": 0.2, "reliability": 0.9},
    domains=["agriculture"],
)
grown = add_description(kb, soil)
print(f"\nafter add: {len(grown.sensors)} sensors (old snapshot still has "
      f"{len(kb.sensors)}); new version {grown.version_hash()}")

# Canonical save: stable bytes, clean diffs, exact round trips.
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "grown.kb.json"
    save_kb(grown, path)
    again = load_kb(path)
    print(f"round trip equal: {again == grown}")
