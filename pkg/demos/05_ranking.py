#!/usr/bin/env python3
"""Ranking alternative solutions by weighted context cost.

Each pipeline aggregates its nodes' context attributes: energy and latency
add up, accuracy and reliability take the weakest link. Raw aggregates are
min-max normalized across the candidates and combined under user weights,
so "cheap" and "trustworthy" are one slider apart.
"""

from pathlib import Path

from streamweave import WeightVector, compose, expression, load_kb, rank

DATA = Path(__file__).parent.parent / "data"

kb = load_kb(DATA / "pollution.kb.json")
solutions = compose(kb, "task-pollution").solutions
print(f"{len(solutions)} candidate pipelines\n")


def show(title, weights):
    print(title)
    for i, score in enumerate(rank(kb, solutions, weights), start=1):
        print(f"  {i}. total={score.total:.3f}  energy={score.raw['energy']:.1f} "
              f"reliability={score.raw['reliability']:.2f}  "
              f"{expression(kb, score.solution)}")
    print()


show("equal weights (the default):", None)
show("energy matters most (battery-powered deployment):",
     WeightVector({"energy": 10, "accuracy": 1, "reliability": 1, "latency": 1}))
show("reliability matters most (safety monitoring):",
     WeightVector({"reliability": 10, "accuracy": 1, "energy": 1, "latency": 1}))
