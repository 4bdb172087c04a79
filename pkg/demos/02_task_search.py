#!/usr/bin/env python3
"""Finding a task by answering questions.

Non-technical users don't browse task catalogs; they answer questions.
Every answer conjunctively constrains the matching task set, questions are
re-ranked by how well they split the remaining tasks, and any offered
answer is guaranteed to leave at least one task standing.
"""

from pathlib import Path

from streamweave import (
    answers_for,
    apply_answer,
    available_questions,
    load_kb,
    matching_tasks,
    new_session,
    remove_answer,
)

DATA = Path(__file__).parent.parent / "data"

kb = load_kb(DATA / "combined.kb.json")
session = new_session(kb)

print(f"{len(matching_tasks(kb, session.constraints))} tasks before any answer\n")

while True:
    questions = available_questions(kb, session.constraints)
    if not questions:
        break
    question = questions[0]  # most discriminating first
    offered = answers_for(kb, session.constraints, question.id)
    print(f"Q: {question.text}")
    print(f"   offered: {', '.join(offered)}")
    answer = offered[0]
    print(f"   -> answering {answer!r}")
    session = apply_answer(session, question.id, answer)
    remaining = matching_tasks(kb, session.constraints)
    print(f"   {len(remaining)} task(s) remain: {[t.id for t in remaining]}\n")

# Changed your mind? Constraints can be removed; the set widens again.
session = remove_answer(session, session.constraints.entries[0][0])
print(f"after undoing the first answer: "
      f"{len(matching_tasks(kb, session.constraints))} task(s) match")
