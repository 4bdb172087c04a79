"""Question-answer task filtering.

Users narrow the task set by answering questions; every answer adds one
conjunctive constraint (question's concept must be bound to that value).
All operations are pure over a KB snapshot, so the same constraint set
always yields the same task set regardless of answer order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .kb import KnowledgeBase, Question, TaskDescription


class QaError(Exception):
    """Base class for question-answer errors."""


class UnknownQuestionError(QaError):
    pass


class QuestionNotAvailableError(QaError):
    pass


class AnswerNotOfferedError(QaError):
    pass


class UnknownTaskError(QaError):
    pass


@dataclass(frozen=True)
class ConstraintSet:
    """Ordered (question id, answer value) pairs with distinct question ids."""

    entries: tuple[tuple[str, str], ...] = ()

    def answered_ids(self) -> frozenset:
        return frozenset(q for q, _ in self.entries)

    def with_answer(self, question_id, answer) -> "ConstraintSet":
        return ConstraintSet(self.entries + ((question_id, answer),))

    def without(self, question_id) -> "ConstraintSet":
        return ConstraintSet(tuple(e for e in self.entries if e[0] != question_id))

    def __len__(self):
        return len(self.entries)


def matching_tasks(kb: KnowledgeBase, constraints: ConstraintSet) -> tuple[TaskDescription, ...]:
    """Tasks satisfying every constraint conjunctively, ordered by task id.

    An empty constraint set matches all tasks.
    """
    if not constraints.entries:
        return kb.tasks
    ids = None
    for question_id, answer in constraints.entries:
        if not kb.has_question(question_id):
            raise UnknownQuestionError(f"unknown question {question_id!r}")
        concept = kb.question(question_id).concept
        bucket = {t.id for t in kb.tasks_with_binding(concept, answer)}
        ids = bucket if ids is None else ids & bucket
        if not ids:
            return ()
    return tuple(kb.task(i) for i in sorted(ids))


def available_questions(kb: KnowledgeBase, constraints: ConstraintSet) -> tuple[Question, ...]:
    """Unanswered questions whose concept is bound by some matching task.

    Ordered by descending discriminating power (number of distinct answer
    values among the matching tasks), ties broken by question id.
    """
    tasks = matching_tasks(kb, constraints)
    answered = constraints.answered_ids()
    values_by_concept = {}
    for t in tasks:
        for concept, value in t.concept_bindings:
            values_by_concept.setdefault(concept, set()).add(value)
    candidates = []
    for concept, values in values_by_concept.items():
        q = kb.question_for_concept(concept)
        if q is not None and q.id not in answered:
            candidates.append((-len(values), q.id, q))
    candidates.sort(key=lambda c: (c[0], c[1]))
    return tuple(q for _, _, q in candidates)


def answers_for(kb: KnowledgeBase, constraints: ConstraintSet, question_id) -> tuple[str, ...]:
    """Distinct answer values for the question among matching tasks, sorted.

    The question must currently be available; an available question always
    has at least one answer, so picking any of them cannot dead-end.
    """
    if not kb.has_question(question_id):
        raise UnknownQuestionError(f"unknown question {question_id!r}")
    if question_id in constraints.answered_ids():
        raise QuestionNotAvailableError(f"question {question_id!r} already answered")
    concept = kb.question(question_id).concept
    values = set()
    for t in matching_tasks(kb, constraints):
        v = t.binding(concept)
        if v is not None:
            values.add(v)
    if not values:
        raise QuestionNotAvailableError(
            f"question {question_id!r} has no answers for the current task set")
    return tuple(sorted(values))


@dataclass(frozen=True)
class QaSession:
    """One user's filtering state over a pinned KB snapshot."""

    kb: KnowledgeBase
    constraints: ConstraintSet = ConstraintSet()
    selected_task: Optional[str] = None


def new_session(kb: KnowledgeBase) -> QaSession:
    return QaSession(kb=kb)


def apply_answer(session: QaSession, question_id, answer) -> QaSession:
    """Append one constraint; the answer must be among those offered.

    Because offered answers come from the matching tasks, the narrowed set
    is guaranteed non-empty.
    """
    offered = answers_for(session.kb, session.constraints, question_id)
    if answer not in offered:
        raise AnswerNotOfferedError(
            f"answer {answer!r} was not offered for question {question_id!r}")
    return replace(session, constraints=session.constraints.with_answer(question_id, answer))


def remove_answer(session: QaSession, question_id) -> QaSession:
    """Undo one constraint. Not part of the guided flow, but users change
    their minds; the selected task is cleared if it no longer matches."""
    if question_id not in session.constraints.answered_ids():
        raise UnknownQuestionError(f"question {question_id!r} was not answered")
    constraints = session.constraints.without(question_id)
    selected = session.selected_task
    if selected is not None:
        still = {t.id for t in matching_tasks(session.kb, constraints)}
        if selected not in still:
            selected = None
    return replace(session, constraints=constraints, selected_task=selected)


def select_task(session: QaSession, task_id) -> QaSession:
    if not session.kb.has_task(task_id):
        raise UnknownTaskError(f"unknown task {task_id!r}")
    matching = {t.id for t in matching_tasks(session.kb, session.constraints)}
    if task_id not in matching:
        raise UnknownTaskError(f"task {task_id!r} does not match the current constraints")
    return replace(session, selected_task=task_id)
