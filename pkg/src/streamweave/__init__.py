"""Knowledge-driven discovery and composition of IoT data-stream pipelines.

The library turns declarative descriptions of sensors, data processing
components, and tasks into running configurations: filter tasks by
answering questions, compose validated solution DAGs, discover derivable
context, rank alternatives by weighted context cost, and emit a
deployment plan.
"""

from .kb import (
    AttributeSpec,
    DpcDescription,
    DuplicateIdError,
    KbError,
    KbParseError,
    KbValidationError,
    Kind,
    KnowledgeBase,
    Question,
    SensorDescription,
    Signature,
    TaskDescription,
    ValidationReport,
    Violation,
    add_description,
    load_kb,
    parse_kb,
    save_kb,
    validate_kb,
)
from .qa import (
    ConstraintSet,
    QaSession,
    answers_for,
    apply_answer,
    available_questions,
    matching_tasks,
    new_session,
    remove_answer,
    select_task,
)
from .composer import (
    ComposeLimits,
    ComposeResult,
    DpcUse,
    MissingSet,
    RecommendationReport,
    SensorUse,
    Solution,
    canonical_hash,
    compose,
    expression,
    satisfy_kind,
    validate_solution,
)
from .context import DerivationNode, DerivationTable, derivation_of, discover
from .cost import SolutionScore, WeightVector, aggregate_attributes, rank
from .deploy import (
    DeploymentPlan,
    PlanStage,
    check_plan,
    emit_plan,
    generate_plan,
    parse_plan,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
