"""Knowledge base: schema, validation, file format, and ingestion.

The knowledge base holds everything the engine works from: sensor
descriptions, data processing component (DPC) descriptions, task
descriptions, and the questions used to find tasks. A KnowledgeBase value
is immutable once constructed; operations that change it (add_description)
return a new value. Derived lookup indexes are built eagerly at
construction and never persisted.

The on-disk format is a single JSON document, described in
docs/kb-format.md. Serialization is canonical: entities sorted by id,
kinds hoisted into the shared ``kinds`` section and referenced by label.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from threading import Lock
from typing import Mapping, Union

SCHEMA_VERSION = "1"

VALUE_TYPES = ("boolean", "integer", "real", "text")

POLARITIES = ("benefit", "cost")

AGGREGATIONS = ("sum", "min")

#: Unit tokens every KB understands out of the box. The vocabulary is open:
#: a KB may declare further tokens in its ``units`` header field.
STARTER_UNITS = frozenset({
    "none",
    "celsius", "fahrenheit", "kelvin",
    "percent", "ppm", "ppb",
    "pascal", "hectopascal",
    "lux", "decibel",
    "meter", "millimeter", "centimeter", "kilometer",
    "second", "millisecond", "minute", "hour",
    "gram", "kilogram",
    "watt", "kilowatt", "volt", "ampere", "hertz",
    "degree", "count", "index",
})


class KbError(Exception):
    """Base class for knowledge-base errors."""


class KbParseError(KbError):
    """The file is not a well-formed KB document.

    ``location`` is a JSON-path-like string ("sensors[2].outputs"); ``line``
    is set when the underlying JSON itself failed to parse.
    """

    def __init__(self, message, location="$", line=None):
        self.location = location
        self.line = line
        where = location if line is None else f"{location} (line {line})"
        super().__init__(f"{where}: {message}")


class KbValidationError(KbError):
    """Raised when a loaded or mutated KB violates its invariants."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(str(v) for v in report.errors[:5])
        extra = "" if len(report.errors) <= 5 else f" (+{len(report.errors) - 5} more)"
        super().__init__(f"{len(report.errors)} violation(s): {lines}{extra}")


class DuplicateIdError(KbError):
    """An entity with the same id already exists in the KB."""


@dataclass(frozen=True, order=True)
class Kind:
    """A typed, unit-bearing semantic data item, e.g. airTemperature/real/celsius.

    Two kinds are equal iff label, value type, and unit are all equal; there
    is no unit conversion or subsumption. Converters are modelled as DPCs.
    """

    label: str
    value_type: str
    unit: str = "none"


@dataclass(frozen=True)
class AttributeSpec:
    """Registry entry for a context attribute (accuracy, energy, ...).

    ``polarity`` decides whether larger values are better (benefit) or worse
    (cost). ``aggregate`` is how a solution-level value is built from node
    values: additive for costs, weakest-link minimum for benefits, unless
    the KB author overrides it. ``default`` substitutes for entities that
    carry no value for this attribute.
    """

    name: str
    polarity: str
    default: float = 0.0
    aggregate: str = ""

    def __post_init__(self):
        if not self.aggregate:
            object.__setattr__(
                self, "aggregate", "min" if self.polarity == "benefit" else "sum"
            )


def _canonical_kind_set(kinds):
    return tuple(sorted(set(kinds)))


@dataclass(frozen=True)
class SensorDescription:
    """A sensor resource: emits one or more kinds directly.

    ``active`` marks sensors with a live data-acquisition wrapper; only
    active sensors may anchor solutions. Described-but-inactive sensors are
    still visible to the recommender.
    """

    id: str
    name: str
    outputs: tuple[Kind, ...]
    active: bool = True
    context: Mapping[str, float] = field(default_factory=dict)
    domains: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "outputs", _canonical_kind_set(self.outputs))
        object.__setattr__(self, "domains", tuple(sorted(set(self.domains))))
        object.__setattr__(self, "context", dict(self.context))


@dataclass(frozen=True)
class Signature:
    """One input/output mapping of a DPC: a set of input kinds to one output."""

    inputs: tuple[Kind, ...]
    output: Kind

    def __post_init__(self):
        object.__setattr__(self, "inputs", _canonical_kind_set(self.inputs))


@dataclass(frozen=True)
class DpcDescription:
    """A data processing component: a black box with one or more signatures.

    Signature order is significant; solutions reference signatures by index.
    """

    id: str
    name: str
    signatures: tuple[Signature, ...]
    context: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "signatures", tuple(self.signatures))
        object.__setattr__(self, "context", dict(self.context))


@dataclass(frozen=True)
class Question:
    """A question eliciting the value of one concept (task → concept → question)."""

    id: str
    text: str
    concept: str


@dataclass(frozen=True)
class TaskDescription:
    """A user goal: the data stream it needs plus concept bindings for search."""

    id: str
    name: str
    required_stream: tuple[Kind, ...]
    concept_bindings: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "required_stream", tuple(self.required_stream))
        object.__setattr__(
            self, "concept_bindings", tuple(sorted(set(self.concept_bindings)))
        )

    def binding(self, concept):
        for c, v in self.concept_bindings:
            if c == concept:
                return v
        return None

    @property
    def bound_concepts(self):
        return tuple(c for c, _ in self.concept_bindings)


Entity = Union[SensorDescription, DpcDescription, TaskDescription, Question]


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable snapshot of all descriptions plus derived indexes.

    Collections are canonicalized (sorted) at construction so that two KBs
    with the same content compare equal regardless of input order. Indexes
    are plain derived data: rebuildable, excluded from equality, never
    saved.
    """

    version: str = SCHEMA_VERSION
    attributes: tuple[AttributeSpec, ...] = ()
    units: tuple[str, ...] = ()
    kinds: tuple[Kind, ...] = ()
    sensors: tuple[SensorDescription, ...] = ()
    dpcs: tuple[DpcDescription, ...] = ()
    tasks: tuple[TaskDescription, ...] = ()
    questions: tuple[Question, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "attributes", tuple(sorted(self.attributes, key=lambda a: a.name)))
        object.__setattr__(self, "units", tuple(sorted(set(self.units))))
        object.__setattr__(self, "sensors", tuple(sorted(self.sensors, key=lambda e: e.id)))
        object.__setattr__(self, "dpcs", tuple(sorted(self.dpcs, key=lambda e: e.id)))
        object.__setattr__(self, "tasks", tuple(sorted(self.tasks, key=lambda e: e.id)))
        object.__setattr__(self, "questions", tuple(sorted(self.questions, key=lambda e: e.id)))
        # The shared kind section is normalized to the union of declared and
        # referenced kinds so serialization can always reference by label.
        referenced = set(self.kinds)
        for s in self.sensors:
            referenced.update(s.outputs)
        for d in self.dpcs:
            for sig in d.signatures:
                referenced.update(sig.inputs)
                referenced.add(sig.output)
        for t in self.tasks:
            referenced.update(t.required_stream)
        object.__setattr__(self, "kinds", tuple(sorted(referenced)))
        self._build_indexes()
        object.__setattr__(self, "_discovery_cache", None)
        object.__setattr__(self, "_discovery_lock", Lock())
        object.__setattr__(self, "_version_hash", None)

    def _build_indexes(self):
        sensors_by_id = {}
        for s in self.sensors:
            sensors_by_id.setdefault(s.id, s)
        dpcs_by_id = {}
        for d in self.dpcs:
            dpcs_by_id.setdefault(d.id, d)
        tasks_by_id = {}
        for t in self.tasks:
            tasks_by_id.setdefault(t.id, t)
        questions_by_id = {}
        for q in self.questions:
            questions_by_id.setdefault(q.id, q)
        question_by_concept = {}
        for q in self.questions:
            question_by_concept.setdefault(q.concept, q)

        sensor_producers = {}
        for s in self.sensors:
            for k in s.outputs:
                sensor_producers.setdefault(k, []).append(s)
        signature_producers = {}
        for d in self.dpcs:
            for i, sig in enumerate(d.signatures):
                signature_producers.setdefault(sig.output, []).append((d, i))
        tasks_by_binding = {}
        for t in self.tasks:
            for c, v in t.concept_bindings:
                tasks_by_binding.setdefault((c, v), []).append(t)

        object.__setattr__(self, "_sensors_by_id", sensors_by_id)
        object.__setattr__(self, "_dpcs_by_id", dpcs_by_id)
        object.__setattr__(self, "_tasks_by_id", tasks_by_id)
        object.__setattr__(self, "_questions_by_id", questions_by_id)
        object.__setattr__(self, "_question_by_concept", question_by_concept)
        object.__setattr__(
            self,
            "_sensor_producers",
            {k: tuple(v) for k, v in sensor_producers.items()},
        )
        object.__setattr__(
            self,
            "_signature_producers",
            {k: tuple(v) for k, v in signature_producers.items()},
        )
        object.__setattr__(
            self,
            "_tasks_by_binding",
            {k: tuple(v) for k, v in tasks_by_binding.items()},
        )
        object.__setattr__(
            self, "_attributes_by_name", {a.name: a for a in self.attributes}
        )

    # -- lookups ---------------------------------------------------------

    def sensor(self, sensor_id) -> SensorDescription:
        return self._sensors_by_id[sensor_id]

    def dpc(self, dpc_id) -> DpcDescription:
        return self._dpcs_by_id[dpc_id]

    def task(self, task_id) -> TaskDescription:
        return self._tasks_by_id[task_id]

    def question(self, question_id) -> Question:
        return self._questions_by_id[question_id]

    def has_task(self, task_id) -> bool:
        return task_id in self._tasks_by_id

    def has_question(self, question_id) -> bool:
        return question_id in self._questions_by_id

    def question_for_concept(self, concept):
        return self._question_by_concept.get(concept)

    def producers_of(self, kind) -> tuple[SensorDescription, ...]:
        """All sensors (active or not) declaring this kind among outputs."""
        return self._sensor_producers.get(kind, ())

    def signature_producers_of(self, kind) -> tuple[tuple[DpcDescription, int], ...]:
        """All (dpc, signature index) pairs whose output is this kind."""
        return self._signature_producers.get(kind, ())

    def tasks_with_binding(self, concept, value) -> tuple[TaskDescription, ...]:
        return self._tasks_by_binding.get((concept, value), ())

    def attribute(self, name) -> AttributeSpec:
        return self._attributes_by_name[name]

    def has_attribute(self, name) -> bool:
        return name in self._attributes_by_name

    @property
    def known_units(self) -> frozenset:
        return STARTER_UNITS | set(self.units)

    def version_hash(self) -> str:
        """Content hash of the canonical serialization; stable across runs."""
        if self._version_hash is None:
            digest = hashlib.sha256(dumps_kb(self).encode()).hexdigest()[:16]
            object.__setattr__(self, "_version_hash", digest)
        return self._version_hash


# -- validation ------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    entity: str
    field: str
    message: str

    def __str__(self):
        return f"{self.entity}.{self.field}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    errors: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors


def _check_kind(kind, kb, entity, fieldname, out):
    if not kind.label:
        out.append(Violation(entity, fieldname, "kind label must be non-empty"))
    if kind.value_type not in VALUE_TYPES:
        out.append(Violation(
            entity, fieldname,
            f"unknown value type {kind.value_type!r} for kind {kind.label!r}"))
    if kind.unit not in kb.known_units:
        out.append(Violation(
            entity, fieldname,
            f"undeclared unit token {kind.unit!r} for kind {kind.label!r}"))
    if kind.value_type in ("boolean", "text") and kind.unit != "none":
        out.append(Violation(
            entity, fieldname,
            f"kind {kind.label!r} has value type {kind.value_type} and must use unit 'none'"))


def _check_context(ctx, kb, entity, out, warnings):
    for name, value in ctx.items():
        if not kb.has_attribute(name):
            out.append(Violation(
                entity, "context", f"attribute {name!r} is not in the KB registry"))
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            out.append(Violation(
                entity, "context", f"attribute {name!r} value must be a number"))
        elif not math.isfinite(value) or value < 0:
            out.append(Violation(
                entity, "context",
                f"attribute {name!r} value must be finite and non-negative"))
    for spec in kb.attributes:
        if spec.name not in ctx:
            warnings.append(Violation(
                entity, "context",
                f"no value for attribute {spec.name!r}; registry default {spec.default} applies"))


def _check_duplicate_ids(entities, label, out):
    seen = set()
    for e in entities:
        if e.id in seen:
            out.append(Violation(f"{label}:{e.id}", "id", "duplicate id"))
        seen.add(e.id)


def validate_kb(kb) -> ValidationReport:
    """Check every KB invariant; returns all violations, not just the first.

    Total: never raises on a structurally well-formed KnowledgeBase value.
    The report is empty (no errors) iff the KB is valid; warnings do not
    make a KB invalid.
    """
    errors = []
    warnings = []

    if kb.version != SCHEMA_VERSION:
        errors.append(Violation("header", "version",
                                f"unsupported schema version {kb.version!r}"))
    for spec in kb.attributes:
        ent = f"attribute:{spec.name}"
        if not spec.name:
            errors.append(Violation(ent, "name", "attribute name must be non-empty"))
        if spec.polarity not in POLARITIES:
            errors.append(Violation(ent, "polarity",
                                    f"polarity must be one of {POLARITIES}"))
        if spec.aggregate not in AGGREGATIONS:
            errors.append(Violation(ent, "aggregate",
                                    f"aggregate must be one of {AGGREGATIONS}"))
        if isinstance(spec.default, bool) or not isinstance(spec.default, (int, float)) \
                or not math.isfinite(spec.default) or spec.default < 0:
            errors.append(Violation(ent, "default",
                                    "default must be a finite non-negative number"))
    names = [a.name for a in kb.attributes]
    for name in sorted({n for n in names if names.count(n) > 1}):
        errors.append(Violation(f"attribute:{name}", "name", "duplicate attribute"))

    # Conflicting kind declarations: same label, different type or unit.
    by_label = {}
    for k in kb.kinds:
        by_label.setdefault(k.label, []).append(k)
    for label, variants in sorted(by_label.items()):
        if len(variants) > 1:
            errors.append(Violation(
                f"kind:{label}", "label",
                f"label declared with {len(variants)} conflicting definitions"))
    for k in kb.kinds:
        _check_kind(k, kb, f"kind:{k.label}", "declaration", errors)

    _check_duplicate_ids(kb.sensors, "sensor", errors)
    for s in kb.sensors:
        ent = f"sensor:{s.id}"
        if not s.outputs:
            errors.append(Violation(ent, "outputs", "sensor must declare at least one output"))
        for k in s.outputs:
            _check_kind(k, kb, ent, "outputs", errors)
        _check_context(s.context, kb, ent, errors, warnings)

    _check_duplicate_ids(kb.dpcs, "dpc", errors)
    for d in kb.dpcs:
        ent = f"dpc:{d.id}"
        if not d.signatures:
            errors.append(Violation(ent, "signatures", "DPC must declare at least one signature"))
        seen_sigs = set()
        for i, sig in enumerate(d.signatures):
            sig_ent = f"dpc:{d.id}.signatures[{i}]"
            if not sig.inputs:
                errors.append(Violation(sig_ent, "inputs", "signature needs at least one input"))
            if sig.output in sig.inputs:
                errors.append(Violation(sig_ent, "output",
                                        "signature output must not be among its inputs"))
            for k in sig.inputs:
                _check_kind(k, kb, sig_ent, "inputs", errors)
            _check_kind(sig.output, kb, sig_ent, "output", errors)
            if sig in seen_sigs:
                errors.append(Violation(sig_ent, "inputs", "duplicate signature"))
            seen_sigs.add(sig)
        _check_context(d.context, kb, ent, errors, warnings)

    _check_duplicate_ids(kb.tasks, "task", errors)
    for t in kb.tasks:
        ent = f"task:{t.id}"
        if not t.required_stream:
            errors.append(Violation(ent, "required_stream",
                                    "task must require at least one kind"))
        if len(set(t.required_stream)) != len(t.required_stream):
            errors.append(Violation(ent, "required_stream",
                                    "required kinds must be pairwise distinct"))
        for k in t.required_stream:
            _check_kind(k, kb, ent, "required_stream", errors)
        concepts = [c for c, _ in t.concept_bindings]
        for c in sorted({c for c in concepts if concepts.count(c) > 1}):
            errors.append(Violation(ent, "concept_bindings",
                                    f"concept {c!r} bound to more than one value"))
        for c, _ in t.concept_bindings:
            if kb.question_for_concept(c) is None:
                errors.append(Violation(ent, "concept_bindings",
                                        f"no question defined for concept {c!r}"))

    _check_duplicate_ids(kb.questions, "question", errors)
    concepts_seen = set()
    for q in kb.questions:
        ent = f"question:{q.id}"
        if not q.concept:
            errors.append(Violation(ent, "concept", "concept must be non-empty"))
        if q.concept in concepts_seen:
            errors.append(Violation(ent, "concept",
                                    f"concept {q.concept!r} already has a question"))
        concepts_seen.add(q.concept)

    return ValidationReport(errors=tuple(errors), warnings=tuple(warnings))


# -- parsing ---------------------------------------------------------------


def _reject_duplicate_keys(pairs):
    d = {}
    for key, value in pairs:
        if key in d:
            raise KbParseError(f"duplicate key {key!r} in object")
        d[key] = value
    return d


def _reject_constant(token):
    raise KbParseError(f"non-finite number {token!r} is not allowed")


def _expect(doc, key, types, loc, default=None, required=False):
    if key not in doc:
        if required:
            raise KbParseError(f"missing required field {key!r}", loc)
        return default
    value = doc[key]
    if isinstance(value, bool) and bool not in (types if isinstance(types, tuple) else (types,)):
        raise KbParseError(f"field {key!r} has wrong type (got bool)", loc)
    if not isinstance(value, types):
        raise KbParseError(
            f"field {key!r} has wrong type (expected {types}, got {type(value).__name__})",
            loc)
    return value


def _parse_kind_value(value, declared, loc):
    """A kind is either a reference by label or an inline declaration."""
    if isinstance(value, str):
        if value not in declared:
            raise KbParseError(f"reference to undefined kind label {value!r}", loc)
        return declared[value]
    if isinstance(value, dict):
        label = _expect(value, "label", str, loc, required=True)
        value_type = _expect(value, "value_type", str, loc, required=True)
        unit = _expect(value, "unit", str, loc, default="none")
        return Kind(label=label, value_type=value_type, unit=unit)
    raise KbParseError("kind must be a label string or an object", loc)


def _parse_kind_list(values, declared, loc):
    if not isinstance(values, list):
        raise KbParseError("expected a list of kinds", loc)
    return [_parse_kind_value(v, declared, f"{loc}[{i}]") for i, v in enumerate(values)]


def _parse_context(doc, loc):
    ctx = _expect(doc, "context", dict, loc, default={})
    out = {}
    for name, value in ctx.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise KbParseError(f"context value for {name!r} must be a number",
                               f"{loc}.context")
        out[name] = float(value)
    return out


def parse_kb(text, validate=True) -> KnowledgeBase:
    """Parse a KB document from text. See load_kb for the error contract."""
    try:
        doc = json.loads(text, object_pairs_hook=_reject_duplicate_keys,
                         parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise KbParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise KbParseError("top-level value must be an object")

    version = _expect(doc, "version", str, "$", default=SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise KbParseError(f"unsupported schema version {version!r}", "version")

    attributes = []
    for name, spec in _expect(doc, "attributes", dict, "$", default={}).items():
        loc = f"attributes.{name}"
        if isinstance(spec, str):
            attributes.append(AttributeSpec(name=name, polarity=spec))
        elif isinstance(spec, dict):
            polarity = _expect(spec, "polarity", str, loc, required=True)
            default = _expect(spec, "default", (int, float), loc, default=0.0)
            aggregate = _expect(spec, "aggregate", str, loc, default="")
            attributes.append(AttributeSpec(
                name=name, polarity=polarity, default=float(default),
                aggregate=aggregate))
        else:
            raise KbParseError("attribute spec must be a polarity string or an object", loc)

    units = _expect(doc, "units", list, "$", default=[])
    for i, u in enumerate(units):
        if not isinstance(u, str):
            raise KbParseError("unit token must be a string", f"units[{i}]")

    declared = {}
    declared_kinds = []
    for i, entry in enumerate(_expect(doc, "kinds", list, "$", default=[])):
        loc = f"kinds[{i}]"
        if not isinstance(entry, dict):
            raise KbParseError("kind declaration must be an object", loc)
        kind = _parse_kind_value(entry, declared, loc)
        declared_kinds.append(kind)
        # First declaration wins for reference resolution; conflicting
        # re-declarations survive in kb.kinds where validation flags them.
        declared.setdefault(kind.label, kind)

    sensors = []
    for i, entry in enumerate(_expect(doc, "sensors", list, "$", default=[])):
        loc = f"sensors[{i}]"
        if not isinstance(entry, dict):
            raise KbParseError("sensor must be an object", loc)
        sensors.append(SensorDescription(
            id=_expect(entry, "id", str, loc, required=True),
            name=_expect(entry, "name", str, loc, default=""),
            outputs=_parse_kind_list(_expect(entry, "outputs", list, loc, default=[]),
                                     declared, f"{loc}.outputs"),
            active=_expect(entry, "active", bool, loc, default=True),
            context=_parse_context(entry, loc),
            domains=[str(x) for x in _expect(entry, "domains", list, loc, default=[])],
        ))

    dpcs = []
    for i, entry in enumerate(_expect(doc, "dpcs", list, "$", default=[])):
        loc = f"dpcs[{i}]"
        if not isinstance(entry, dict):
            raise KbParseError("dpc must be an object", loc)
        signatures = []
        for j, sig in enumerate(_expect(entry, "signatures", list, loc, default=[])):
            sig_loc = f"{loc}.signatures[{j}]"
            if not isinstance(sig, dict):
                raise KbParseError("signature must be an object", sig_loc)
            inputs = _parse_kind_list(_expect(sig, "inputs", list, sig_loc, default=[]),
                                      declared, f"{sig_loc}.inputs")
            output = _parse_kind_value(
                _expect(sig, "output", (str, dict), sig_loc, required=True),
                declared, f"{sig_loc}.output")
            signatures.append(Signature(inputs=inputs, output=output))
        dpcs.append(DpcDescription(
            id=_expect(entry, "id", str, loc, required=True),
            name=_expect(entry, "name", str, loc, default=""),
            signatures=signatures,
            context=_parse_context(entry, loc),
        ))

    tasks = []
    for i, entry in enumerate(_expect(doc, "tasks", list, "$", default=[])):
        loc = f"tasks[{i}]"
        if not isinstance(entry, dict):
            raise KbParseError("task must be an object", loc)
        bindings = []
        concepts = _expect(entry, "concepts", dict, loc, default={})
        for c, v in concepts.items():
            if not isinstance(v, str):
                raise KbParseError(f"concept {c!r} value must be a string", f"{loc}.concepts")
            bindings.append((c, v))
        tasks.append(TaskDescription(
            id=_expect(entry, "id", str, loc, required=True),
            name=_expect(entry, "name", str, loc, default=""),
            required_stream=_parse_kind_list(
                _expect(entry, "required_stream", list, loc, default=[]),
                declared, f"{loc}.required_stream"),
            concept_bindings=bindings,
        ))

    questions = []
    for i, entry in enumerate(_expect(doc, "questions", list, "$", default=[])):
        loc = f"questions[{i}]"
        if not isinstance(entry, dict):
            raise KbParseError("question must be an object", loc)
        questions.append(Question(
            id=_expect(entry, "id", str, loc, required=True),
            text=_expect(entry, "text", str, loc, default=""),
            concept=_expect(entry, "concept", str, loc, required=True),
        ))

    kb = KnowledgeBase(
        version=version,
        attributes=attributes,
        units=units,
        kinds=declared_kinds,
        sensors=sensors,
        dpcs=dpcs,
        tasks=tasks,
        questions=questions,
    )
    if validate:
        report = validate_kb(kb)
        if report.errors:
            raise KbValidationError(report)
    return kb


def load_kb(path) -> KnowledgeBase:
    """Load and validate a KB file.

    Raises KbParseError for malformed documents (with location) and
    KbValidationError carrying the full violation report for invalid ones.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_kb(text)


# -- serialization -----------------------------------------------------------


def _kind_json(kind):
    return {"label": kind.label, "value_type": kind.value_type, "unit": kind.unit}


def _context_json(ctx):
    return {name: ctx[name] for name in sorted(ctx)}


def kb_document(kb) -> dict:
    """The canonical JSON document for a KB (entities sorted by id)."""
    doc = {
        "version": kb.version,
        "attributes": {
            a.name: {"polarity": a.polarity, "default": a.default, "aggregate": a.aggregate}
            for a in kb.attributes
        },
        "kinds": [_kind_json(k) for k in kb.kinds],
        "sensors": [
            {
                "id": s.id,
                "name": s.name,
                "outputs": [k.label for k in s.outputs],
                "active": s.active,
                "context": _context_json(s.context),
                "domains": list(s.domains),
            }
            for s in kb.sensors
        ],
        "dpcs": [
            {
                "id": d.id,
                "name": d.name,
                "signatures": [
                    {"inputs": [k.label for k in sig.inputs], "output": sig.output.label}
                    for sig in d.signatures
                ],
                "context": _context_json(d.context),
            }
            for d in kb.dpcs
        ],
        "tasks": [
            {
                "id": t.id,
                "name": t.name,
                "required_stream": [k.label for k in t.required_stream],
                "concepts": {c: v for c, v in t.concept_bindings},
            }
            for t in kb.tasks
        ],
        "questions": [
            {"id": q.id, "text": q.text, "concept": q.concept} for q in kb.questions
        ],
    }
    if kb.units:
        doc["units"] = list(kb.units)
    return doc


def dumps_kb(kb) -> str:
    return json.dumps(kb_document(kb), indent=2) + "\n"


def save_kb(kb, path):
    """Write the canonical serialization; load_kb(save_kb(kb)) == kb.

    The write is atomic (temp file + rename) so readers never observe a
    half-written KB.
    """
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps_kb(kb), encoding="utf-8")
    os.replace(tmp, path)


# -- ingestion ---------------------------------------------------------------


def add_description(kb, entity) -> KnowledgeBase:
    """Insert one entity, returning a new KB with indexes rebuilt.

    Rejects id collisions (DuplicateIdError) and anything that would make
    the KB invalid, e.g. a task binding a concept with no question
    (KbValidationError).
    """
    if isinstance(entity, SensorDescription):
        if entity.id in kb._sensors_by_id:
            raise DuplicateIdError(f"sensor id {entity.id!r} already exists")
        new = replace(kb, sensors=kb.sensors + (entity,))
    elif isinstance(entity, DpcDescription):
        if entity.id in kb._dpcs_by_id:
            raise DuplicateIdError(f"dpc id {entity.id!r} already exists")
        new = replace(kb, dpcs=kb.dpcs + (entity,))
    elif isinstance(entity, TaskDescription):
        if entity.id in kb._tasks_by_id:
            raise DuplicateIdError(f"task id {entity.id!r} already exists")
        new = replace(kb, tasks=kb.tasks + (entity,))
    elif isinstance(entity, Question):
        if entity.id in kb._questions_by_id:
            raise DuplicateIdError(f"question id {entity.id!r} already exists")
        new = replace(kb, questions=kb.questions + (entity,))
    else:
        raise TypeError(f"cannot add entity of type {type(entity).__name__}")

    report = validate_kb(new)
    if report.errors:
        raise KbValidationError(report)
    return new
