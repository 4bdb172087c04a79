"""Command-line interface: batch/scripting mirror of the service.

Exit codes: 0 success, 1 domain error (validation failure, unknown task,
...), 2 usage error. All output is deterministic for fixed inputs; pass
--json for machine-readable output.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import composer, context, cost, deploy, qa, service
from . import kb as kb_mod


class CliError(Exception):
    """Domain-level failure; message printed to stderr, exit code 1."""


def _load(path):
    try:
        return kb_mod.load_kb(path)
    except FileNotFoundError:
        raise CliError(f"KB file not found: {path}")
    except kb_mod.KbParseError as exc:
        raise CliError(f"cannot parse {path}: {exc}")
    except kb_mod.KbValidationError as exc:
        lines = [f"invalid KB {path}:"]
        lines.extend(f"  {v}" for v in exc.report.errors)
        raise CliError("\n".join(lines))


def _kind_by_label(kb, label):
    for kind in kb.kinds:
        if kind.label == label:
            return kind
    raise CliError(f"unknown kind label {label!r}")


def _print_json(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


# -- subcommands -------------------------------------------------------------


def cmd_validate(args):
    try:
        kb = kb_mod.load_kb(args.kb)
    except FileNotFoundError:
        raise CliError(f"KB file not found: {args.kb}")
    except kb_mod.KbParseError as exc:
        raise CliError(f"cannot parse {args.kb}: {exc}")
    except kb_mod.KbValidationError as exc:
        report = exc.report
        if args.json:
            _print_json(service._validation_json(report))
        else:
            for v in report.errors:
                print(f"error: {v}")
            for v in report.warnings:
                print(f"warning: {v}")
        return 1
    report = kb_mod.validate_kb(kb)
    if args.json:
        _print_json(service._validation_json(report))
    else:
        for v in report.warnings:
            print(f"warning: {v}")
        print(f"OK: {len(kb.sensors)} sensors, {len(kb.dpcs)} dpcs, "
              f"{len(kb.tasks)} tasks, {len(kb.questions)} questions")
    return 0


def _parse_answers(pairs):
    entries = []
    for pair in pairs or ():
        if "=" not in pair:
            raise CliError(f"--answer expects question=value, got {pair!r}")
        q, _, v = pair.partition("=")
        entries.append((q, v))
    return qa.ConstraintSet(tuple(entries))


def cmd_tasks(args):
    kb = _load(args.kb)
    constraints = _parse_answers(args.answer)
    try:
        tasks = qa.matching_tasks(kb, constraints)
    except qa.QaError as exc:
        raise CliError(str(exc))
    if args.json:
        _print_json({"tasks": [service._task_json(t) for t in tasks]})
    else:
        for t in tasks:
            stream = ", ".join(k.label for k in t.required_stream)
            print(f"{t.id}  {t.name}  [{stream}]")
        if not tasks:
            print("no matching tasks")
    return 0


def _limits(args):
    return composer.ComposeLimits(
        max_depth=args.max_depth,
        max_solutions=args.max_solutions,
    )


def _compose(kb, args):
    try:
        return composer.compose(kb, args.task, _limits(args))
    except composer.UnknownTaskError as exc:
        raise CliError(str(exc))


def cmd_compose(args):
    kb = _load(args.kb)
    result = _compose(kb, args)
    if args.json:
        _print_json({
            "solutions": [service._solution_json(kb, s) for s in result.solutions],
            "report": service._report_json(result.report),
            "truncated": result.truncated,
        })
        return 0
    for s in result.solutions:
        print(f"{composer.canonical_hash(s)}  {composer.expression(kb, s)}")
    if not result.solutions:
        print("no solution can produce the required stream")
        for kind in result.report.unsatisfiable_kinds:
            print(f"  unsatisfiable: {kind.label}")
        for ms in result.report.missing_sets:
            kinds = ", ".join(k.label for k in ms.kinds)
            unlocks = ", ".join(f"{d}[{i}]" for d, i in ms.unlocks)
            print(f"  deploy sensors for: {{{kinds}}}  (unlocks {unlocks})")
    if result.truncated:
        print("(truncated by limits)")
    return 0


def cmd_context(args):
    kb = _load(args.kb)
    available, _ = context.discover(kb)
    if args.json:
        _print_json({
            "available": [
                {"kind": service._kind_json(k), "tier": tier}
                for k, tier in sorted(available.items(), key=lambda kv: (kv[1], kv[0]))
            ]
        })
        return 0
    by_tier = {}
    for kind, tier in available.items():
        by_tier.setdefault(tier, []).append(kind)
    for tier in sorted(by_tier):
        kinds = ", ".join(k.label for k in sorted(by_tier[tier]))
        print(f"tier {tier}: {kinds}")
    return 0


def _parse_weights(spec):
    if not spec:
        return None
    weights = {}
    for part in spec.split(","):
        if "=" not in part:
            raise CliError(f"--weights expects name=value pairs, got {part!r}")
        name, _, value = part.partition("=")
        try:
            weights[name.strip()] = float(value)
        except ValueError:
            raise CliError(f"weight for {name!r} is not a number: {value!r}")
    try:
        return cost.WeightVector(weights)
    except cost.InvalidWeightsError as exc:
        raise CliError(str(exc))


def cmd_rank(args):
    kb = _load(args.kb)
    result = _compose(kb, args)
    if not result.solutions:
        raise CliError(f"task {args.task!r} has no solutions to rank")
    weights = _parse_weights(args.weights)
    try:
        ranked = cost.rank(kb, result.solutions, weights)
    except cost.CostError as exc:
        raise CliError(str(exc))
    if args.json:
        _print_json({"scores": [service._score_json(kb, r) for r in ranked]})
        return 0
    for i, score in enumerate(ranked, start=1):
        print(f"{i}. total={score.total:.4f}  "
              f"{composer.canonical_hash(score.solution)}  "
              f"{composer.expression(kb, score.solution)}")
    return 0


def cmd_plan(args):
    kb = _load(args.kb)
    result = _compose(kb, args)
    matches = [s for s in result.solutions
               if composer.canonical_hash(s).startswith(args.solution)]
    if not matches:
        raise CliError(f"no composed solution with hash {args.solution!r}")
    if len(matches) > 1:
        raise CliError(f"hash prefix {args.solution!r} is ambiguous")
    extras = {_kind_by_label(kb, label) for label in args.extra or ()}
    try:
        plan = deploy.generate_plan(kb, matches[0], extras)
    except deploy.UnderivableExtraError as exc:
        raise CliError(str(exc))
    text = deploy.emit_plan(plan)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _prompt(label, default=None):
    suffix = f" [{default}]" if default is not None else ""
    value = input(f"{label}{suffix}: ").strip()
    return value if value else (default if default is not None else "")


def _prompt_kinds(kb, label):
    raw = _prompt(label)
    kinds = []
    for token in [t for t in raw.split(",") if t.strip()]:
        token = token.strip()
        if ":" in token:
            name, vt, unit = (token.split(":") + ["none"])[:3]
            kinds.append(kb_mod.Kind(name, vt, unit or "none"))
        else:
            kinds.append(_kind_by_label(kb, token))
    return kinds


def _prompt_context(kb):
    raw = _prompt("context values (name=value, comma separated)", "")
    ctx = {}
    for part in [p for p in raw.split(",") if p.strip()]:
        name, _, value = part.partition("=")
        try:
            ctx[name.strip()] = float(value)
        except ValueError:
            raise CliError(f"context value for {name!r} is not a number")
    return ctx


def cmd_describe(args):
    kb = _load(args.kb)
    if args.sensor:
        entity = kb_mod.SensorDescription(
            id=_prompt("sensor id"),
            name=_prompt("name"),
            outputs=_prompt_kinds(kb, "outputs (label or label:type:unit, comma separated)"),
            active=_prompt("active (y/n)", "y").lower().startswith("y"),
            context=_prompt_context(kb),
            domains=[d.strip() for d in _prompt("domains (comma separated)", "").split(",")
                     if d.strip()],
        )
    elif args.dpc:
        dpc_id = _prompt("dpc id")
        name = _prompt("name")
        signatures = []
        while True:
            inputs = _prompt_kinds(kb, "signature inputs (empty to finish)")
            if not inputs:
                break
            output = _prompt_kinds(kb, "signature output")
            if len(output) != 1:
                raise CliError("a signature has exactly one output")
            signatures.append(kb_mod.Signature(inputs=inputs, output=output[0]))
        entity = kb_mod.DpcDescription(
            id=dpc_id, name=name, signatures=signatures, context=_prompt_context(kb))
    elif args.task:
        bindings = []
        raw = _prompt("concept bindings (concept=value, comma separated)", "")
        for part in [p for p in raw.split(",") if p.strip()]:
            c, _, v = part.partition("=")
            bindings.append((c.strip(), v.strip()))
        entity = kb_mod.TaskDescription(
            id=_prompt("task id"),
            name=_prompt("name"),
            required_stream=_prompt_kinds(kb, "required stream kinds"),
            concept_bindings=bindings,
        )
    else:
        entity = kb_mod.Question(
            id=_prompt("question id"),
            text=_prompt("question text"),
            concept=_prompt("concept"),
        )
    try:
        new_kb = kb_mod.add_description(kb, entity)
    except (kb_mod.DuplicateIdError, kb_mod.KbValidationError) as exc:
        raise CliError(str(exc))
    out = args.out or args.kb
    kb_mod.save_kb(new_kb, out)
    print(f"wrote {out} (version {new_kb.version_hash()})")
    return 0


def cmd_serve(args):  # pragma: no cover - starts a server
    service.run(
        args.kb,
        listen=args.listen,
        session_ttl=args.session_ttl,
        limits=composer.ComposeLimits(max_depth=args.max_depth,
                                      max_solutions=args.max_solutions),
        static_dir=args.static,
        api_token=args.token,
    )
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="streamweave",
        description="Discover, compose, rank, and plan IoT data-stream pipelines "
                    "from a knowledge base.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("kb", help="path to the KB file")
        p.set_defaults(fn=fn)
        return p

    p = add("validate", cmd_validate, "check a KB file against all invariants")
    p.add_argument("--json", action="store_true")

    p = add("tasks", cmd_tasks, "list tasks matching the given answers")
    p.add_argument("--answer", action="append", metavar="QUESTION=VALUE")
    p.add_argument("--json", action="store_true")

    def compose_args(p):
        p.add_argument("--task", required=True)
        p.add_argument("--max-solutions", type=int, default=64)
        p.add_argument("--max-depth", type=int, default=16)

    p = add("compose", cmd_compose, "enumerate solutions for a task")
    compose_args(p)
    p.add_argument("--json", action="store_true")

    p = add("context", cmd_context, "list derivable kinds by tier")
    p.add_argument("--json", action="store_true")

    p = add("rank", cmd_rank, "rank a task's solutions by weighted context cost")
    compose_args(p)
    p.add_argument("--weights", metavar="NAME=W,NAME=W", default=None)
    p.add_argument("--json", action="store_true")

    p = add("plan", cmd_plan, "emit the deployment plan for a chosen solution")
    compose_args(p)
    p.add_argument("--solution", required=True, metavar="HASH",
                   help="canonical hash (or unambiguous prefix) from compose")
    p.add_argument("--extra", action="append", metavar="KIND",
                   help="extra context kind to include (repeatable)")
    p.add_argument("--out", default=None)

    p = add("describe", cmd_describe, "interactively add one description to the KB")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--sensor", action="store_true")
    group.add_argument("--dpc", action="store_true")
    group.add_argument("--task", action="store_true")
    group.add_argument("--question", action="store_true")
    p.add_argument("--out", default=None, help="write here instead of in place")

    p = add("serve", cmd_serve, "serve the HTTP API (and UI bundle if present)")
    p.add_argument("--listen", default="127.0.0.1:8080")
    p.add_argument("--session-ttl", type=float, default=service.DEFAULT_SESSION_TTL)
    p.add_argument("--max-solutions", type=int, default=64)
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--static", default=None, help="directory with the built web UI")
    p.add_argument("--token", default=None, help="require this bearer token on the API")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
