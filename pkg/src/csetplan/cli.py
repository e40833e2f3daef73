"""Command-line interface: ``csetplan <command> <file> ...``.

JSON goes to stdout, diagnostics to stderr. Exit codes: 0 ok, 1 usage,
2 parse or validation failure, 3 no plan within bounds, 4 gluing or
applicability failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .classical import format_state, plan_bfs_classical
from .cset import category_of_elements, format_triples
from .formats import (
    DocumentError,
    DomainDocument,
    Labels,
    carry_labels,
    derive_facts,
    dumps,
    instance_to_json,
    parse,
)
from .hom import find_homomorphisms
from .planner import PlanResult, SearchBoundExceeded, plan_bfs, replay
from .rewrite import apply_rule, check_gluing

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVALID = 2
EXIT_NO_PLAN = 3
EXIT_NOT_APPLICABLE = 4


class CommandError(Exception):
    def __init__(self, code: int, message: str, payload: Optional[dict] = None) -> None:
        super().__init__(message)
        self.code = code
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(path: str) -> DomainDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CommandError(EXIT_USAGE, f"cannot read {path}: {exc.strerror}") from None
    except UnicodeDecodeError as exc:
        raise CommandError(EXIT_INVALID, f"{path}: not UTF-8 text ({exc.reason})") from None
    try:
        return parse(text, source=path)
    except DocumentError as exc:
        raise CommandError(EXIT_INVALID, f"{exc.kind} error: {exc}") from None


def _need(kind: str, name: str, names) -> None:
    if name not in names:
        known = ", ".join(sorted(names)) or "none"
        raise CommandError(EXIT_USAGE, f"unknown {kind} {name!r} (known: {known})")


def _match_json(m) -> dict:
    return {ob: {str(k): v for k, v in pairs.items()} for ob, pairs in m.as_dict().items() if pairs}


def _triples(x) -> list[str]:
    return [str(t) for t in category_of_elements(x)]


# -- commands --------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    return {
        "ok": True,
        "objects": len(doc.schema.objects),
        "morphisms": len(doc.schema.morphisms),
        "instances": sorted(doc.instances),
        "rules": sorted(doc.rules),
        "problems": sorted(doc.problems),
        "classical_problems": sorted(doc.classical.problems) if doc.classical else [],
    }


def cmd_homs(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    _need("instance", args.source, doc.instances)
    _need("instance", args.target, doc.instances)
    matches = list(
        find_homomorphisms(doc.instance(args.source), doc.instance(args.target), monic=args.monic, limit=args.limit)
    )
    return {"count": len(matches), "monic": args.monic, "matches": [_match_json(m) for m in matches]}


def cmd_rewrite(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    _need("rule", args.rule, doc.rules)
    _need("instance", args.state, doc.instances)
    rule = doc.rule(args.rule)
    x, labels = doc.instance_with_labels(args.state)
    effect_labels = doc.rule_effect_labels(args.rule)
    matches = list(find_homomorphisms(rule.pattern, x, monic=True))
    if not matches:
        raise CommandError(EXIT_NOT_APPLICABLE, f"rule {args.rule!r} has no match in {args.state!r}")
    if args.all:
        chosen = list(enumerate(matches))
    else:
        if not 0 <= args.match < len(matches):
            raise CommandError(EXIT_USAGE, f"--match must be in 0..{len(matches) - 1}")
        chosen = [(args.match, matches[args.match])]
    results = []
    rejected = []
    for index, m in chosen:
        report = check_gluing(rule.l, m)
        if not report.ok:
            rejected.append(
                {
                    "index": index,
                    "match": _match_json(m),
                    "dangling": [str(d) for d in report.dangling],
                    "identification": [str(i) for i in report.identification],
                }
            )
            continue
        outcome = apply_rule(rule, x, m)
        y_labels = carry_labels(outcome, labels, effect_labels)
        results.append(
            {
                "index": index,
                "match": _match_json(m),
                "instance": instance_to_json(outcome.result, y_labels),
                "triples": _triples(outcome.result),
            }
        )
    payload = {"rule": args.rule, "state": args.state, "results": results, "rejected": rejected}
    if not results:
        details = "; ".join(d for r in rejected for d in r["dangling"] + r["identification"])
        raise CommandError(EXIT_NOT_APPLICABLE, f"gluing conditions fail: {details}", payload)
    return payload


def _plan(doc: DomainDocument, name: str, max_depth: int, max_states: int) -> PlanResult:
    try:
        result = plan_bfs(doc.problem(name), max_depth=max_depth, max_states=max_states)
    except SearchBoundExceeded as exc:
        raise CommandError(EXIT_NO_PLAN, str(exc), {"plan": None, "statistics": exc.stats.to_json()}) from None
    if result.plan is None:
        raise CommandError(
            EXIT_NO_PLAN,
            f"no plan within depth {max_depth}",
            {"plan": None, "statistics": result.stats.to_json()},
        )
    return result


def _final_labels(doc: DomainDocument, name: str, result: PlanResult) -> Labels:
    """Carry the initial labels through every step of the plan."""
    problem = doc.problem(name)
    labels = doc.problem_initial_labels(name)
    assert result.plan is not None
    for step, outcome in zip(result.plan.steps, replay(problem, result.plan)):
        labels = carry_labels(outcome, labels, doc.rule_effect_labels(step.rule))
    return labels


def categorical_report(doc: DomainDocument, name: str, max_depth: int, max_states: int) -> dict:
    result = _plan(doc, name, max_depth, max_states)
    assert result.plan is not None and result.final_state is not None
    labels = _final_labels(doc, name, result)
    facts = derive_facts(result.final_state, labels, doc.problems[name].facts)
    return {
        "plan": result.plan.to_json(),
        "length": len(result.plan),
        "statistics": result.stats.to_json(),
        "final_state": instance_to_json(result.final_state, labels),
        "facts": [str(f) for f in sorted(facts)],
    }


def classical_report(doc: DomainDocument, name: str, max_depth: int, max_states: int) -> dict:
    try:
        result = plan_bfs_classical(doc.classical_problem(name), max_depth=max_depth, max_states=max_states)
    except SearchBoundExceeded as exc:
        raise CommandError(EXIT_NO_PLAN, str(exc), {"plan": None, "statistics": exc.stats.to_json()}) from None
    if result.plan is None:
        raise CommandError(
            EXIT_NO_PLAN, f"no plan within depth {max_depth}", {"plan": None, "expansions": result.expansions}
        )
    assert result.final_state is not None
    return {
        "plan": [str(a) for a in result.plan],
        "length": len(result.plan),
        "expansions": result.expansions,
        "final_state": format_state(result.final_state),
    }


def cmd_plan(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    _need("problem", args.problem, doc.problems)
    return {"problem": args.problem, **categorical_report(doc, args.problem, args.max_depth, args.max_states)}


def cmd_plan_classical(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    _need("classical problem", args.problem, doc.classical.problems if doc.classical else {})
    return {"problem": args.problem, **classical_report(doc, args.problem, args.max_depth, args.max_states)}


def compare_report(doc: DomainDocument, name: str, max_depth: int = 10, max_states: int = 10_000) -> dict:
    """Run both planners and report facts on which their final states disagree."""
    spec = doc.problems[name]
    if spec.classical is None:
        raise CommandError(EXIT_USAGE, f"problem {name!r} names no classical counterpart")
    cat = categorical_report(doc, name, max_depth, max_states)
    cls = classical_report(doc, spec.classical, max_depth, 100_000)
    derived = set(cat["facts"])
    predicates = {q.predicate for q in spec.facts}
    classical_facts = {
        lit for lit in cls["final_state"] if lit.split("(", 1)[0] in predicates
    }
    return {
        "problem": name,
        "categorical": cat,
        "classical": {"problem": spec.classical, **cls},
        "divergence": {
            "classical_residue": sorted(classical_facts - derived),
            "categorical_only": sorted(derived - classical_facts),
            "agreed": sorted(derived & classical_facts),
        },
    }


def cmd_compare(args: argparse.Namespace) -> dict:
    doc = _load(args.file)
    _need("problem", args.problem, doc.problems)
    return compare_report(doc, args.problem, args.max_depth, args.max_states)


def cmd_export_triples(args: argparse.Namespace) -> str:
    doc = _load(args.file)
    _need("instance", args.instance, doc.instances)
    return format_triples(category_of_elements(doc.instance(args.instance)))


# -- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="csetplan", description="Planning with C-set rewriting.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="parse and check a domain document")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("homs", help="enumerate homomorphisms between two instances")
    p.add_argument("file")
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--monic", action="store_true")
    p.add_argument("--limit", type=int)
    p.set_defaults(func=cmd_homs)

    p = sub.add_parser("rewrite", help="apply a rule to an instance")
    p.add_argument("file")
    p.add_argument("--rule", required=True)
    p.add_argument("--state", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--match", type=int, default=0, help="index into the monic matches (default 0)")
    group.add_argument("--all", action="store_true", help="rewrite at every match")
    p.set_defaults(func=cmd_rewrite)

    for name, func, help_text in (
        ("plan", cmd_plan, "breadth-first plan over C-set states"),
        ("plan-classical", cmd_plan_classical, "breadth-first plan over literal sets"),
        ("compare", cmd_compare, "run both planners and report divergence"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file")
        p.add_argument("--problem", required=True)
        p.add_argument("--max-depth", type=int, default=10)
        p.add_argument("--max-states", type=int, default=10_000)
        p.set_defaults(func=func)

    p = sub.add_parser("export-triples", help="print the category of elements of an instance")
    p.add_argument("file")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_export_triples)
    return parser


def _emit(value: Any) -> None:
    sys.stdout.write(value if isinstance(value, str) else dumps(value))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _emit(args.func(args))
    except CommandError as exc:
        if exc.payload is not None:
            _emit(exc.payload)
        print(f"csetplan {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except DocumentError as exc:
        print(f"csetplan {args.command}: {exc.kind} error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
