"""JSON domain documents: schema, instances, rules, problems and a classical section.

``parse`` validates a document against the shipped JSON Schema, resolves
references and builds every instance, rule and problem so errors surface at
load time. ``serialize`` writes the canonical form; canonical documents
round-trip byte for byte.
"""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Any, Optional, Union

import jsonschema

from .classical import (
    ActionSchema,
    ClassicalDomain,
    ClassicalError,
    ClassicalProblem,
    Literal,
)
from .colimit import ColimitError, glue_named, induced_map
from .cset import CSet, CSetError, CSetMorphism
from .planner import PlanningError, PlanningProblem
from .rewrite import RewriteError, RewriteOutcome, Rule
from .schema import Schema, SchemaError, build_schema

Labels = dict[str, list[Optional[str]]]


class DocumentError(ValueError):
    """A document failed to load. ``kind`` is syntax, structure, reference or validation."""

    def __init__(self, kind: str, message: str, location: str = "") -> None:
        self.kind = kind
        self.message = message
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


@lru_cache(maxsize=1)
def document_schema() -> dict:
    text = resources.files(__package__).joinpath("domain.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


# -- specs -----------------------------------------------------------------


@dataclass
class GlueSpec:
    generators: dict[str, str]
    identify: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"generators": dict(self.generators)}
        if self.identify:
            out["identify"] = [list(p) for p in self.identify]
        return out


@dataclass
class InstanceSpec:
    parts: dict[str, int] = field(default_factory=dict)
    subparts: dict[str, list[int]] = field(default_factory=dict)
    labels: dict[str, list[Optional[str]]] = field(default_factory=dict)
    glue: Optional[GlueSpec] = None

    def to_json(self) -> dict:
        if self.glue is not None:
            return {"glue": self.glue.to_json()}
        out: dict[str, Any] = {"parts": dict(self.parts)}
        if self.subparts:
            out["subparts"] = {k: list(v) for k, v in self.subparts.items()}
        if self.labels:
            out["labels"] = {k: list(v) for k, v in self.labels.items()}
        return out


InstanceRef = Union[str, InstanceSpec]


@dataclass
class RuleSpec:
    sides: Optional[dict[str, InstanceRef]] = None  # I, K, O
    l: Optional[dict[str, list[int]]] = None
    r: Optional[dict[str, list[int]]] = None
    glue: Optional[dict[str, GlueSpec]] = None

    def to_json(self) -> dict:
        if self.glue is not None:
            return {"glue": {k: self.glue[k].to_json() for k in ("I", "K", "O")}}
        assert self.sides is not None and self.l is not None and self.r is not None
        out: dict[str, Any] = {k: _ref_json(self.sides[k]) for k in ("I", "K", "O")}
        out["l"] = {k: list(v) for k, v in self.l.items()}
        out["r"] = {k: list(v) for k, v in self.r.items()}
        return out


@dataclass
class FactQuery:
    """Derive ``predicate(subject, end)`` for every element reached along ``path``.

    A step ``g`` follows generator ``g``; ``~g`` follows it backwards to every
    element whose ``g`` value is the current one.
    """

    predicate: str
    subject: str
    path: list[str]

    def to_json(self) -> dict:
        return {"predicate": self.predicate, "subject": self.subject, "path": list(self.path)}


@dataclass
class ProblemSpec:
    initial: InstanceRef
    goal: InstanceRef
    rules: list[str]
    classical: Optional[str] = None
    facts: list[FactQuery] = field(default_factory=list)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "initial": _ref_json(self.initial),
            "goal": _ref_json(self.goal),
            "rules": list(self.rules),
        }
        if self.classical is not None:
            out["classical"] = self.classical
        if self.facts:
            out["facts"] = [f.to_json() for f in self.facts]
        return out


@dataclass
class ActionSpec:
    name: str
    parameters: list[str]
    precondition: list[Literal]
    add: list[Literal] = field(default_factory=list)
    delete: list[Literal] = field(default_factory=list)

    def build(self) -> ActionSchema:
        return ActionSchema(
            self.name,
            tuple(self.parameters),
            frozenset(self.precondition),
            frozenset(self.add),
            frozenset(self.delete),
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "parameters": list(self.parameters),
            "precondition": [_literal_json(l) for l in self.precondition],
            "add": [_literal_json(l) for l in self.add],
            "delete": [_literal_json(l) for l in self.delete],
        }


@dataclass
class ClassicalProblemSpec:
    objects: list[str]
    initial: list[Literal]
    goal: list[Literal]

    def to_json(self) -> dict:
        return {
            "objects": list(self.objects),
            "initial": [_literal_json(l) for l in self.initial],
            "goal": [_literal_json(l) for l in self.goal],
        }


@dataclass
class ClassicalSpec:
    predicates: dict[str, int]
    actions: list[ActionSpec]
    problems: dict[str, ClassicalProblemSpec] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "predicates": dict(self.predicates),
            "actions": [a.to_json() for a in self.actions],
        }
        if self.problems:
            out["problems"] = {k: v.to_json() for k, v in self.problems.items()}
        return out


def _ref_json(ref: InstanceRef) -> Any:
    return ref if isinstance(ref, str) else ref.to_json()


def _literal_json(lit: Literal) -> list[str]:
    return [lit.predicate, *lit.args]


# -- document --------------------------------------------------------------


@dataclass
class DomainDocument:
    schema: Schema
    schema_json: dict
    instances: dict[str, InstanceSpec] = field(default_factory=dict)
    rules: dict[str, RuleSpec] = field(default_factory=dict)
    problems: dict[str, ProblemSpec] = field(default_factory=dict)
    classical: Optional[ClassicalSpec] = None

    def __post_init__(self) -> None:
        self._instances: dict[str, tuple[CSet, Labels]] = {}
        self._rules: dict[str, Rule] = {}

    # lookups raise DocumentError("reference") for unknown names

    def instance(self, name: str) -> CSet:
        return self.instance_with_labels(name)[0]

    def labels(self, name: str) -> Labels:
        return self.instance_with_labels(name)[1]

    def instance_with_labels(self, name: str) -> tuple[CSet, Labels]:
        if name not in self._instances:
            if name not in self.instances:
                raise DocumentError("reference", f"unknown instance {name!r}")
            self._instances[name] = _build_instance(
                self.schema, self.instances[name], f"$.instances.{name}"
            )[:2]
        return self._instances[name]

    def _resolve(self, ref: InstanceRef, where: str) -> tuple[CSet, Labels, dict]:
        if isinstance(ref, str):
            if ref not in self.instances:
                raise DocumentError("reference", f"unknown instance {ref!r}", where)
            return _build_instance(self.schema, self.instances[ref], where)
        return _build_instance(self.schema, ref, where)

    def rule(self, name: str) -> Rule:
        if name not in self._rules:
            if name not in self.rules:
                raise DocumentError("reference", f"unknown rule {name!r}")
            self._rules[name] = self._build_rule(name, self.rules[name])
        return self._rules[name]

    def rule_effect_labels(self, name: str) -> Labels:
        spec = self.rules[name]
        if spec.sides is None:
            return {}
        return self._resolve(spec.sides["O"], f"$.rules.{name}.O")[1]

    def _build_rule(self, name: str, spec: RuleSpec) -> Rule:
        where = f"$.rules.{name}"
        try:
            if spec.glue is not None:
                built = {}
                for side in ("I", "K", "O"):
                    g = spec.glue[side]
                    built[side] = glue_named(self.schema, g.generators, g.identify)
                (i, i_roots), (k, k_roots), (o, o_roots) = built["I"], built["K"], built["O"]
                l = induced_map(k, k_roots, i, i_roots)
                r = induced_map(k, k_roots, o, o_roots)
            else:
                assert spec.sides is not None and spec.l is not None and spec.r is not None
                i = self._resolve(spec.sides["I"], f"{where}.I")[0]
                k = self._resolve(spec.sides["K"], f"{where}.K")[0]
                o = self._resolve(spec.sides["O"], f"{where}.O")[0]
                l = CSetMorphism(k, i, spec.l)
                r = CSetMorphism(k, o, spec.r)
            return Rule(l, r, name)
        except (SchemaError, CSetError, ColimitError, RewriteError) as exc:
            raise DocumentError("validation", str(exc), where) from None

    def problem(self, name: str) -> PlanningProblem:
        if name not in self.problems:
            raise DocumentError("reference", f"unknown problem {name!r}")
        spec = self.problems[name]
        where = f"$.problems.{name}"
        initial = self._resolve(spec.initial, f"{where}.initial")[0]
        goal = self._resolve(spec.goal, f"{where}.goal")[0]
        rules = {}
        for r in spec.rules:
            if r not in self.rules:
                raise DocumentError("reference", f"unknown rule {r!r}", f"{where}.rules")
            rules[r] = self.rule(r)
        try:
            return PlanningProblem(self.schema, initial, goal, rules)
        except PlanningError as exc:
            raise DocumentError("validation", str(exc), where) from None

    def problem_initial_labels(self, name: str) -> Labels:
        spec = self.problems[name]
        return self._resolve(spec.initial, f"$.problems.{name}.initial")[1]

    def classical_domain(self) -> ClassicalDomain:
        if self.classical is None:
            raise DocumentError("reference", "document has no classical section")
        try:
            return ClassicalDomain(
                dict(self.classical.predicates), [a.build() for a in self.classical.actions]
            )
        except ClassicalError as exc:
            raise DocumentError("validation", str(exc), "$.classical") from None

    def classical_problem(self, name: str) -> ClassicalProblem:
        domain = self.classical_domain()
        assert self.classical is not None
        if name not in self.classical.problems:
            raise DocumentError("reference", f"unknown classical problem {name!r}")
        spec = self.classical.problems[name]
        try:
            return ClassicalProblem(
                domain, tuple(spec.objects), frozenset(spec.initial), frozenset(spec.goal)
            )
        except ClassicalError as exc:
            raise DocumentError("validation", str(exc), f"$.classical.problems.{name}") from None

    def check(self) -> None:
        """Build everything once so every error is reported at load time."""
        for name in self.instances:
            self.instance(name)
        for name in self.rules:
            self.rule(name)
        for name, spec in self.problems.items():
            self.problem(name)
            for q in spec.facts:
                _check_fact_query(self.schema, q, f"$.problems.{name}.facts")
            if spec.classical is not None:
                if self.classical is None or spec.classical not in self.classical.problems:
                    raise DocumentError(
                        "reference",
                        f"unknown classical problem {spec.classical!r}",
                        f"$.problems.{name}.classical",
                    )
        if self.classical is not None:
            self.classical_domain()
            for name in self.classical.problems:
                self.classical_problem(name)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"schema": self.schema_json}
        if self.instances:
            out["instances"] = {k: v.to_json() for k, v in self.instances.items()}
        if self.rules:
            out["rules"] = {k: v.to_json() for k, v in self.rules.items()}
        if self.problems:
            out["problems"] = {k: v.to_json() for k, v in self.problems.items()}
        if self.classical is not None:
            out["classical"] = self.classical.to_json()
        return out


def _build_instance(schema: Schema, spec: InstanceSpec, where: str) -> tuple[CSet, Labels, dict]:
    try:
        if spec.glue is not None:
            x, roots = glue_named(schema, spec.glue.generators, spec.glue.identify)
            labels: Labels = {}
            return x, labels, roots
        for ob in spec.parts:
            if not schema.has_object(ob):
                raise DocumentError("reference", f"unknown object {ob!r}", f"{where}.parts")
        for name in spec.subparts:
            try:
                schema.morphism(name)
            except SchemaError:
                raise DocumentError("reference", f"unknown morphism {name!r}", f"{where}.subparts") from None
        x = CSet.from_data(schema, spec.parts, spec.subparts)
        report = x.validate()
        if report:
            raise DocumentError("validation", "; ".join(map(str, report)), where)
        labels = {}
        for ob, names in spec.labels.items():
            if not schema.has_object(ob):
                raise DocumentError("reference", f"unknown object {ob!r}", f"{where}.labels")
            if len(names) != x.nparts(ob):
                raise DocumentError(
                    "validation", f"{len(names)} labels for {x.nparts(ob)} {ob} parts", f"{where}.labels"
                )
            labels[ob] = list(names)
        return x, labels, {}
    except (SchemaError, CSetError, ColimitError) as exc:
        raise DocumentError("validation", str(exc), where) from None


def _check_fact_query(schema: Schema, q: FactQuery, where: str) -> None:
    try:
        follow(schema, q.subject, q.path)
    except SchemaError as exc:
        raise DocumentError("validation", str(exc), where) from None


# -- parsing ---------------------------------------------------------------


def _glue_spec(data: Mapping) -> GlueSpec:
    return GlueSpec(dict(data["generators"]), [tuple(p) for p in data.get("identify", [])])


def _instance_spec(schema: Schema, data: Mapping) -> InstanceSpec:
    if "glue" in data:
        return InstanceSpec(glue=_glue_spec(data["glue"]))
    parts = {ob: n for ob, n in data["parts"].items()}
    ordered = {ob: parts[ob] for ob in schema.objects if parts.get(ob)}
    # Keep unknown names so the builder can report them.
    ordered.update({ob: n for ob, n in parts.items() if not schema.has_object(ob)})
    subparts = dict(data.get("subparts", {}))
    names = [m.name for m in schema.morphisms if m.name in subparts]
    names += [n for n in subparts if n not in names]
    labels = dict(data.get("labels", {}))
    lab_order = [ob for ob in schema.objects if ob in labels] + [
        ob for ob in labels if not schema.has_object(ob)
    ]
    return InstanceSpec(
        ordered,
        {n: list(subparts[n]) for n in names},
        {ob: list(labels[ob]) for ob in lab_order},
    )


def _instance_ref(schema: Schema, data: Any) -> InstanceRef:
    return data if isinstance(data, str) else _instance_spec(schema, data)


def _literal(data: Sequence[str]) -> Literal:
    return Literal(data[0], tuple(data[1:]))


def _component_map(schema: Schema, data: Mapping) -> dict[str, list[int]]:
    ordered = {ob: list(data[ob]) for ob in schema.objects if data.get(ob)}
    for ob in data:
        if not schema.has_object(ob):
            raise DocumentError("reference", f"unknown object {ob!r} in component map")
    return ordered


def parse(text: str, source: str = "<document>") -> DomainDocument:
    """Parse and fully validate a domain document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("syntax", exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    return from_json(data)


def _json_path(path: Sequence[Any]) -> str:
    out = "$"
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def from_json(data: Any) -> DomainDocument:
    validator = jsonschema.Draft202012Validator(document_schema())
    error = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if error is not None:
        if isinstance(data, dict) and "schema" not in data:
            raise DocumentError("structure", "missing schema section", "$")
        raise DocumentError("structure", error.message, _json_path(error.absolute_path))

    sj = data["schema"]
    try:
        schema = build_schema(
            sj["objects"],
            [(m["name"], m["dom"], m["cod"]) for m in sj["morphisms"]],
            [
                (e["lhs"], e["rhs"], e["at"]) if "at" in e else (e["lhs"], e["rhs"])
                for e in sj.get("equations", [])
            ],
        )
    except SchemaError as exc:
        raise DocumentError("validation", str(exc), "$.schema") from None
    schema_json: dict[str, Any] = {
        "objects": list(sj["objects"]),
        "morphisms": [{"name": m["name"], "dom": m["dom"], "cod": m["cod"]} for m in sj["morphisms"]],
    }
    if sj.get("equations"):
        schema_json["equations"] = [
            {k: e[k] for k in ("lhs", "rhs", "at") if k in e} for e in sj["equations"]
        ]

    instances = {k: _instance_spec(schema, v) for k, v in data.get("instances", {}).items()}
    rules = {}
    for name, r in data.get("rules", {}).items():
        if "glue" in r:
            rules[name] = RuleSpec(glue={k: _glue_spec(r["glue"][k]) for k in ("I", "K", "O")})
        else:
            try:
                rules[name] = RuleSpec(
                    sides={k: _instance_ref(schema, r[k]) for k in ("I", "K", "O")},
                    l=_component_map(schema, r["l"]),
                    r=_component_map(schema, r["r"]),
                )
            except DocumentError as exc:
                raise DocumentError(exc.kind, exc.message, f"$.rules.{name}") from None
    problems = {
        name: ProblemSpec(
            _instance_ref(schema, p["initial"]),
            _instance_ref(schema, p["goal"]),
            list(p["rules"]),
            p.get("classical"),
            [FactQuery(q["predicate"], q["subject"], list(q["path"])) for q in p.get("facts", [])],
        )
        for name, p in data.get("problems", {}).items()
    }
    classical = None
    if "classical" in data:
        c = data["classical"]
        classical = ClassicalSpec(
            dict(c["predicates"]),
            [
                ActionSpec(
                    a["name"],
                    list(a["parameters"]),
                    [_literal(l) for l in a["precondition"]],
                    [_literal(l) for l in a.get("add", [])],
                    [_literal(l) for l in a.get("delete", [])],
                )
                for a in c["actions"]
            ],
            {
                name: ClassicalProblemSpec(
                    list(p["objects"]), [_literal(l) for l in p["initial"]], [_literal(l) for l in p["goal"]]
                )
                for name, p in c.get("problems", {}).items()
            },
        )
    doc = DomainDocument(schema, schema_json, instances, rules, problems, classical)
    doc.check()
    return doc


# -- output ----------------------------------------------------------------


def dumps(value: Any, indent: int = 2, width: int = 88) -> str:
    """JSON text with containers of scalars kept on one line when they fit."""

    def compact(v: Any) -> str:
        return json.dumps(v, ensure_ascii=False, separators=(", ", ": "))

    def has_dict(v: Any) -> bool:
        if isinstance(v, dict):
            return True
        if isinstance(v, list):
            return any(has_dict(i) for i in v)
        return False

    def render(v: Any, level: int) -> str:
        pad = " " * (indent * level)
        inner = " " * (indent * (level + 1))
        if isinstance(v, (dict, list)) and v:
            flat = compact(v)
            if not has_dict(v if isinstance(v, list) else list(v.values())) and len(pad) + len(flat) <= width:
                return flat
            if isinstance(v, dict):
                items = [f"{inner}{json.dumps(k, ensure_ascii=False)}: {render(x, level + 1)}" for k, x in v.items()]
                return "{\n" + ",\n".join(items) + "\n" + pad + "}"
            items = [inner + render(x, level + 1) for x in v]
            return "[\n" + ",\n".join(items) + "\n" + pad + "]"
        return compact(v)

    return render(value, 0) + "\n"


def serialize(doc: DomainDocument) -> str:
    return dumps(doc.to_json())


def instance_to_json(x: CSet, labels: Optional[Labels] = None) -> dict:
    spec = InstanceSpec(
        {ob: x.nparts(ob) for ob in x.schema.objects if x.nparts(ob)},
        {
            m.name: [x.subpart(m.name, i) for i in x.parts(m.dom)]
            for m in x.schema.morphisms
            if x.nparts(m.dom)
        },
        {ob: list(v) for ob, v in (labels or {}).items() if any(n is not None for n in v)},
    )
    return spec.to_json()


def label_of(labels: Optional[Labels], ob: str, i: int) -> str:
    names = (labels or {}).get(ob)
    if names and names[i - 1] is not None:
        return names[i - 1]  # type: ignore[return-value]
    return f"{ob}#{i}"


def carry_labels(outcome: RewriteOutcome, state_labels: Labels, effect_labels: Optional[Labels] = None) -> Labels:
    """Labels for the rewritten state: survivors keep theirs, new elements take the effect's."""
    y = outcome.result
    out: Labels = {ob: [None] * y.nparts(ob) for ob in y.schema.objects}
    z = outcome.complement
    for ob in y.schema.objects:
        old = state_labels.get(ob)
        for i in z.parts(ob):
            if old:
                out[ob][outcome.to_result(ob, i) - 1] = old[outcome.g(ob, i) - 1]
        new = (effect_labels or {}).get(ob)
        if new:
            for i in outcome.from_effect.dom.parts(ob):
                j = outcome.from_effect(ob, i) - 1
                if out[ob][j] is None:
                    out[ob][j] = new[i - 1]
    return {ob: v for ob, v in out.items() if any(n is not None for n in v)}


def follow(schema: Schema, start: str, path: Sequence[str]) -> str:
    """Type-check a fact path and return the object it ends at."""
    ob = start
    if not schema.has_object(ob):
        raise SchemaError(f"unknown object {ob!r}")
    for step in path:
        backwards = step.startswith("~")
        m = schema.morphism(step[1:] if backwards else step)
        if (m.cod if backwards else m.dom) != ob:
            raise SchemaError(f"step {step!r} does not apply at {ob!r}")
        ob = m.dom if backwards else m.cod
    return ob


def reach(x: CSet, start: str, element: int, path: Sequence[str]) -> tuple[str, set[int]]:
    """Elements reached from ``element`` along a fact path (``~g`` walks ``g`` backwards)."""
    ob = start
    current = {element}
    for step in path:
        if step.startswith("~"):
            m = x.schema.morphism(step[1:])
            current = {i for i in x.parts(m.dom) if x.subpart(m.name, i) in current}
            ob = m.dom
        else:
            m = x.schema.morphism(step)
            current = {x.subpart(m.name, i) for i in current}
            ob = m.cod
    return ob, current


def derive_facts(x: CSet, labels: Optional[Labels], queries: Sequence[FactQuery]) -> set[Literal]:
    facts = set()
    for q in queries:
        for i in x.parts(q.subject):
            end_ob, reached = reach(x, q.subject, i, q.path)
            for j in reached:
                facts.add(Literal(q.predicate, (label_of(labels, q.subject, i), label_of(labels, end_ob, j))))
    return facts
