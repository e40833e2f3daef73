"""Planning as rewriting of C-sets: schemas, instances, matches, pushouts and DPO rules."""

from __future__ import annotations

from .classical import (
    ActionSchema,
    ClassicalDomain,
    ClassicalProblem,
    GroundAction,
    Literal,
    applicable,
    ground,
    plan_bfs_classical,
)
from .colimit import (
    PushoutResult,
    coproduct,
    glue,
    glue_named,
    is_pushout_square,
    pushout,
    quotient,
    verify_universal_property,
)
from .cset import (
    CSet,
    CSetError,
    CSetMorphism,
    Triple,
    canonical_hash,
    category_of_elements,
    from_elements,
    is_mono,
    isomorphic,
)
from .formats import DocumentError, DomainDocument, parse, serialize
from .hom import SearchStats, count_homomorphisms, exists_mono, find_homomorphisms
from .planner import (
    Action,
    Plan,
    PlanningProblem,
    PlanStep,
    applicable_actions,
    goal_reached,
    plan_bfs,
    transition,
    validate_plan,
)
from .rewrite import GluingError, Rule, apply_rule, check_gluing, pushout_complement, rewrite_all
from .schema import NonSaturatingError, Schema, SchemaError, build_schema, hom_set, representable

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
