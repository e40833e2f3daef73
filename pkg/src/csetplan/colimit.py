"""Coproducts, pushouts and gluings of C-sets, computed pointwise.

Apex elements are numbered in the order of the smallest member of their class
in the disjoint union (left summand first), so results are reproducible.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Union

from .cset import CSet, CSetError, CSetMorphism, check_same_schema
from .hom import find_homomorphisms
from .schema import DEFAULT_PATH_BOUND, Schema, SchemaError, hom_set, representable, walk


class ColimitError(ValueError):
    pass


@dataclass
class PushoutResult:
    apex: CSet
    left: CSetMorphism
    right: CSetMorphism


class _Partition:
    """Union-find over the elements of one object."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


def _disjoint_union(x: CSet, y: CSet) -> tuple[CSet, dict[str, int]]:
    """``x + y`` with ``y``'s elements shifted; returns the per-object offsets."""
    schema = x.schema
    s = CSet(schema)
    offset = {}
    for ob in schema.objects:
        offset[ob] = x.nparts(ob)
        s.add_parts(ob, x.nparts(ob) + y.nparts(ob))
    for m in schema.morphisms:
        for i in x.parts(m.dom):
            s.set_subpart(m.name, i, x.subpart(m.name, i))
        for i in y.parts(m.dom):
            s.set_subpart(m.name, offset[m.dom] + i, offset[m.cod] + y.subpart(m.name, i))
    return s, offset


def quotient(
    x: CSet,
    pairs: Iterable[tuple[str, int, int]],
    *,
    close: bool = True,
) -> tuple[CSet, CSetMorphism]:
    """Identify the given ``(object, a, b)`` pairs and return the quotient map.

    With ``close`` the identification is extended to the smallest congruence,
    so images under every generator are merged too. Without it the caller
    guarantees the relation is already compatible; a conflict then raises.
    """
    schema = x.schema
    part = {ob: _Partition(x.nparts(ob)) for ob in schema.objects}
    todo = list(pairs)
    while todo:
        ob, a, b = todo.pop()
        if part[ob].union(a - 1, b - 1) and close:
            for m in schema.outgoing(ob):
                todo.append((m.cod, x.subpart(m.name, a), x.subpart(m.name, b)))

    q = CSet(schema)
    proj: dict[str, list[int]] = {}
    for ob in schema.objects:
        p = part[ob]
        ids: dict[int, int] = {}
        row = []
        for i in range(x.nparts(ob)):
            r = p.find(i)
            if r not in ids:
                ids[r] = len(ids) + 1
            row.append(ids[r])
        q.add_parts(ob, len(ids))
        proj[ob] = row
    for m in schema.morphisms:
        induced: dict[int, int] = {}
        for i in x.parts(m.dom):
            c = proj[m.dom][i - 1]
            v = proj[m.cod][x.subpart(m.name, i) - 1]
            if induced.setdefault(c, v) != v:
                raise ColimitError(
                    f"identification is not compatible with {m.name}: class {m.dom}#{c} "
                    f"would map to both {m.cod}#{induced[c]} and {m.cod}#{v}"
                )
        for c, v in induced.items():
            q.set_subpart(m.name, c, v)
    return q, CSetMorphism(x, q, proj, check=False)


def coproduct(x: CSet, y: CSet) -> PushoutResult:
    check_same_schema(x, y)
    s, offset = _disjoint_union(x, y)
    left = CSetMorphism(x, s, {ob: tuple(x.parts(ob)) for ob in x.schema.objects}, check=False)
    right = CSetMorphism(
        y, s, {ob: tuple(offset[ob] + i for i in y.parts(ob)) for ob in y.schema.objects}, check=False
    )
    return PushoutResult(s, left, right)


def pushout(f: CSetMorphism, g: CSetMorphism) -> PushoutResult:
    """Glue ``f.cod`` and ``g.cod`` along the shared domain."""
    if f.dom != g.dom:
        raise ColimitError("pushout needs a span: both maps must share their domain")
    check_same_schema(f.cod, g.cod)
    f.check_natural()
    g.check_natural()
    s, offset = _disjoint_union(f.cod, g.cod)
    pairs = [
        (ob, f(ob, z), offset[ob] + g(ob, z))
        for ob in f.dom.schema.objects
        for z in f.dom.parts(ob)
    ]
    apex, proj = quotient(s, pairs, close=False)
    x, y = f.cod, g.cod
    left = CSetMorphism(
        x, apex, {ob: proj.components[ob][: x.nparts(ob)] for ob in x.schema.objects}, check=False
    )
    right = CSetMorphism(
        y, apex, {ob: proj.components[ob][offset[ob]:] for ob in y.schema.objects}, check=False
    )
    return PushoutResult(apex, left, right)


def mediators(
    result: PushoutResult,
    p: CSetMorphism,
    q: CSetMorphism,
    limit: int | None = None,
) -> list[CSetMorphism]:
    """All maps ``u`` from the apex with ``left;u == p`` and ``right;u == q``."""
    forced: dict[str, dict[int, int]] = {ob: {} for ob in result.apex.schema.objects}
    for inj, leg in ((result.left, p), (result.right, q)):
        for ob, comp in inj.components.items():
            for i, a in enumerate(comp, start=1):
                if forced[ob].setdefault(a, leg(ob, i)) != leg(ob, i):
                    return []
    return find_homomorphisms(result.apex, p.cod, initial=forced, limit=limit)


def verify_universal_property(
    span: tuple[CSetMorphism, CSetMorphism],
    candidate: PushoutResult,
    cocone: tuple[CSetMorphism, CSetMorphism],
) -> bool:
    """Check that exactly one map from the candidate apex mediates to ``cocone``.

    The mediator search enumerates every natural map agreeing with the cocone
    on the injected elements, so extra unconstrained elements show up as
    either no mediator or several. Raises if the test cocone does not commute.
    """
    f, g = span
    p, q = cocone
    if f.compose(p) != g.compose(q):
        raise ColimitError("test cocone does not commute over the span")
    if f.compose(candidate.left).components != g.compose(candidate.right).components:
        return False
    return len(mediators(candidate, p, q, limit=2)) == 1


def is_pushout_square(
    f: CSetMorphism, g: CSetMorphism, p: CSetMorphism, q: CSetMorphism
) -> bool:
    """Whether the commuting square ``f;p == g;q`` is a pushout.

    Compares against the constructed pushout: the square is a pushout iff the
    unique mediator out of the constructed apex is an isomorphism.
    """
    if f.compose(p) != g.compose(q):
        return False
    po = pushout(f, g)
    found = mediators(po, p, q, limit=2)
    if len(found) != 1:
        return False
    u = found[0]
    return u.is_injective() and u.is_surjective()


Generators = Union[Mapping[str, str], Sequence[tuple[str, int]]]


def _named_generators(schema: Schema, generators: Generators) -> list[tuple[str, str]]:
    if isinstance(generators, Mapping):
        named = list(generators.items())
    else:
        named = []
        for ob, count in generators:
            named.extend((f"{ob}{i}", ob) for i in range(1, count + 1))
    seen = set()
    for name, ob in named:
        if not schema.has_object(ob):
            raise SchemaError(f"generator {name!r} has unknown object {ob!r}")
        if name in seen:
            raise ColimitError(f"duplicate generator name {name!r}")
        seen.add(name)
    return named


def glue_named(
    schema: Schema,
    generators: Generators,
    identifications: Iterable[tuple[str, str]] = (),
    bound: int = DEFAULT_PATH_BOUND,
) -> tuple[CSet, dict[str, tuple[str, int]]]:
    """Colimit of representables, returning the instance and each generator's element.

    ``generators`` is either ``{name: object}`` or ``[(object, multiplicity)]``;
    the latter names generators ``<object><k>`` counting from 1. Identifications
    address elements as ``name`` or ``name.g1.g2`` (follow generators from the
    named element).
    """
    named = _named_generators(schema, generators)
    x = CSet(schema)
    roots: dict[str, tuple[str, int]] = {}
    origin: dict[str, tuple[str, dict[str, int]]] = {}
    for name, ob in named:
        rep = representable(schema, ob, bound)
        s, offset = _disjoint_union(x, rep)
        x = s
        roots[name] = (ob, offset[ob] + 1)
        origin[name] = (ob, offset)

    def locate(address: str) -> tuple[str, int]:
        name, *steps = address.split(".")
        if name not in origin:
            raise ColimitError(f"unknown generator {name!r} in address {address!r}")
        ob, offset = origin[name]
        try:
            target_ob, k = walk(schema, ob, steps, bound)
        except SchemaError as exc:
            raise ColimitError(f"bad address {address!r}: {exc}") from None
        return target_ob, offset[target_ob] + k

    pairs = []
    for a, b in identifications:
        (oa, ia), (ob_, ib) = locate(a), locate(b)
        if oa != ob_:
            raise ColimitError(f"cannot identify {a!r} ({oa}) with {b!r} ({ob_})")
        pairs.append((oa, ia, ib))
    q, proj = quotient(x, pairs, close=True)
    roots = {name: (ob, proj(ob, i)) for name, (ob, i) in roots.items()}
    if q.validate():
        raise CSetError("glued instance violates the schema equations")
    return q, roots


def glue(
    schema: Schema,
    generators: Generators,
    identifications: Iterable[tuple[str, str]] = (),
    bound: int = DEFAULT_PATH_BOUND,
) -> CSet:
    """Glue representables along the identified elements. See :func:`glue_named`."""
    return glue_named(schema, generators, identifications, bound)[0]


def induced_map(
    dom: CSet,
    dom_roots: Mapping[str, tuple[str, int]],
    cod: CSet,
    cod_roots: Mapping[str, tuple[str, int]],
    bound: int = DEFAULT_PATH_BOUND,
) -> CSetMorphism:
    """The map between two gluings sending each generator of ``dom`` to the same-named one of ``cod``."""
    schema = dom.schema
    images: dict[str, dict[int, int]] = {ob: {} for ob in schema.objects}
    for name, (ob, root) in dom_roots.items():
        if name not in cod_roots:
            raise ColimitError(f"generator {name!r} is missing from the codomain")
        cob, croot = cod_roots[name]
        if cob != ob:
            raise ColimitError(f"generator {name!r} has type {ob} here but {cob} there")
        rep = representable(schema, ob, bound)
        for target_ob in schema.objects:
            homs = hom_set(schema, ob, target_ob, bound)
            for k in rep.parts(target_ob):
                path = homs.classes[k - 1][0]
                a = dom.walk(root, path.steps)
                b = cod.walk(croot, path.steps)
                if images[target_ob].setdefault(a, b) != b:
                    raise ColimitError(
                        f"generator {name!r}: {target_ob}#{a} would map to two elements"
                    )
    comps = {}
    for ob in schema.objects:
        missing = [a for a in dom.parts(ob) if a not in images[ob]]
        if missing:
            raise ColimitError(f"{ob}#{missing[0]} is not generated")
        comps[ob] = tuple(images[ob][a] for a in dom.parts(ob))
    return CSetMorphism(dom, cod, comps)
