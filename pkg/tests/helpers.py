"""Shared builders and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import random
from pathlib import Path
from typing import Optional

from csetplan.cset import CSet, CSetMorphism, induced_subset
from csetplan.rewrite import Rule
from csetplan.schema import Schema, build_schema

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "csetplan" / "fixtures"

GR = build_schema(["V", "E"], [("src", "E", "V"), ("tgt", "E", "V")], [])


def graph(nv: int, edges=()) -> CSet:
    edges = list(edges)
    return CSet.from_data(
        GR, {"V": nv, "E": len(edges)}, {"src": [s for s, _ in edges], "tgt": [t for _, t in edges]}
    )


def random_graph(rng: random.Random, max_v: int = 4, max_e: int = 4, min_v: int = 1) -> CSet:
    nv = rng.randint(min_v, max_v)
    ne = rng.randint(0, max_e)
    return graph(nv, [(rng.randint(1, nv), rng.randint(1, nv)) for _ in range(ne)])


# -- random schemas and instances ------------------------------------------


def _paths_from(schema: Schema, ob: str, max_len: int = 3):
    frontier = [(ob, ())]
    for _ in range(max_len):
        nxt = []
        for here, steps in frontier:
            for m in schema.outgoing(here):
                nxt.append((m.cod, steps + (m.name,)))
        yield from nxt
        frontier = nxt


def random_schema(rng: random.Random, max_objects: int = 3, max_gens: int = 4, equations: bool = True) -> Schema:
    """An acyclic schema; generators only point from lower to higher objects."""
    n = rng.randint(1, max_objects)
    objects = [f"O{i}" for i in range(n)]
    gens = []
    if n > 1:
        for k in range(rng.randint(0, max_gens)):
            a = rng.randrange(n - 1)
            b = rng.randrange(a + 1, n)
            gens.append((f"g{k}", objects[a], objects[b]))
    schema = build_schema(objects, gens, [])
    if not equations:
        return schema
    eqs = []
    for ob in objects:
        by_target: dict[str, list[tuple[str, ...]]] = {}
        for cod, steps in _paths_from(schema, ob):
            by_target.setdefault(cod, []).append(steps)
        for paths in by_target.values():
            if len(paths) >= 2 and rng.random() < 0.3:
                lhs, rhs = rng.sample(paths, 2)
                eqs.append((list(lhs), list(rhs)))
    return build_schema(objects, gens, eqs)


def random_instance(rng: random.Random, schema: Schema, max_size: int = 4, min_size: int = 0, tries: int = 200) -> CSet:
    """A random valid instance, found by rejection sampling on the equations."""
    for _ in range(tries):
        x = CSet(schema)
        for ob in schema.objects:
            x.add_parts(ob, rng.randint(min_size, max_size))
        ok = True
        for m in schema.morphisms:
            if x.nparts(m.dom) and not x.nparts(m.cod):
                ok = False
                break
            for i in x.parts(m.dom):
                x.set_subpart(m.name, i, rng.randint(1, x.nparts(m.cod)))
        if ok and x.is_valid():
            return x
    # Fall back to the empty instance, which is always valid.
    return CSet(schema)


def all_functions(n: int, m: int):
    return itertools.product(range(1, m + 1), repeat=n)


def brute_homs(pattern: CSet, target: CSet, monic: bool = False) -> set[tuple]:
    """Every natural map by exhaustive enumeration of component tuples."""
    schema = pattern.schema
    choices = []
    for ob in schema.objects:
        funcs = list(all_functions(pattern.nparts(ob), target.nparts(ob)))
        if monic:
            funcs = [f for f in funcs if len(set(f)) == len(f)]
        choices.append(funcs)
    found = set()
    for combo in itertools.product(*choices):
        comps = dict(zip(schema.objects, combo))
        if all(
            comps[m.cod][pattern.subpart(m.name, i) - 1] == target.subpart(m.name, comps[m.dom][i - 1])
            for m in schema.morphisms
            for i in pattern.parts(m.dom)
        ):
            found.add(tuple(combo))
    return found


def brute_isomorphic(x: CSet, y: CSet) -> bool:
    if x.counts() != y.counts():
        return False
    return bool(brute_homs(x, y, monic=True))


def random_morphism(rng: random.Random, dom: CSet, cod: CSet, monic: bool = False) -> Optional[CSetMorphism]:
    homs = sorted(brute_homs(dom, cod, monic=monic))
    if not homs:
        return None
    combo = rng.choice(homs)
    return CSetMorphism(dom, cod, dict(zip(dom.schema.objects, combo)))


def permuted(x: CSet, rng: random.Random) -> tuple[CSet, CSetMorphism]:
    """A copy of ``x`` with shuffled element numbering, and the iso from ``x``."""
    perm = {}
    for ob in x.schema.objects:
        ids = list(x.parts(ob))
        rng.shuffle(ids)
        perm[ob] = ids  # old i goes to ids[i-1]
    y = CSet(x.schema)
    for ob in x.schema.objects:
        y.add_parts(ob, x.nparts(ob))
    for m in x.schema.morphisms:
        for i in x.parts(m.dom):
            y.set_subpart(m.name, perm[m.dom][i - 1], perm[m.cod][x.subpart(m.name, i) - 1])
    return y, CSetMorphism(x, y, perm)


def random_span(rng: random.Random, schema=None):
    for _ in range(100):
        s = schema or random_schema(rng)
        z = random_instance(rng, s, max_size=2)
        x = random_instance(rng, s, max_size=3)
        y = random_instance(rng, s, max_size=3)
        f = random_morphism(rng, z, x)
        g = random_morphism(rng, z, y)
        if f is not None and g is not None:
            return f, g
    raise RuntimeError("no span found")


def random_cocone(rng: random.Random, f: CSetMorphism, g: CSetMorphism):
    """A commuting cocone over the span into a small random instance, if any."""
    schema = f.dom.schema
    for _ in range(20):
        w = random_instance(rng, schema, max_size=3, min_size=1)
        ps = [CSetMorphism(f.cod, w, dict(zip(schema.objects, c))) for c in sorted(brute_homs(f.cod, w))]
        qs = [CSetMorphism(g.cod, w, dict(zip(schema.objects, c))) for c in sorted(brute_homs(g.cod, w))]
        pairs = [(p, q) for p in ps for q in qs if f.compose(p) == g.compose(q)]
        if pairs:
            return rng.choice(pairs)
    return None


def random_subobject(rng: random.Random, x: CSet) -> tuple[CSet, CSetMorphism]:
    """A random sub-instance closed under subparts, with its inclusion."""
    keep = {ob: {i for i in x.parts(ob) if rng.random() < 0.5} for ob in x.schema.objects}
    changed = True
    while changed:
        changed = False
        for m in x.schema.morphisms:
            for i in list(keep[m.dom]):
                j = x.subpart(m.name, i)
                if j not in keep[m.cod]:
                    keep[m.cod].add(j)
                    changed = True
    return induced_subset(x, keep)


def random_rule(rng: random.Random, schema, monic_r: bool = True):
    for _ in range(50):
        i = random_instance(rng, schema, max_size=2)
        k, l = random_subobject(rng, i)
        o = random_instance(rng, schema, max_size=2)
        r = random_morphism(rng, k, o, monic=monic_r)
        if r is not None:
            return Rule(l, r)
    return None
