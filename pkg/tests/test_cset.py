from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csetplan.cset import (
    CSet,
    CSetError,
    CSetMorphism,
    NotNaturalError,
    Triple,
    canonical_hash,
    category_of_elements,
    format_triples,
    from_elements,
    induced_subset,
    is_mono,
    isomorphic,
)
from csetplan.formats import parse
from csetplan.schema import build_schema
from helpers import FIXTURES, GR, brute_homs, brute_isomorphic, graph, permuted, random_graph, random_instance, random_schema


def test_add_part_is_dense():
    x = CSet(GR)
    assert x.add_part("V") == 1
    assert x.add_part("V") == 2
    assert list(x.add_parts("V", 2)) == [3, 4]
    with pytest.raises(CSetError):
        x.add_part("W")


def test_set_subpart():
    x = CSet(GR)
    x.add_parts("V", 2)
    e = x.add_part("E")
    x.set_subpart("src", e, 1).set_subpart("tgt", e, 1)
    x.set_subpart("tgt", e, 2)
    assert x.subpart("tgt", e) == 2
    assert x.is_valid()
    with pytest.raises(CSetError):
        x.set_subpart("src", e, 3)


def test_validate_reports_undefined_subparts():
    x = CSet(GR)
    x.add_parts("V", 2)
    e = x.add_part("E")
    x.set_subpart("src", e, 1)
    report = x.validate()
    assert [(v.kind, v.where, v.element) for v in report] == [("undefined", "tgt", 1)]
    with pytest.raises(CSetError):
        x.check()


def test_validate_reports_equation_failures():
    loops = build_schema(["V", "E"], [("src", "E", "V"), ("tgt", "E", "V")], [(["src"], ["tgt"])])
    x = CSet.from_data(loops, {"V": 2, "E": 1}, {"src": [1], "tgt": [2]})
    report = x.validate()
    assert len(report) == 1 and report[0].kind == "equation" and report[0].element == 1
    y = CSet.from_data(loops, {"V": 2, "E": 1}, {"src": [2], "tgt": [2]})
    assert y.is_valid()


def test_category_of_elements():
    x = graph(2, [(1, 2)])
    assert [str(t) for t in category_of_elements(x)] == ["E#1 src V#1", "E#1 tgt V#2"]
    assert category_of_elements(CSet(GR)) == []
    assert format_triples(category_of_elements(x)) == "E#1 src V#1\nE#1 tgt V#2\n"


def test_category_of_elements_rejects_invalid():
    x = CSet(GR)
    x.add_part("E")
    with pytest.raises(CSetError):
        category_of_elements(x)


def test_favorite_pet_triples():
    doc = parse((FIXTURES / "favorite_pet.json").read_text())
    x = doc.instance("household")
    triples = category_of_elements(x)
    people = [t for t in triples if t.subject[0] == "Person"]
    assert len(people) == x.nparts("Person")
    assert {t.predicate for t in people} == {"favorite_pet"}
    assert len(triples) == x.nparts("Person") + x.nparts("Pet")


def test_morphism_naturality_is_checked():
    edge = graph(2, [(1, 2)])
    tri = graph(3, [(1, 2), (2, 3), (3, 1)])
    f = CSetMorphism(edge, tri, {"V": [1, 2], "E": [1]})
    assert f.is_natural() and is_mono(f)
    with pytest.raises(NotNaturalError):
        CSetMorphism(edge, tri, {"V": [1, 3], "E": [1]})
    with pytest.raises(CSetError):
        CSetMorphism(edge, tri, {"V": [1, 4], "E": [1]})


def test_is_mono_examples():
    x = graph(2)
    assert is_mono(CSetMorphism.identity(x))
    assert not is_mono(CSetMorphism(x, graph(1), {"V": [1, 1]}))


def test_compose_is_diagrammatic():
    a, b, c = graph(1), graph(2), graph(3)
    f = CSetMorphism(a, b, {"V": [2]})
    g = CSetMorphism(b, c, {"V": [3, 1]})
    assert f.compose(g).components["V"] == (1,)


def test_isomorphic_examples():
    x = graph(2, [(1, 2)])
    assert isomorphic(x, x) is not None
    assert isomorphic(x, graph(2, [(2, 1)])) is not None
    two_cycle = graph(2, [(1, 2), (2, 1)])
    path = graph(3, [(1, 2), (2, 3)])
    assert isomorphic(two_cycle, path) is None
    assert isomorphic(two_cycle, graph(2, [(1, 2), (1, 2)])) is None


def test_induced_subset():
    x = graph(3, [(1, 2), (2, 3)])
    z, inc = induced_subset(x, {"V": [2, 3], "E": [2]})
    assert z == graph(2, [(1, 2)])
    assert inc.components == {"V": (2, 3), "E": (2,)}
    with pytest.raises(CSetError):
        induced_subset(x, {"V": [1], "E": [1]})


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_triples_are_lossless(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    x = random_instance(rng, schema)
    triples = category_of_elements(x)
    assert from_elements(schema, x.counts(), triples) == x
    assert len(triples) == sum(x.nparts(m.dom) for m in schema.morphisms)
    assert all(isinstance(t, Triple) for t in triples)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_validate_agrees_with_path_walking(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    x = CSet(schema)
    for ob in schema.objects:
        x.add_parts(ob, rng.randint(1, 3))
    for m in schema.morphisms:
        for i in x.parts(m.dom):
            x.set_subpart(m.name, i, rng.randint(1, x.nparts(m.cod)))
    holds = all(
        x.walk(i, lhs.steps) == x.walk(i, rhs.steps)
        for lhs, rhs in schema.equations
        for i in x.parts(lhs.source)
    )
    assert x.is_valid() == holds


def _categorical_mono(f: CSetMorphism) -> bool:
    """f is mono iff f∘g = f∘h forces g = h for all parallel g, h into dom(f).

    Probing with maps out of the representables (a vertex, the walking edge)
    suffices, since maps out of them pick out elements.
    """
    probes = [graph(1), graph(2, [(1, 2)])]
    for probe in probes:
        maps = [CSetMorphism(probe, f.dom, dict(zip(GR.objects, c))) for c in brute_homs(probe, f.dom)]
        for g, h in itertools.combinations(maps, 2):
            if g.compose(f) == h.compose(f):
                return False
    return True


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_is_mono_matches_categorical_definition(seed):
    rng = random.Random(seed)
    x = random_graph(rng, 3, 3)
    y = random_graph(rng, 3, 4)
    for combo in sorted(brute_homs(x, y))[:6]:
        f = CSetMorphism(x, y, dict(zip(GR.objects, combo)))
        assert is_mono(f) == _categorical_mono(f)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_isomorphism_is_an_equivalence(seed):
    rng = random.Random(seed)
    x = random_graph(rng, 3, 3)
    y, _ = permuted(x, rng)
    z, _ = permuted(y, rng)
    w = random_graph(rng, 3, 3)
    assert isomorphic(x, x) is not None
    assert isomorphic(x, y) is not None and isomorphic(y, x) is not None
    assert isomorphic(x, z) is not None
    assert canonical_hash(x) == canonical_hash(y)
    assert (isomorphic(x, w) is not None) == brute_isomorphic(x, w)
    found = isomorphic(x, w)
    if found is not None:
        assert found.is_natural() and found.is_injective() and found.is_surjective()
