from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csetplan.colimit import (
    ColimitError,
    PushoutResult,
    coproduct,
    glue,
    glue_named,
    induced_map,
    is_pushout_square,
    mediators,
    pushout,
    quotient,
    verify_universal_property,
)
from csetplan.cset import CSet, CSetMorphism, isomorphic
from csetplan.schema import build_schema
from helpers import GR, graph, random_cocone, random_schema, random_span

EDGE = graph(2, [(1, 2)])
VERTEX = graph(1)


def test_coproduct_examples():
    assert isomorphic(coproduct(VERTEX, VERTEX).apex, graph(2)) is not None
    assert isomorphic(coproduct(EDGE, CSet(GR)).apex, EDGE) is not None
    two = coproduct(EDGE, EDGE)
    assert two.apex.counts() == {"V": 4, "E": 2}
    assert two.left.is_injective() and two.right.is_injective()


def _path_span():
    f = CSetMorphism(VERTEX, EDGE, {"V": [2]})
    g = CSetMorphism(VERTEX, EDGE, {"V": [1]})
    return f, g


def test_pushout_along_a_vertex_is_a_path():
    f, g = _path_span()
    po = pushout(f, g)
    assert isomorphic(po.apex, graph(3, [(1, 2), (2, 3)])) is not None
    assert f.compose(po.left) == g.compose(po.right)


def test_pushout_over_empty_is_coproduct():
    empty = CSet(GR)
    f = CSetMorphism(empty, EDGE, {})
    g = CSetMorphism(empty, VERTEX, {})
    assert pushout(f, g).apex == coproduct(EDGE, VERTEX).apex


def test_pushout_of_identities():
    i = CSetMorphism.identity(EDGE)
    assert isomorphic(pushout(i, i).apex, EDGE) is not None


def test_universal_property_examples():
    f, g = _path_span()
    po = pushout(f, g)
    assert verify_universal_property((f, g), po, (po.left, po.right))
    # Collapse everything onto a loop: still exactly one mediator.
    loop = graph(1, [(1, 1)])
    p = CSetMorphism(EDGE, loop, {"V": [1, 1], "E": [1]})
    assert verify_universal_property((f, g), po, (p, p))
    # A cocone that does not commute is rejected outright.
    q = CSetMorphism(EDGE, graph(2, [(1, 2), (1, 2)]), {"V": [1, 2], "E": [1]})
    with pytest.raises(ColimitError):
        verify_universal_property((f, g), po, (q, q))


def test_spurious_apex_fails():
    f, g = _path_span()
    po = pushout(f, g)
    bigger = coproduct(po.apex, VERTEX)
    fake = PushoutResult(bigger.apex, po.left.compose(bigger.left), po.right.compose(bigger.left))
    # The extra vertex can go anywhere, so the mediator is not unique.
    target = graph(3, [(1, 2), (2, 3)])
    p = CSetMorphism(EDGE, target, {"V": [1, 2], "E": [1]})
    q = CSetMorphism(EDGE, target, {"V": [2, 3], "E": [2]})
    assert verify_universal_property((f, g), po, (p, q))
    assert not verify_universal_property((f, g), fake, (p, q))
    assert not is_pushout_square(f, g, fake.left, fake.right)


def test_glue_examples():
    path = glue(GR, {"a": "E", "b": "E"}, [("a.tgt", "b.src")])
    assert isomorphic(path, graph(3, [(1, 2), (2, 3)])) is not None
    assert glue(GR, [("V", 1)]) == VERTEX
    assert glue(GR, [("E", 1)]).counts() == {"V": 2, "E": 1}
    with pytest.raises(ColimitError):
        glue(GR, {"a": "E", "b": "V"}, [("a", "b")])
    with pytest.raises(ColimitError):
        glue(GR, {"a": "E"}, [("c.src", "a.tgt")])


def test_glue_named_roots_and_induced_map():
    k, k_roots = glue_named(GR, {"v": "V"})
    i, i_roots = glue_named(GR, {"v": "V", "e": "E"}, [("e.src", "v")])
    h = induced_map(k, k_roots, i, i_roots)
    ob, root = k_roots["v"]
    assert h(ob, root) == i_roots["v"][1]
    assert h.is_injective()


def test_quotient_closes_congruence():
    two = graph(4, [(1, 2), (3, 4)])
    q, proj = quotient(two, [("E", 1, 2)])
    assert q.counts() == {"V": 2, "E": 1}
    with pytest.raises(ColimitError):
        quotient(two, [("E", 1, 2)], close=False)


def test_pushout_respects_equations():
    reflexive = build_schema(
        ["V", "E"],
        [("src", "E", "V"), ("tgt", "E", "V"), ("refl", "V", "E")],
        [(["refl", "src"], [], "V"), (["refl", "tgt"], [], "V")],
    )
    v, _ = glue_named(reflexive, {"v": "V"})
    assert v.counts() == {"V": 1, "E": 1}
    i = CSetMorphism.identity(v)
    assert pushout(i, i).apex.is_valid()


def check_pushout(rng: random.Random, f: CSetMorphism, g: CSetMorphism) -> None:
    po = pushout(f, g)
    assert f.compose(po.left) == g.compose(po.right)
    assert po.apex.is_valid()
    assert verify_universal_property((f, g), po, (po.left, po.right))
    cocone = random_cocone(rng, f, g)
    if cocone is not None:
        assert verify_universal_property((f, g), po, cocone)
        assert len(mediators(po, *cocone)) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_pushout_universal_property(seed):
    rng = random.Random(seed)
    f, g = random_span(rng)
    check_pushout(rng, f, g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_pushout_is_symmetric(seed):
    rng = random.Random(seed)
    f, g = random_span(rng)
    assert isomorphic(pushout(f, g).apex, pushout(g, f).apex) is not None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_glue_contains_implicit_structure(seed):
    rng = random.Random(seed)
    schema = random_schema(rng)
    ob = rng.choice(schema.objects)
    x, roots = glue_named(schema, {"a": ob})
    # Every generator chain from the root lands somewhere: the representable is total.
    assert x.is_valid()
    assert roots["a"] == (ob, 1)
    for m in schema.outgoing(ob):
        assert x.nparts(m.cod) >= 1
