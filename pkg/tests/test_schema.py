from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csetplan.cset import CSet
from csetplan.schema import (
    NonSaturatingError,
    SchemaError,
    build_schema,
    hom_set,
    representable,
    walk,
)
from helpers import GR, random_schema


def test_graph_schema():
    assert GR.objects == ("V", "E")
    assert GR.morphism("src").dom == "E"
    assert [m.name for m in GR.outgoing("E")] == ["src", "tgt"]
    assert [m.name for m in GR.incoming("V")] == ["src", "tgt"]


def test_discrete_schema():
    s = build_schema(["X"], [], [])
    assert len(hom_set(s, "X", "X")) == 1
    assert representable(s, "X").counts() == {"X": 1}


@pytest.mark.parametrize(
    "objects, morphisms, equations",
    [
        (["A"], [("f", "A", "B")], []),
        (["A", "A"], [], []),
        (["A", "B"], [("f", "A", "B"), ("f", "A", "B")], []),
        (["A", "B"], [("f", "A", "B"), ("g", "A", "B")], [(["f", "g"], ["f"])]),
        (["A", "B", "C"], [("f", "A", "B"), ("g", "A", "C")], [(["f"], ["g"])]),
        (["A"], [], [([], [], "Z")]),
        ([""], [], []),
    ],
)
def test_build_schema_rejects(objects, morphisms, equations):
    with pytest.raises(SchemaError):
        build_schema(objects, morphisms, equations)


def test_hom_sets_over_graphs():
    assert [str(p) for p in hom_set(GR, "E", "V").representatives()] == ["src", "tgt"]
    vv = hom_set(GR, "V", "V", 4)
    assert len(vv) == 1 and vv.representatives()[0].is_identity
    assert len(hom_set(GR, "V", "E")) == 0


def test_free_loop_does_not_saturate():
    s = build_schema(["A"], [("f", "A", "A")], [])
    with pytest.raises(NonSaturatingError):
        hom_set(s, "A", "A")


def test_idempotent_loop_saturates():
    s = build_schema(["A"], [("f", "A", "A")], [(["f", "f"], ["f"])])
    h = hom_set(s, "A", "A")
    assert len(h) == 2
    assert h.index_of(["f", "f", "f"]) == h.index_of(["f"])
    x = representable(s, "A")
    assert x.is_valid() and x.counts() == {"A": 2}


def test_involution_saturates():
    s = build_schema(["A"], [("f", "A", "A")], [(["f", "f"], [], "A")])
    assert len(hom_set(s, "A", "A")) == 2


def test_commuting_square():
    s = build_schema(
        ["A", "B", "C", "D"],
        [("f", "A", "B"), ("g", "A", "C"), ("h", "B", "D"), ("k", "C", "D")],
        [(["f", "h"], ["g", "k"])],
    )
    assert len(hom_set(s, "A", "D")) == 1
    x = representable(s, "A")
    assert x.counts() == {"A": 1, "B": 1, "C": 1, "D": 1}
    assert x.is_valid()


def test_representables_over_graphs():
    v = representable(GR, "V")
    assert v.counts() == {"V": 1, "E": 0}
    e = representable(GR, "E")
    assert e.counts() == {"V": 2, "E": 1}
    assert e.subpart("src", 1) != e.subpart("tgt", 1)
    assert walk(GR, "E", ["tgt"]) == ("V", e.subpart("tgt", 1))


def test_walk_rejects_bad_steps():
    with pytest.raises(SchemaError):
        walk(GR, "V", ["src"])


def _class_count_stable(schema, a, b):
    counts = {len(hom_set(schema, a, b, bound)) for bound in range(4, 9)}
    return len(counts) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_class_count_stable_across_bounds(seed):
    schema = random_schema(random.Random(seed))
    for a in schema.objects:
        for b in schema.objects:
            assert _class_count_stable(schema, a, b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_representables_validate(seed):
    schema = random_schema(random.Random(seed))
    for a in schema.objects:
        x = representable(schema, a)
        assert x.is_valid()
        for b in schema.objects:
            assert x.nparts(b) == len(hom_set(schema, a, b))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_congruence_closed_under_whiskering(seed):
    rng = random.Random(seed)
    schema = random_schema(rng, max_objects=4, max_gens=5)
    for eq in schema.equations:
        lhs, rhs = eq
        # Pre-compose with a random path into the source, post-compose out of the target.
        pre = [m for m in schema.morphisms if m.cod == lhs.source]
        post = [m for m in schema.morphisms if m.dom == lhs.target]
        prefix = [rng.choice(pre)] if pre and rng.random() < 0.5 else []
        suffix = [rng.choice(post)] if post and rng.random() < 0.5 else []
        source = prefix[0].dom if prefix else lhs.source
        h = hom_set(schema, source, suffix[-1].cod if suffix else lhs.target)
        left = [m.name for m in prefix] + list(lhs.steps) + [m.name for m in suffix]
        right = [m.name for m in prefix] + list(rhs.steps) + [m.name for m in suffix]
        assert h.index_of(left) == h.index_of(right)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_equations_hold_in_representables(seed):
    schema = random_schema(random.Random(seed))
    for a in schema.objects:
        x: CSet = representable(schema, a)
        for eq in schema.equations:
            lhs, rhs = eq
            for i in x.parts(lhs.source):
                assert x.walk(i, lhs.steps) == x.walk(i, rhs.steps)
