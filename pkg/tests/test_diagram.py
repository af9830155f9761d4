from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from diagcalc.basis import enumerate_diagrams
from diagcalc.diagram import (Graph, VertexlessLoopError, dual, from_edges, is_dual,
                              base, leg_labels, nverts, strut, ytree)

from helpers import edges_of

POOL = (enumerate_diagrams(3, ("x", "y", "e")) + enumerate_diagrams(4, ("x", "y"))
        + enumerate_diagrams(3, ("x", "x", "y")) + enumerate_diagrams(4, ())
        + enumerate_diagrams(2, ("x", "x", "e", "e")))


def test_dual_labels():
    assert is_dual(dual("x")) and not is_dual("x")
    assert base(dual("x")) == "x"


def test_strut_is_symmetric():
    assert strut("x", "y") == strut("y", "x")
    assert nverts(strut("x", "y")) == 0
    assert leg_labels(strut("y", "x")) == ("x", "y")


def test_ytree_cyclic_symmetry_and_antisymmetry():
    s, d = ytree("a", "b", "c")
    assert s != 0
    assert ytree("b", "c", "a") == (s, d)
    assert ytree("b", "a", "c") == (-s, d)


def test_repeated_leg_on_one_vertex_is_zero():
    assert ytree("x", "x", "e")[0] == 0


def test_tadpole_is_zero():
    s, _ = from_edges(1, [((0, 0), (0, 1)), (("leg", 0), (0, 2))], ["x"])
    assert s == 0


def test_theta_is_nonzero():
    s, d = from_edges(2, [((0, 0), (1, 0)), ((0, 1), (1, 1)), ((0, 2), (1, 2))], [])
    assert s != 0 and nverts(d) == 2 and leg_labels(d) == ()


def test_gluing_both_ends_of_a_strut_raises():
    g = Graph()
    a, b = g.new_leg("x"), g.new_leg("x")
    g.join(a, b)
    c, e = g.new_leg("y"), g.new_leg("y")
    g.join(c, e)
    with pytest.raises(VertexlessLoopError):
        g.glue(a, b)


def test_every_enumerated_diagram_is_a_fixed_point():
    for d in POOL:
        n, edges, labels = edges_of(d)
        assert from_edges(n, edges, labels) == (1, d)


def _transform(d, perm, rot, flip):
    n, edges, labels = edges_of(d)

    def move(end):
        if end[0] == "leg":
            return end
        v, s = end
        s = (s + rot[v]) % 3
        if v == flip:
            s = (-s) % 3
        return (perm[v], s)

    return from_edges(n, [(move(a), move(b)) for a, b in edges], labels)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, len(POOL) - 1), st.integers(0, 2 ** 32).map(random.Random))
def test_canonical_form_ignores_vertex_names_and_rotations(i, rng):
    d = POOL[i]
    n = nverts(d)
    perm = list(range(n))
    rng.shuffle(perm)
    rot = [rng.randrange(3) for _ in range(n)]
    assert _transform(d, perm, rot, None) == (1, d)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, len(POOL) - 1), st.integers(0, 2 ** 32).map(random.Random))
def test_reversing_one_vertex_negates(i, rng):
    d = POOL[i]
    n = nverts(d)
    perm = list(range(n))
    rng.shuffle(perm)
    rot = [rng.randrange(3) for _ in range(n)]
    assert _transform(d, perm, rot, rng.randrange(n)) == (-1, d)


def _edge_multiset(n, edges, labels, perm, rot):
    def move(end):
        if end[0] == "leg":
            return ("leg", labels[end[1]])
        v, s = end
        return ("v", perm[v], (s + rot[v]) % 3)

    return sorted(tuple(sorted((move(a), move(b)))) for a, b in edges)


def _brute_isomorphic(d1, d2):
    """Orientation-preserving isomorphism by trying every vertex bijection."""
    from itertools import permutations, product

    n1, e1, l1 = edges_of(d1)
    n2, e2, l2 = edges_of(d2)
    if n1 != n2 or sorted(l1) != sorted(l2):
        return False
    target = _edge_multiset(n2, e2, l2, list(range(n2)), [0] * n2)
    for perm in permutations(range(n1)):
        for rot in product(range(3), repeat=n1):
            if _edge_multiset(n1, e1, l1, perm, rot) == target:
                return True
    return False


def test_distinct_codes_are_not_isomorphic_by_brute_force():
    for grade in ((4, ("x", "y")), (3, ("x", "y", "e")), (4, ())):
        ds = enumerate_diagrams(*grade)
        assert len(ds) > 1
        for i, a in enumerate(ds):
            for b in ds[i + 1:]:
                assert not _brute_isomorphic(a, b)
