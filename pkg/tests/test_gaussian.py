from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diagcalc.algebra import exp_union
from diagcalc.basis import reduce
from diagcalc.checks import (random_covariance, random_operator, random_P,
                             random_unimodular)
from diagcalc.diagram import EMPTY, VertexlessLoopError, dual, strut, union, ytree
from diagcalc.gaussian import (DegenerateCovarianceError, Gaussian, NotGaussianError,
                               divergence, extract_gaussian, fubini_check, integrate,
                               integrate_by_parts_check, integrate_literal,
                               relabel_gaussian)
from diagcalc.pipeline import parity_flip_check, reparametrization_check
from diagcalc.series import Caps, DSum, disjoint_union

CAPS = Caps(4, 16)
X3 = ("x", "y", "e")


def Y(a, b, c, k=1):
    s, d = ytree(a, b, c)
    return DSum({d: s * k}, CAPS)


def S(*pairs, k=1):
    d = ()
    for a, b in pairs:
        d = union(d, strut(a, b))
    return DSum({d: k}, CAPS)


ONE = DSum({EMPTY: 1}, CAPS)


def test_pure_gaussian_integrates_to_one():
    for cov in ([[1]], [[2, 1], [1, -3]], [[0, 1], [1, 0]]):
        n = len(cov)
        g = Gaussian(X3[:n], cov, ONE)
        assert integrate(g) == ONE


def test_two_struts_against_unit_covariance():
    g = Gaussian(("x",), [[1]], S(("x", "e"), ("x", "e")))
    assert integrate(g) == S(("e", "e"), k=-1)
    assert integrate_literal(g) == S(("e", "e"), k=-1)


def test_degenerate_covariance_is_reported():
    g = Gaussian(("x", "y"), [[1, 1], [1, 1]], ONE)
    with pytest.raises(DegenerateCovarianceError) as e:
        integrate(g)
    assert "degenerate" in str(e.value)


def test_struts_inside_x_are_rejected():
    with pytest.raises(NotGaussianError):
        Gaussian(("x",), [[1]], S(("x", "x")))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32).map(random.Random))
def test_matching_sum_agrees_with_the_literal_exponential(rng):
    g = Gaussian(X3, random_covariance(rng, 3), random_P(rng, X3, 4, CAPS))
    assert reduce(integrate(g)) == reduce(integrate_literal(g))


def test_extract_pure_gaussian():
    s = exp_union(S(("x", "x"), k=Fraction(1, 2)).with_caps(Caps(4, 8)))
    g = extract_gaussian(s, ["x"])
    assert g.cov == ((1,),)
    assert g.P == DSum({EMPTY: 1})


def test_extract_strutless_series():
    s = ONE + Y("x", "y", "e")
    g = extract_gaussian(s, ["x", "y"])
    assert g.cov == ((0, 0), (0, 0))
    assert g.P == s


def test_extract_round_trip_with_a_tree():
    # Y(x, x, e) is zero by antisymmetry, so a tree with distinct legs is used
    q = S(("x", "x"), k=Fraction(1, 2))
    s = exp_union((q + Y("x", "y", "e")).with_caps(Caps(4, 12)))
    g = extract_gaussian(s, ["x"])
    assert g.cov == ((1,),)
    assert g.P == exp_union(Y("x", "y", "e").with_caps(Caps(4, 12)))
    assert g.series() == s


def test_extract_needs_unit_constant_term():
    with pytest.raises(NotGaussianError):
        extract_gaussian(S(("x", "y")), ["x"])


def test_divergence_with_more_derivatives_than_legs_is_zero():
    d = union(union(strut(dual("z"), "a"), strut(dual("z"), "b")), strut("z", "c"))
    D = DSum({d: 1}, CAPS)
    assert not divergence(D, "z")


def test_divergence_of_a_repeated_leg_tree_reduces_to_zero():
    D = Y("z", "a", dual("z")) + Y("z", "z", dual("z"))
    assert not reduce(divergence(D, "z"))


def test_divergence_joins_operator_and_coefficient():
    D = DSum({union(strut(dual("z"), "a"), ytree("z", "b", "c")[1]): ytree("z", "b", "c")[0]},
             CAPS)
    assert divergence(D, "z") == Y("a", "b", "c")


def test_divergence_without_derivatives_is_the_identity():
    D = Y("z", "a", "b")
    assert divergence(D, "z") == D


def test_divergence_of_a_closed_strut_is_an_error():
    with pytest.raises(VertexlessLoopError):
        divergence(S((dual("z"), "z")), "z")


def test_integration_by_parts_trivial_operator():
    g = Gaussian(X3, [[1, 1, 0], [1, 2, 1], [0, 1, 3]], Y("x", "y", "e"))
    lhs, rhs = integrate_by_parts_check(ONE, g, "x")
    assert lhs == rhs == integrate(g)


@pytest.mark.parametrize("order", [1, 2])
def test_integration_by_parts_sign(order):
    rng = random.Random(order)
    hits = 0
    for _ in range(10):
        z = rng.choice(X3)
        D = random_operator(rng, z, X3, order, 2, CAPS)
        g = Gaussian(X3, random_covariance(rng, 3), random_P(rng, X3, 2, CAPS))
        lhs, rhs = integrate_by_parts_check(D, g, z)
        assert not reduce(lhs - rhs)
        if reduce(lhs):
            hits += 1
            if order == 1:
                # the sign matters: without it the two sides differ
                assert reduce(lhs + rhs)
    assert hits


def test_fubini_diagonal_covariance():
    P = disjoint_union(Y("x", "a", "b"), Y("x", "a", "c")) + Y("y", "y", "a")
    g = Gaussian(("x", "y"), [[2, 0], [0, 3]], P)
    lhs, rhs = fubini_check(g, ["x"])
    assert lhs == rhs


def test_fubini_with_off_diagonal_covariance():
    rng = random.Random(7)
    for _ in range(10):
        g = Gaussian(("x", "y"), [[1, 1], [1, 2]], random_P(rng, ("x", "y", "a"), 4, CAPS))
        lhs, rhs = fubini_check(g, ["x"])
        assert reduce(lhs) == reduce(rhs)


def test_fubini_with_singular_inner_block():
    g = Gaussian(("x", "y"), [[0, 1], [1, 0]], Y("x", "y", "a"))
    integrate(g)
    with pytest.raises(DegenerateCovarianceError) as e:
        fubini_check(g, ["x"])
    assert "block" in str(e.value)


def test_partial_integral_covariance_is_the_schur_complement():
    g = Gaussian(X3, [[2, 1, 0], [1, 3, 1], [0, 1, 1]], ONE)
    h = integrate(g, ["x"])
    assert h.labels == ("y", "e")
    assert h.cov == ((Fraction(5, 2), 1), (1, 1))


def test_parity_on_random_gaussians():
    rng = random.Random(3)
    for _ in range(10):
        g = Gaussian(X3, random_covariance(rng, 3), random_P(rng, X3, 4, CAPS))
        a, b = parity_flip_check(g, rng.choice(X3))
        assert a == b


def test_odd_in_y_integrates_to_zero():
    # three y-legs in every term: each flip of y negates, so both sides vanish
    P = Y("y", "a", "b") + disjoint_union(Y("y", "x", "a"), Y("y", "y", "b"))
    g = Gaussian(("x", "y"), [[1, 1], [1, 2]], P)
    a, b = parity_flip_check(g, "y")
    assert a == b
    assert not a


def test_reparametrization_unimodular_and_rational():
    rng = random.Random(5)
    for k in range(10):
        g = Gaussian(X3, random_covariance(rng, 3), random_P(rng, X3, 4, CAPS))
        M = random_unimodular(rng, 3)
        if k % 2:
            M = [[Fraction(c) * (2 if i == 0 else 1) for c in row] for i, row in enumerate(M)]
        a, b = reparametrization_check(g, M)
        assert a == b


def test_one_leg_in_a_variable_integrates_to_zero():
    # diagonal covariance: an odd number of x-legs cannot be paired
    g = Gaussian(("x", "y"), [[1, 0], [0, 2]],
                 Y("x", "y", "y") + Y("x", "y", "a") + disjoint_union(Y("x", "a", "b"), Y("y", "y", "a")))
    assert not integrate(g)


def test_relabel_gaussian_reads_back_the_covariance():
    g = Gaussian(("x", "y"), [[1, 2], [2, 5]], Y("x", "y", "a"))
    h = relabel_gaussian(g, {"y": {"x": 1, "y": 1}}, ("x", "y"))
    # quadratic x^2 + 4xy + 5y^2 with y -> x + y
    assert h.cov == ((10, 7), (7, 5))
    assert integrate(g) == integrate(h)
