"""
End-to-end acceptance checks, one test per criterion.

Each test times itself against its budget and prints a single
``criterion N: PASS|FAIL`` line (visible with ``pytest -s`` or in the
captured output of a failing run).
"""
from __future__ import annotations

import random
import time
from contextlib import contextmanager
from fractions import Fraction

import pytest

from diagcalc.algebra import exp_union, pair
from diagcalc.basis import reduce
from diagcalc.bch import bch_trees, m_via_bch, m_via_operator, tree_coefficient
from diagcalc.checks import (BCH_ANCHORS, bch_cases, check_cyclic, check_fubini,
                             check_ibp, check_kirby2, check_parity,
                             check_reparametrization, random_covariance,
                             random_unimodular)
from diagcalc.diagram import (Graph, VertexlessLoopError, dual, from_edges, nverts,
                              strut, ytree)
from diagcalc.gaussian import DegenerateCovarianceError, Gaussian, integrate
from diagcalc.linalg import matmul, transpose
from diagcalc.pipeline import (block_diagonal, cyclic_check, first_kirby_factorization_check,
                               ogl_leading_check, same_result, signature,
                               signature_of_block, trivalent_graphs)
from diagcalc.series import Caps, DSum
from diagcalc.skeleton import (b_basis_total_degree, chi, close_strand,
                               expand_link_relation, m_xyz, reduce_a, sigma, stu_basis)

SEED = 20240101
CASES = 20
DEGREE = 2


@contextmanager
def criterion(capsys, number, title, limit):
    """Time the block, fail on overrun, print one status line."""
    start = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        within = elapsed < limit
        status = "PASS" if ok and within else "FAIL"
        with capsys.disabled():
            print("\ncriterion %d: %s  %s (%.1f s, limit %d s)"
                  % (number, status, title, elapsed, limit))
    assert within, "criterion %d took %.1f s, limit %d s" % (number, elapsed, limit)


def _assert_report(rep):
    assert rep.cases >= CASES and rep.ok, rep.text()


def test_criterion_01_bch_anchors(capsys):
    with criterion(capsys, 1, "BCH anchor coefficients", 1):
        lam = bch_trees(4)
        for expr, want in BCH_ANCHORS:
            assert tree_coefficient(lam, expr) == want, expr
        assert [c for _, c in BCH_ANCHORS] == [Fraction(1, 2), Fraction(1, 12),
                                               Fraction(-1, 12), Fraction(-1, 24)]


def test_criterion_02_skeleton_merge_oracle(capsys):
    with criterion(capsys, 2, "skeleton merge equals tree gluing", 120):
        caps = Caps(2 * DEGREE + 2, 16)
        cases = bch_cases(DEGREE)
        assert cases
        for b in cases:
            C = DSum({b: 1}, caps)
            skeleton = sigma(m_xyz(chi(C, reduce=False), "x", "y", "z"), caps=caps)
            assert skeleton == m_via_bch(C), b


def test_criterion_03_operator_merge(capsys):
    with criterion(capsys, 3, "operator merge equals tree gluing", 60):
        caps = Caps(2 * DEGREE + 2, 16)
        for b in bch_cases(DEGREE):
            C = DSum({b: 1}, caps)
            assert m_via_operator(C) == m_via_bch(C), b


def test_criterion_04_gaussian_calculus(capsys):
    with criterion(capsys, 4, "parity, reparametrization, Fubini, integration by parts",
                   300):
        for check in (check_parity, check_reparametrization, check_fubini, check_ibp):
            _assert_report(check(SEED, DEGREE, CASES))


def test_criterion_05_second_kirby_move(capsys):
    with criterion(capsys, 5, "second Kirby move", 300):
        _assert_report(check_kirby2(SEED, DEGREE, CASES))


def _near_degenerate(eps):
    """Merged z-z entry equal to eps: zero at eps = 0."""
    caps = Caps(2 * DEGREE, 16)
    s, y = ytree("x", "y", "e")
    P = exp_union(DSum({y: s}, caps))
    cov = [[1 + eps, 1, 1], [1, -3, 0], [1, 0, 2]]
    return Gaussian(("x", "y", "e"), cov, P)


def test_criterion_06_cyclic_invariance(capsys):
    with criterion(capsys, 6, "ordinary and strong cyclic invariance", 600):
        rep = check_cyclic(SEED, DEGREE, CASES)
        assert rep.cases >= 2 * CASES and rep.ok, rep.text()
        with pytest.raises(DegenerateCovarianceError):
            cyclic_check(_near_degenerate(0), ("z",))
        for eps in (Fraction(1, 7), Fraction(1, 11), Fraction(1, 13)):
            for F in (("z", "e"), ("z",)):
                a, b = cyclic_check(_near_degenerate(eps), F)
                assert same_result(a, b), (eps, F)


def test_criterion_07_link_relations(capsys):
    with criterion(capsys, 7, "link relations vanish on a closed strand", 60):
        count = nonzero = 0
        for strands in (("x",), ("e", "x"), ("e", "f", "x")):
            for n in (1, 2):
                for b in b_basis_total_degree(strands, n):
                    g = Graph()
                    hs = g.add_diagram(b)
                    for i, h in enumerate(hs):
                        if g.legs[h] != "x":
                            continue
                        r = expand_link_relation(b, i)
                        if not r:
                            continue
                        count += 1
                        img = chi(r, reduce=False)
                        nonzero += bool(reduce_a(img))
                        assert not close_strand(img, "x"), b
        assert count and nonzero


def test_criterion_08_pbw(capsys):
    with criterion(capsys, 8, "symmetrization is invertible", 120):
        caps = Caps(2 * DEGREE + 2, 16)
        for strands in (("x",), ("x", "y"), ("e", "x", "y")):
            for n in range(1, DEGREE + 1):
                for b in b_basis_total_degree(strands, n):
                    B = DSum({b: 1}, caps)
                    assert sigma(chi(B), caps=caps) == reduce(B), b
                for a in stu_basis(strands, n).basis:
                    A = chi(sigma(DSum({a: 1}, caps), caps=caps))
                    assert A == reduce_a(DSum({a: 1}, A.caps)), a


def test_criterion_09_ogl_leading_term(capsys):
    with criterion(capsys, 9, "cut-and-integrate recovers trivalent graphs", 60):
        graphs = trivalent_graphs(4)
        assert [nverts(d) for d in graphs] == [2, 4, 4, 4]
        coefficients = []
        for d in graphs:
            c, rd = ogl_leading_check(d)
            assert rd == d and abs(c) == 1
            coefficients.append(c)
        with capsys.disabled():
            print("  leading coefficients:", " ".join(str(c) for c in coefficients))


def test_criterion_10_signature(capsys):
    with criterion(capsys, 10, "Sylvester invariance and block bookkeeping", 10):
        rng = random.Random(SEED)
        for _ in range(50):
            n = rng.randint(1, 4)
            cov = random_covariance(rng, n)
            M = random_unimodular(rng, n)
            assert signature(matmul(matmul(transpose(M), cov), M)) == signature(cov)
        # the factorisation only needs a nontrivial P; one Y-pair keeps it fast
        caps = Caps(2, 16)
        s, y = ytree("x", "y", "e")
        g = Gaussian(("x", "y", "e"), [[2, 1, 0], [1, 1, 1], [0, 1, -1]],
                     exp_union(DSum({y: s}, caps)))
        for extra in ([[1]], [[-1]], [[0, 1], [1, 0]]):
            p, m = signature(g.cov)
            ep, em = signature(extra)
            assert signature_of_block(g.cov, extra) == (p + ep, m + em)
            labels = ("u", "v")[:len(extra)]
            u = Gaussian(labels, extra, DSum.one(caps))
            lhs, rhs = first_kirby_factorization_check(g, u)
            assert lhs == rhs and any(nverts(d) == 2 for d in lhs)
            assert block_diagonal(g.cov, extra)[3][3] == extra[0][0]


def test_criterion_11_degenerate_inputs(capsys):
    with criterion(capsys, 11, "tadpoles, singular covariance, vertexless loops", 1):
        s, _ = from_edges(1, [((0, 0), (0, 1)), (("leg", 0), (0, 2))], ["x"])
        assert s == 0
        g = Gaussian(("x", "y"), [[1, 1], [1, 1]], DSum.one())
        with pytest.raises(DegenerateCovarianceError, match="degenerate"):
            integrate(g)
        caps = Caps(4, 16)
        dx = dual("x")
        with pytest.raises(VertexlessLoopError):
            pair(DSum({strut(dx, dx): 1}, caps), DSum({strut("x", "x"): 1}, caps), {"x"})
