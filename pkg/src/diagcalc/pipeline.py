"""
Invariant-level assembly: signature counts, the raw integral of supplied
series, renormalisation, and the identity checks behind invariance under
Kirby moves, orientation flips and strand reordering.
"""
from __future__ import annotations

from fractions import Fraction

from .algebra import Relabeling, disjoint_union, exp_union, power_union, relabel
from .basis import reduce
from .bch import d_bch, m_via_operator_gaussian
from .diagram import Graph, diagram_graph, dual, nverts
from .gaussian import (Gaussian, divergence, integrate, relabel_gaussian)
from .linalg import signature
from .series import Caps, DSum, UNCAPPED

__all__ = [
    "signature", "aarhus_raw", "renormalize", "kirby2_check", "cyclic_check",
    "ogl_cut", "ogl_leading_check", "parity_flip_check",
    "first_kirby_factorization_check", "reparametrization_check",
    "block_diagonal", "same_result", "trivalent_graphs", "signature_of_block",
    "kirby2_difference_operator",
]

FRESH_DOUBLE = "yy_"
FRESH_ROOT = "zz_"


def aarhus_raw(P: DSum, cov, X) -> DSum:
    """Integral of ``P exp(Q/2)`` over all of X: a legless diagram sum."""
    return reduce(integrate(Gaussian(tuple(X), cov, P)))


def renormalize(raw: DSum, sp, sm, a_plus: DSum, a_minus: DSum) -> DSum:
    """``a_plus^{-sp} ⊔ a_minus^{-sm} ⊔ raw`` with powers via exp/log."""
    for a in (a_plus, a_minus):
        if a.empty_coefficient() != 1:
            raise ValueError("normalisation series must have empty coefficient 1")
    caps = raw.caps
    fp = power_union(a_plus.with_caps(caps), -sp)
    fm = power_union(a_minus.with_caps(caps), -sm)
    return reduce(disjoint_union(disjoint_union(fp, fm), raw))


def same_result(a, b) -> bool:
    """Equality of integration results modulo AS/IHX (sums or Gaussians)."""
    if isinstance(a, Gaussian) or isinstance(b, Gaussian):
        if not (isinstance(a, Gaussian) and isinstance(b, Gaussian)):
            return False
        if set(a.labels) != set(b.labels):
            return False
        ia, ib = a.index(), b.index()
        for p in a.labels:
            for q in a.labels:
                if a.cov[ia[p]][ia[q]] != b.cov[ib[p]][ib[q]]:
                    return False
        return not reduce(a.P - b.P)
    return not reduce(a - b)


# --------------------------------------------------------------------------
# second Kirby move

def kirby2_check(g: Gaussian, x="x", y="y"):
    """``(∫G, ∫ΥG, ∫Υ̃G)`` over all variables.

    Υ doubles y into y, y' by the substitution ``y -> y + y'`` and merges y'
    into x with the BCH operator; Υ̃ is the plain substitution
    ``y -> x + y``.
    """
    lhs = reduce(integrate(g))
    y2, z = FRESH_DOUBLE, FRESH_ROOT
    doubled = relabel_gaussian(g, {y: {y: 1, y2: 1}}, tuple(g.labels) + (y2,))
    merged = m_via_operator_gaussian(doubled, x, y2, z)
    back = relabel_gaussian(merged, {z: x}, g.labels)
    hat = reduce(integrate(back))
    sub = relabel_gaussian(g, {y: {x: 1, y: 1}}, g.labels)
    tilde = reduce(integrate(sub))
    return lhs, hat, tilde


def kirby2_difference_operator(vertex_cap, x="x", y="y"):
    """The strutless merge operator with ∂y' renamed ∂y, and its y-divergence.

    The coefficients of the operator are all root legs labelled x, so the
    divergence in y must vanish.
    """
    D = d_bch(vertex_cap + 1, x, FRESH_DOUBLE, x).with_caps(
        Caps(vertex_cap, 4 * vertex_cap + 8))
    D = exp_union(D) - DSum.one(D.caps)
    D = relabel(D, Relabeling({dual(FRESH_DOUBLE): dual(y)}, partial=True))
    return D, divergence(D, y)


# --------------------------------------------------------------------------
# cyclic invariance

def cyclic_check(g: Gaussian, F, x="x", y="y", z="z"):
    """``(∫ σ m^{xy}_z G dF, ∫ σ m^{yx}_z G dF)`` for a Gaussian on the B side."""
    a = m_via_operator_gaussian(g, x, y, z)
    b = m_via_operator_gaussian(g, y, x, z)
    ia, ib = integrate(a, F), integrate(b, F)
    if isinstance(ia, DSum):
        return reduce(ia), reduce(ib)
    return (Gaussian(ia.labels, ia.cov, reduce(ia.P)),
            Gaussian(ib.labels, ib.cov, reduce(ib.P)))


# --------------------------------------------------------------------------
# OGL leading term

def ogl_cut(d):
    """Cut every edge of a legless diagram: ``(labels, P)``.

    Edge i becomes two legs labelled ``e<i>``; each vertex keeps its cyclic
    order, so P is a disjoint union of Y-pieces.
    """
    g = diagram_graph(d)
    if g.legs:
        raise ValueError("manifold diagrams have no legs")
    labels = []
    lab_of = {}
    for v, hs in enumerate(g.verts):
        for h in hs:
            q = g.match[h]
            if h in lab_of:
                continue
            name = "e%d" % len(labels)
            labels.append(name)
            lab_of[h] = lab_of[q] = name
    cut = Graph()
    for hs in g.verts:
        w = cut.new_vertex()
        for slot, h in enumerate(hs):
            cut.join(w[slot], cut.new_leg(lab_of[h]))
    s, pd = cut.canonical()
    if not s:
        return labels, DSum({}, UNCAPPED)
    return labels, DSum({pd: s}, UNCAPPED)


def ogl_leading_check(d):
    """Integrate the cut pieces with identity covariance.

    Returns ``(c, recovered)`` where the integral equals ``c * recovered``;
    ``recovered`` is None if the integral is not a single diagram.
    """
    labels, P = ogl_cut(d)
    n = len(labels)
    ident = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    res = integrate(Gaussian(tuple(labels), ident, P))
    if len(res) != 1:
        return Fraction(0), None
    (rd, c), = res.items()
    return c, rd


# --------------------------------------------------------------------------
# small checks

def parity_flip_check(g: Gaussian, y):
    flipped = relabel_gaussian(g, {y: {y: -1}}, g.labels)
    return reduce(integrate(g)), reduce(integrate(flipped))


def reparametrization_check(g: Gaussian, M):
    """Integrals before and after ``x_i -> sum_j M_ij x_j``."""
    X = g.labels
    r = {X[i]: {X[j]: M[i][j] for j in range(len(X))} for i in range(len(X))}
    return reduce(integrate(g)), reduce(integrate(relabel_gaussian(g, r, X)))


def block_diagonal(a, b):
    n, m = len(a), len(b)
    out = [[Fraction(0)] * (n + m) for _ in range(n + m)]
    for i in range(n):
        for j in range(n):
            out[i][j] = Fraction(a[i][j])
    for i in range(m):
        for j in range(m):
            out[n + i][n + j] = Fraction(b[i][j])
    return out


def first_kirby_factorization_check(g: Gaussian, u: Gaussian):
    """``(∫(G ⊔ U) d(X ∪ u), ∫G dX ⊔ ∫U du)``."""
    if set(g.labels) & set(u.labels):
        raise ValueError("the extra block must use fresh variables")
    both = Gaussian(g.labels + u.labels, block_diagonal(g.cov, u.cov),
                    disjoint_union(g.P, u.P))
    lhs = reduce(integrate(both))
    rhs = reduce(disjoint_union(integrate(g), integrate(u)))
    return lhs, rhs


def signature_of_block(cov, extra):
    return signature(block_diagonal(cov, extra))


def trivalent_graphs(max_vertices):
    """Nonzero legless diagrams with at most ``max_vertices`` vertices."""
    from .basis import enumerate_diagrams

    out = []
    for v in range(2, max_vertices + 1, 2):
        out.extend(enumerate_diagrams(v, ()))
    return out
