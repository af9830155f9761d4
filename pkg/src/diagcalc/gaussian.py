"""
Formal Gaussian integration of diagram series.

A :class:`Gaussian` stands for ``P * exp(Q/2)`` where
``Q = sum_{x,y} l_xy strut(x, y)`` (ordered pairs, so an off-diagonal
entry appears as ``2 l_xy`` on the strut) and P has no strut component with
both ends among the integration variables.  Integration glues
``exp(-Q^{-1}/2)`` into P; since that exponential is built from struts only,
it amounts to a sum over perfect matchings of P's variable legs with pair
weights ``-(l^{-1})_{ab}``, which is how :func:`integrate` evaluates it.
:func:`integrate_literal` does the same computation by literally pairing
the truncated exponential and is kept as a cross-check.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .algebra import Relabeling, exp_union, leg_budget, pair, relabel
from .diagram import (EMPTY, DiagramError, base, diagram_graph, dual, is_dual,
                      leg_labels, nverts, strut)
from .linalg import SingularMatrixError, inverse, is_symmetric, matmul, transpose
from .series import DEFAULT_CAPS, DSum, disjoint_union


class DegenerateCovarianceError(ArithmeticError):
    """The covariance block that must be inverted is singular."""

    def __init__(self, labels, what="covariance"):
        super().__init__("degenerate %s on variables %s" % (what, ",".join(labels)))
        self.labels = tuple(labels)


class NotGaussianError(ValueError):
    pass


def _frac_matrix(m):
    return tuple(tuple(Fraction(x) for x in row) for row in m)


@dataclass(frozen=True)
class Gaussian:
    """``P * exp(Q/2)`` with respect to the variables ``labels``."""

    labels: tuple
    cov: tuple
    P: DSum

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "cov", _frac_matrix(self.cov))
        n = len(self.labels)
        if len(self.cov) != n or any(len(r) != n for r in self.cov):
            raise ValueError("covariance must be %dx%d" % (n, n))
        if not is_symmetric(self.cov):
            raise ValueError("covariance must be symmetric")
        bad = strut_components(self.P, set(self.labels))
        if bad:
            raise NotGaussianError("P has a strut with both ends in X: %r" % (bad[0],))

    @property
    def caps(self):
        return self.P.caps

    def index(self):
        return {x: i for i, x in enumerate(self.labels)}

    def quadratic(self) -> DSum:
        return quadratic(self.labels, self.cov, self.P.caps)

    def series(self) -> DSum:
        """Materialise ``P ⊔ exp(Q/2)`` within the caps of P."""
        return disjoint_union(self.P, exp_union(self.quadratic().scale(Fraction(1, 2))))

    def is_degenerate(self) -> bool:
        try:
            inverse(self.cov)
        except SingularMatrixError:
            return True
        return False


def quadratic(labels, cov, caps=DEFAULT_CAPS) -> DSum:
    """``sum_{x,y} l_xy strut(x,y)`` over ordered pairs."""
    out = {}
    n = len(labels)
    for i in range(n):
        for j in range(n):
            c = Fraction(cov[i][j])
            if c:
                d = strut(labels[i], labels[j])
                out[d] = out.get(d, 0) + c
    return DSum(out, caps)


def inverse_quadratic(labels, cov, caps=DEFAULT_CAPS) -> DSum:
    """``Q^{-1} = sum l^{xy} strut(∂x, ∂y)``."""
    inv = _inverse_or_raise(cov, labels)
    return quadratic([dual(x) for x in labels], inv, caps)


def _inverse_or_raise(m, labels, what="covariance"):
    try:
        return inverse(m)
    except SingularMatrixError:
        raise DegenerateCovarianceError(labels, what) from None


def strut_components(s, X, duals=False):
    """Components of terms of s that are struts with both ends in X."""
    out = []
    for d in s:
        for c in d:
            if c[0] == 0:
                a, b = c[1]
                if duals:
                    a, b = base(a), base(b)
                if a in X and b in X:
                    out.append(c)
    return out


def is_substantial(s, X, duals=False) -> bool:
    return not strut_components(s, X, duals)


# --------------------------------------------------------------------------
# splitting a series into P * exp(Q/2)

def extract_gaussian(s: DSum, X) -> Gaussian:
    """Split ``s = P ⊔ exp(Q/2)`` with respect to the variables X.

    With unit empty coefficient the single-strut coefficients of s equal
    those of ``log s``, so Q is read off directly: ``l_xx = 2 c(x-x)``
    and ``l_xy = c(x-y)``.
    """
    X = tuple(X)
    if s.coefficient(EMPTY) != 1:
        raise NotGaussianError("series must have empty-diagram coefficient 1")
    idx = {x: i for i, x in enumerate(X)}
    n = len(X)
    cov = [[Fraction(0)] * n for _ in range(n)]
    for d, c in s.items():
        if len(d) == 1 and d[0][0] == 0:
            a, b = d[0][1]
            if a in idx and b in idx:
                i, j = idx[a], idx[b]
                if i == j:
                    cov[i][i] = 2 * c
                else:
                    cov[i][j] = cov[j][i] = c
    q = quadratic(X, cov, s.caps)
    P = disjoint_union(exp_union(q.scale(Fraction(-1, 2))), s)
    if not is_substantial(P, set(X)):
        raise NotGaussianError("series is not of the form P exp(Q/2) with respect to %s" % (X,))
    return Gaussian(X, cov, P)


# --------------------------------------------------------------------------
# integration

def _pair_matchings(items):
    """Perfect matchings of a list, as lists of index pairs."""
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for m in _pair_matchings(rest):
            yield [(first, items[k])] + m


@lru_cache(maxsize=100000)
def _integrate_term(d, labels, inv):
    idx = {x: i for i, x in enumerate(labels)}
    g = diagram_graph(d)
    hs = [h for h, lab in g.legs.items() if lab in idx]
    if len(hs) % 2:
        return ()
    acc = Counter()
    for m in _pair_matchings(hs):
        w = Fraction(1)
        for a, b in m:
            w *= -inv[idx[g.legs[a]]][idx[g.legs[b]]]
            if not w:
                break
        if not w:
            continue
        gg = g.copy()
        for a, b in m:
            gg.glue(a, b)
        s, dd = gg.canonical()
        if s:
            acc[dd] += s * w
    return tuple((k, v) for k, v in acc.items() if v)


def integrate(g: Gaussian, F=None):
    """Formal Gaussian integral over ``F`` (default: all variables).

    Over all variables the result is a :class:`DSum`; over a proper subset
    it is a :class:`Gaussian` in the remaining variables, with covariance
    ``C - B^T A^{-1} B``.
    """
    if F is None or set(F) == set(g.labels):
        inv = _frac_matrix(_inverse_or_raise(g.cov, g.labels))
        out = {}
        for d, c in g.P.items():
            for dd, k in _integrate_term(d, g.labels, inv):
                out[dd] = out.get(dd, 0) + c * k
        return DSum(out, g.P.caps, g.P.truncated)
    return integrate_partial(g, F)


def integrate_partial(g: Gaussian, F) -> Gaussian:
    F = [x for x in g.labels if x in set(F)]
    if set(F) - set(g.labels):
        raise ValueError("unknown integration variables")
    Y = [y for y in g.labels if y not in set(F)]
    idx = g.index()
    A = [[g.cov[idx[a]][idx[b]] for b in F] for a in F]
    B = [[g.cov[idx[a]][idx[y]] for y in Y] for a in F]
    C = [[g.cov[idx[y]][idx[z]] for z in Y] for y in Y]
    Abar = _inverse_or_raise(A, F, "block")
    AB = matmul(Abar, B) if Y else [[] for _ in F]
    BtAB = matmul(transpose(B), AB) if Y else []
    cov = [[C[i][j] - BtAB[i][j] for j in range(len(Y))] for i in range(len(Y))]
    key = (tuple(F), tuple(Y), _frac_matrix(Abar), _frac_matrix(AB))
    out = {}
    for d, c in g.P.items():
        for dd, k in _partial_term(d, key):
            out[dd] = out.get(dd, 0) + c * k
    return Gaussian(Y, cov, DSum(out, g.P.caps, g.P.truncated))


@lru_cache(maxsize=100000)
def _partial_term(d, key):
    F, Y, Abar, AB = key
    fi = {x: i for i, x in enumerate(F)}
    g = diagram_graph(d)
    hs = [h for h, lab in g.legs.items() if lab in fi]
    acc = Counter()

    def rec(rest, pairs, conv, w):
        if not rest:
            gg = g.copy()
            for h, y in conv:
                gg.legs[h] = y
            for a, b in pairs:
                gg.glue(a, b)
            s, dd = gg.canonical()
            if s:
                acc[dd] += s * w
            return
        h, rest = rest[0], rest[1:]
        i = fi[g.legs[h]]
        for j, y in enumerate(Y):
            k = -AB[i][j]
            if k:
                rec(rest, pairs, conv + [(h, y)], w * k)
        for t, h2 in enumerate(rest):
            k = -Abar[i][fi[g.legs[h2]]]
            if k:
                rec(rest[:t] + rest[t + 1:], pairs + [(h, h2)], conv, w * k)

    rec(hs, [], [], Fraction(1))
    return tuple((k, v) for k, v in acc.items() if v)


def integrate_literal(g: Gaussian) -> DSum:
    """``<exp(-Q^{-1}/2), P>_X`` with the exponential materialised.

    Only powers whose dual-leg counts fit within P's leg counts can pair, so
    the exponential is truncated to that budget.
    """
    X = set(g.labels)
    budget = Counter()
    for d in g.P:
        c = Counter(lab for lab in leg_labels(d) if lab in X)
        for k, v in c.items():
            budget[dual(k)] = max(budget[dual(k)], v)
    for x in X:
        budget.setdefault(dual(x), 0)
    qi = inverse_quadratic(g.labels, g.cov, g.P.caps.__class__(g.P.caps.vertices, 10 ** 6))
    E = exp_union(qi.scale(Fraction(-1, 2)).with_caps(
        g.P.caps.__class__(g.P.caps.vertices, sum(budget.values()) or 2)),
        admit=leg_budget(budget))
    return pair(E, g.P, X, caps=g.P.caps)


# --------------------------------------------------------------------------
# operators

def divergence(D: DSum, z) -> DSum:
    """Attach every ∂z-leg of a term to distinct z-legs of the same term."""
    dz = dual(z)
    out = Counter()
    for d, c in D.items():
        for dd, k in _divergence_term(d, z, dz):
            out[dd] += c * k
    return DSum(dict(out), D.caps, D.truncated)


@lru_cache(maxsize=100000)
def _divergence_term(d, z, dz):
    g = diagram_graph(d)
    ops = [h for h, lab in g.legs.items() if lab == dz]
    tg = [h for h, lab in g.legs.items() if lab == z]
    if len(ops) > len(tg):
        return ()
    acc = Counter()
    used = set()

    def rec(i, pairs):
        if i == len(ops):
            gg = g.copy()
            for a, b in pairs:
                gg.glue(a, b)
            s, dd = gg.canonical()
            if s:
                acc[dd] += s
            return
        for t in tg:
            if t not in used:
                used.add(t)
                rec(i + 1, pairs + [(ops[i], t)])
                used.discard(t)

    rec(0, [])
    return tuple((k, v) for k, v in acc.items() if v)


def apply_to_gaussian(D: DSum, g: Gaussian) -> Gaussian:
    """``D ⊣ (P exp(Q/2))`` written again as ``P' exp(Q/2)``.

    Each dual leg ∂a of D either glues to an a-leg of P, or hits a single
    strut of ``exp(Q/2)`` (turning into ``sum_b l_ab`` b-legs), or shares a
    strut with another dual leg ∂b (weight ``l_ab``).
    """
    if strut_components(D, set(g.labels), duals=True):
        raise NotGaussianError("operator has a strut with both ends in X or its duals")
    idx = g.index()
    key = (g.labels, g.cov)
    caps = g.P.caps
    out = {}
    truncated = D.truncated or g.P.truncated
    for dD, cD in D.items():
        vD = nverts(dD)
        for dP, cP in g.P.items():
            if vD + nverts(dP) > caps.vertices:
                truncated = True
                continue
            for dd, k in _apply_gauss_term(dD, dP, key):
                out[dd] = out.get(dd, 0) + cD * cP * k
    return Gaussian(g.labels, g.cov, DSum(out, caps, truncated))


@lru_cache(maxsize=200000)
def _apply_gauss_term(dD, dP, key):
    from .diagram import Graph

    labels, cov = key
    idx = {x: i for i, x in enumerate(labels)}
    g = Graph()
    lD = g.add_diagram(dD)
    lP = g.add_diagram(dP)
    legs = g.legs
    ops = [h for h in lD if is_dual(legs[h])]
    targets = {}
    for h in lP:
        lab = legs[h]
        if not is_dual(lab):
            targets.setdefault(lab, []).append(h)
    acc = Counter()
    used = set()

    def rec(rest, glues, conv, pairs, w):
        if not rest:
            gg = g.copy()
            for h, b in conv:
                gg.legs[h] = b
            for a, b in glues + pairs:
                gg.glue(a, b)
            s, dd = gg.canonical()
            if s:
                acc[dd] += s * w
            return
        h, rest = rest[0], rest[1:]
        a = base(legs[h])
        for t in targets.get(a, ()):
            if t not in used:
                used.add(t)
                rec(rest, glues + [(h, t)], conv, pairs, w)
                used.discard(t)
        if a in idx:
            i = idx[a]
            for j, b in enumerate(labels):
                if cov[i][j]:
                    rec(rest, glues, conv + [(h, b)], pairs, w * cov[i][j])
            for t, h2 in enumerate(rest):
                b = base(legs[h2])
                if b in idx and cov[i][idx[b]]:
                    rec(rest[:t] + rest[t + 1:], glues, conv, pairs + [(h, h2)],
                        w * cov[i][idx[b]])

    rec(ops, [], [], [], Fraction(1))
    return tuple((k, v) for k, v in acc.items() if v)


def multiply(g: Gaussian, f: DSum) -> Gaussian:
    """``f ⊔ g`` for a function f (no dual legs)."""
    return Gaussian(g.labels, g.cov, disjoint_union(f, g.P))


def integrate_by_parts_check(D: DSum, g: Gaussian, z):
    """``(∫ D⊣G, (-1)^l ∫ (div_z D) G)`` for D homogeneous of order l in ∂z."""
    dz = dual(z)
    orders = {Counter(leg_labels(d))[dz] for d in D}
    if len(orders) > 1:
        raise ValueError("operator must be homogeneous in the order of ∂%s" % z)
    for d in D:
        if any(is_dual(lab) and lab != dz for lab in leg_labels(d)):
            raise ValueError("operator may only differentiate in %s" % z)
    l = orders.pop() if orders else 0
    lhs = integrate(apply_to_gaussian(D, g))
    rhs = integrate(multiply(g, divergence(D, z))).scale((-1) ** l)
    return lhs, rhs


def fubini_check(g: Gaussian, X1):
    """``(∫ G dZ, ∫(∫ G dX1) dX2)``; a singular X1 block raises on the right."""
    lhs = integrate(g)
    inner = integrate(g, X1)
    rhs = integrate(inner) if inner.labels else inner.P
    return lhs, rhs


def relabel_gaussian(g: Gaussian, r, new_labels) -> Gaussian:
    """Apply a linear relabelling of the variables to ``P exp(Q/2)``.

    The quadratic is transformed as a diagram sum and read back as a
    matrix on ``new_labels``; P is relabelled multilinearly.
    """
    if not isinstance(r, Relabeling):
        r = Relabeling(r, partial=True)
    new_labels = tuple(new_labels)
    q = relabel(g.quadratic(), r)
    idx = {x: i for i, x in enumerate(new_labels)}
    n = len(new_labels)
    cov = [[Fraction(0)] * n for _ in range(n)]
    for d, c in q.items():
        a, b = d[0][1]
        if a not in idx or b not in idx:
            raise DiagramError("quadratic leaves the new variables: %r" % (d,))
        i, j = idx[a], idx[b]
        if i == j:
            cov[i][i] += c
        else:
            cov[i][j] += c / 2
            cov[j][i] += c / 2
    P = relabel(g.P, r)
    return Gaussian(new_labels, cov, P)
