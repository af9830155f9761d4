"""
The BCH tree series and the gluing formulas for merging two strands.

``log(e^x e^y)`` is expanded in the truncated free associative algebra,
turned into Lie brackets by the Dynkin map (a homogeneous Lie element P of
degree n satisfies ``n P = sum_w c_w [..[[w1, w2], w3].., wn]``), and each
bracket becomes a rooted binary tree whose leaves are dual legs and whose
root is a z-leg.  A bracket ``[L, R]`` is a vertex with cyclic order
``(L, R, parent)``.
"""
from __future__ import annotations

import threading
from collections import Counter
from fractions import Fraction
from itertools import product

from .algebra import Relabeling, apply, exp_union, leg_budget, pair, relabel
from .basis import build_basis, reduce
from .diagram import Graph, dual, leg_labels, nverts
from .series import Caps, DSum

MAX_BCH_DEGREE = 8

_lock = threading.Lock()


# --------------------------------------------------------------------------
# truncated free associative algebra, elements {word: coef}

def fa_mul(a, b, N):
    out = Counter()
    for u, c in a.items():
        for v, d in b.items():
            if len(u) + len(v) <= N:
                out[u + v] += c * d
    return {k: v for k, v in out.items() if v}


def fa_add(a, b, k=1):
    out = Counter(a)
    for w, c in b.items():
        out[w] += k * c
    return {w: c for w, c in out.items() if c}


def fa_exp(a, N):
    """``exp(a)`` for a without constant term."""
    out = {(): Fraction(1)}
    power = {(): Fraction(1)}
    for n in range(1, N + 1):
        power = {w: c / n for w, c in fa_mul(power, a, N).items()}
        if not power:
            break
        out = fa_add(out, power)
    return out


def fa_log(a, N):
    """``log(a)`` for a with constant term 1."""
    t = fa_add(a, {(): Fraction(1)}, -1)
    out = {}
    power = {(): Fraction(1)}
    for n in range(1, N + 1):
        power = fa_mul(power, t, N)
        if not power:
            break
        out = fa_add(out, power, Fraction((-1) ** (n + 1), n))
    return out


def bracket_word(expr):
    """Expand a nested bracket (leaves are letters) into the free algebra."""
    if isinstance(expr, str):
        return {(expr,): Fraction(1)}
    L, R = bracket_word(expr[0]), bracket_word(expr[1])
    n = 10 ** 6
    return fa_add(fa_mul(L, R, n), fa_mul(R, L, n), -1)


def left_normed(word):
    expr = word[0]
    for a in word[1:]:
        expr = (expr, a)
    return expr


def bch_lie(N, x="x", y="y"):
    """``log(e^x e^y)`` up to degree N as ``{bracket expression: coef}``.

    Each degree-n word ``w`` with coefficient c contributes ``c/n`` times
    the left-normed bracket of w (Dynkin).  Brackets that vanish
    identically (a repeated leading letter) are dropped.
    """
    if N > MAX_BCH_DEGREE:
        raise ValueError("BCH degree %d above the maximum %d" % (N, MAX_BCH_DEGREE))
    X = {(x,): Fraction(1)}
    Y = {(y,): Fraction(1)}
    z = fa_log(fa_mul(fa_exp(X, N), fa_exp(Y, N), N), N)
    out = Counter()
    for w, c in z.items():
        n = len(w)
        if n >= 2 and w[0] == w[1]:
            continue
        out[left_normed(w) if n > 1 else w[0]] += c / n
    return {k: v for k, v in out.items() if v}


# --------------------------------------------------------------------------
# trees

def bracket_tree(expr, root="z"):
    """``(sign, diagram)`` of the tree of a bracket, leaves ∂-labelled."""
    g = Graph()

    def out(e):
        if isinstance(e, str):
            return g.new_leg(dual(e))
        v = g.new_vertex()
        g.join(v[0], out(e[0]))
        g.join(v[1], out(e[1]))
        return v[2]

    g.join(out(expr), g.new_leg(root))
    return g.canonical()


_tree_cache = {}


def bch_trees(N, x="x", y="y", z="z") -> DSum:
    """Λ: the BCH series up to degree N as a reduced sum of trees."""
    key = (N, x, y, z)
    with _lock:
        hit = _tree_cache.get(key)
    if hit is not None:
        return hit
    caps = Caps(max(N - 1, 0), N + 1)
    acc = Counter()
    for expr, c in bch_lie(N, x, y).items():
        s, d = bracket_tree(expr, z)
        if s:
            acc[d] += s * c
    lam = reduce(DSum(dict(acc), caps))
    with _lock:
        return _tree_cache.setdefault(key, lam)


def d_bch(N, x="x", y="y", z="z") -> DSum:
    """Λ without its two struts."""
    return bch_trees(N, x, y, z).filter(lambda d: nverts(d) > 0)


def tree_coefficient(lam: DSum, expr, root="z") -> Fraction:
    """Coefficient of a bracket tree in a tree sum, in a one-dimensional grade."""
    s, t = bracket_tree(expr, root)
    V, legs = nverts(t), leg_labels(t)
    gb = build_basis(V, legs, connected=True)
    if gb.dimension != 1:
        raise ValueError("grade of %r has dimension %d, coefficient is ambiguous"
                         % (expr, gb.dimension))
    part = {d: c for d, c in lam.items() if nverts(d) == V and leg_labels(d) == legs}
    ref = gb.coords({t: s})
    got = gb.coords(part)
    (bd, rc), = ref.items()
    return got.get(bd, Fraction(0)) / rc


# --------------------------------------------------------------------------
# merging strands on the B side

def _leg_maxima(C, labels):
    m = Counter()
    for d in C:
        c = Counter(leg_labels(d))
        for lab in labels:
            m[lab] = max(m[lab], c[lab])
    return m


def m_via_bch(C: DSum, x="x", y="y", z="z") -> DSum:
    """``<exp_⊔ Λ, C>_{x,y}``: glue forests of BCH trees into C."""
    m = _leg_maxima(C, (x, y))
    N = max(m[x] + m[y], 1)
    lam = bch_trees(N, x, y, z)
    budget = {dual(x): m[x], dual(y): m[y]}
    big = Caps(C.caps.vertices, 2 * N + 2)
    E = exp_union(lam.with_caps(big), admit=leg_budget(budget))
    return reduce(pair(E, C, {x, y}, caps=C.caps))


def m_via_operator(C: DSum, x="x", y="y", z="z") -> DSum:
    """``(exp_⊔ d_BCH ⊣ C) / (x, y -> z)``."""
    m = _leg_maxima(C, (x, y))
    N = max(m[x] + m[y], 2)
    d = d_bch(N, x, y, z)
    budget = {dual(x): m[x], dual(y): m[y]}
    big = Caps(C.caps.vertices, 2 * N + 2)
    D = exp_union(d.with_caps(big), admit=leg_budget(budget)) if d else DSum.one(big)
    out = apply(D, C, caps=C.caps)
    return reduce(relabel(out, Relabeling({x: z, y: z}, partial=True)))


def merge_operator(vertex_cap, x="x", y="y", z="z") -> DSum:
    """``exp_⊔ d_BCH`` truncated to ``vertex_cap`` internal vertices."""
    N = vertex_cap + 1
    d = d_bch(N, x, y, z).with_caps(Caps(vertex_cap, 4 * N + 4))
    return exp_union(d) if d else DSum.one(d.caps)


def m_via_operator_gaussian(g, x="x", y="y", z="z"):
    """Merge strands x, y of a Gaussian into z via the BCH operator."""
    from .gaussian import apply_to_gaussian, relabel_gaussian

    D = merge_operator(g.P.caps.vertices, x, y, z)
    h = apply_to_gaussian(D, g)
    new = [z] + [v for v in g.labels if v not in (x, y, z)]
    out = relabel_gaussian(h, Relabeling({x: z, y: z}, partial=True), new)
    from .gaussian import Gaussian

    return Gaussian(out.labels, out.cov, reduce(out.P))
