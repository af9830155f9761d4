"""
Enumeration of uni-trivalent diagrams per grade and quotient bases mod AS/IHX.

A grade is ``(vertices, legs)`` with ``legs`` a sorted tuple of labels.
AS is built into canonicalisation (signed codes); IHX is imposed by row
reduction of explicit relation vectors.  Because both relations are local
to a connected component, the quotient of the full space is the symmetric
algebra on the connected quotient, and :func:`reduce` works component by
component.
"""
from __future__ import annotations

import random
import threading
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from .diagram import Graph, component_legs, diagram_graph
from .linalg import RowReducer
from .series import DSum, UNCAPPED


def _raw_matchings(nv, legs, connected=False):
    """Yield ``partner`` arrays of matchings up to obvious symmetries.

    Half-edges ``0..L-1`` are legs (sorted labels), ``L + 3v + i`` is slot i
    of vertex v.  The first unmatched half-edge is paired with one
    representative of each orbit of the stabiliser of the partial matching:
    the first unmatched leg of each label, the first free slot of each
    touched vertex, and slot 0 of the first untouched vertex.  With
    ``connected`` the half-edge to match is always taken from a leg or a
    touched vertex, so the diagram grows outwards and stays connected.
    """
    L = len(legs)
    n = L + 3 * nv
    partner = [-1] * n
    used = [0] * nv
    if connected and not L and nv:
        used[0] = 1  # seed the growth at vertex 0

    def pick():
        if not connected:
            try:
                return partner.index(-1)
            except ValueError:
                return None
        for j in range(L):
            if partner[j] == -1:
                return j
        for v in range(nv):
            if used[v]:
                base = L + 3 * v
                for i in range(3):
                    if partner[base + i] == -1:
                        return base + i
        if any(x == -1 for x in partner):
            return -1  # an untouched part remains: disconnected
        return None

    def rec():
        h = pick()
        if h is None:
            yield list(partner)
            return
        if h == -1:
            return
        hv = (h - L) // 3 if h >= L else -1
        cands = []
        seen_labels = set()
        for j in range(h + 1, L):
            if partner[j] == -1 and legs[j] not in seen_labels:
                seen_labels.add(legs[j])
                cands.append(j)
        first_free_vertex = True
        for v in range(nv):
            base = L + 3 * v
            if used[v] or v == hv:
                for i in range(3):
                    s = base + i
                    if s != h and partner[s] == -1:
                        cands.append(s)
                        break
            elif first_free_vertex:
                first_free_vertex = False
                cands.append(base)
        for j in cands:
            partner[h], partner[j] = j, h
            for x in (h, j):
                if x >= L:
                    used[(x - L) // 3] += 1
            yield from rec()
            for x in (h, j):
                if x >= L:
                    used[(x - L) // 3] -= 1
            partner[h] = partner[j] = -1

    yield from rec()


def _graph_from_matching(nv, legs, partner):
    g = Graph()
    L = len(legs)
    hs = [g.new_leg(lab) for lab in legs]
    for _ in range(nv):
        hs.extend(g.new_vertex())
    for a, b in enumerate(partner):
        if a < b:
            g.join(hs[a], hs[b])
    return g


def enumerate_diagrams(nv, legs, connected=False):
    """Canonical nonzero diagrams with ``nv`` vertices and the given legs."""
    legs = tuple(sorted(legs))
    if (3 * nv + len(legs)) % 2:
        return []
    out = set()
    for partner in _raw_matchings(nv, legs, connected):
        g = _graph_from_matching(nv, legs, partner)
        s, d = g.canonical()
        if s == 0:
            continue
        if connected and len(d) != 1:
            continue
        out.add(d)
    return sorted(out)


def ihx_relations(d):
    """IHX relation vectors ``{diagram: coef}`` at every internal edge of d."""
    g = diagram_graph(d)
    rels = []
    for u, hu in enumerate(g.verts):
        for m in range(3):
            q = g.match[hu[m]]
            if q in g.legs:
                continue
            w, k = g.vslot[q]
            if w == u:
                continue
            hw = g.verts[w]
            A, B, C = hu[(m + 1) % 3], hu[(m + 2) % 3], hw[(k + 1) % 3]
            mu = {B: A, C: B, A: C}
            rel = Counter()
            gg = g
            for _ in range(3):
                s, dd = gg.canonical()
                if s:
                    rel[dd] += s
                gg = _rewire(gg, mu)
            rel = {k2: v for k2, v in rel.items() if v}
            if rel:
                rels.append(rel)
    return rels


def _rewire(g, mu):
    g2 = g.copy()
    g2.match = {mu.get(h, h): mu.get(q, q) for h, q in g.match.items()}
    return g2


@dataclass
class GradedBasis:
    """Quotient basis of one grade modulo AS/IHX."""

    grade: tuple
    diagrams: list
    reducer: RowReducer
    index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.index = {d: i for i, d in enumerate(self.diagrams)}

    @property
    def basis(self):
        piv = self.reducer.pivots
        return [d for i, d in enumerate(self.diagrams) if i not in piv]

    @property
    def dimension(self):
        return len(self.diagrams) - self.reducer.rank

    def coords(self, vec):
        """Reduce ``{diagram: coef}`` of this grade to ``{diagram: coef}``."""
        iv = {}
        for d, c in vec.items():
            i = self.index[d]
            iv[i] = iv.get(i, 0) + c
        red = self.reducer.reduce(iv)
        return {self.diagrams[i]: c for i, c in red.items()}


_lock = threading.Lock()
_basis_cache = {}


def grade_of(d):
    from .diagram import leg_labels, nverts

    return nverts(d), leg_labels(d)


def build_basis(nv, legs, connected=False, shuffle_seed=None) -> GradedBasis:
    """Quotient basis of a grade; cached unless an explicit shuffle is asked."""
    legs = tuple(sorted(legs))
    key = (nv, legs, connected)
    if shuffle_seed is None:
        with _lock:
            hit = _basis_cache.get(key)
            if hit is not None:
                return hit
    diagrams = enumerate_diagrams(nv, legs, connected)
    rels_src = list(diagrams)
    if shuffle_seed is not None:
        rng = random.Random(shuffle_seed)
        rng.shuffle(diagrams)
        rng.shuffle(rels_src)
    gb = GradedBasis((nv, legs), diagrams, RowReducer())
    for d in rels_src:
        for rel in ihx_relations(d):
            vec = {}
            for dd, c in rel.items():
                i = gb.index.get(dd)
                if i is None:
                    raise AssertionError("IHX left the grade: %r" % (dd,))
                vec[i] = vec.get(i, 0) + c
            gb.reducer.add(vec)
    if shuffle_seed is None:
        with _lock:
            _basis_cache.setdefault(key, gb)
            gb = _basis_cache[key]
    return gb


_comp_cache = {}


def reduce_component(c):
    """Reduced form of one connected component as ``{component: coef}``."""
    hit = _comp_cache.get(c)
    if hit is not None:
        return hit
    if c[0] == 0:
        res = {c: Fraction(1)}
    else:
        gb = build_basis(c[0], component_legs(c), connected=True)
        res = {d[0]: v for d, v in gb.coords({(c,): 1}).items()}
    with _lock:
        _comp_cache[c] = res
    return res


def reduce(s: DSum) -> DSum:
    """Normal form of a sum modulo AS/IHX (linear and idempotent)."""
    out = {}
    for d, coef in s.items():
        parts = [list(reduce_component(c).items()) for c in d]
        for combo in product(*parts):
            dd = tuple(sorted(cc for cc, _ in combo))
            k = coef
            for _, v in combo:
                k *= v
            out[dd] = out.get(dd, 0) + k
    return DSum(out, s.caps, s.truncated)


def reduce_with(gb: GradedBasis, s: DSum) -> DSum:
    """Reduce a single-grade sum against an explicitly built basis."""
    return DSum(gb.coords(dict(s.items())), UNCAPPED)


def equal_mod_relations(a: DSum, b: DSum) -> bool:
    return not reduce(a - b)
