"""
Diagrams on directed strands: STU reduction, chord spaces mod 4T, the
symmetrisation map χ and its inverse σ, strand merging and doubling,
closing a strand into a circle, and link relations.

A skeleton diagram is a canonical uni-trivalent diagram whose legs are
labelled ``(strand, position)``; the positions on each strand are
``0..k-1``.  Every skeleton diagram is reduced by repeated STU to chord
diagrams (plus components that do not touch the skeleton, which are
reduced as ordinary legless diagrams).  Chord diagrams are then reduced
modulo the relations obtained by expanding one-vertex diagrams through
each of their three skeleton-adjacent slots (the 4T relations).
"""
from __future__ import annotations

import threading
from collections import Counter
from fractions import Fraction
from itertools import combinations, product

from .basis import build_basis, reduce as reduce_b, reduce_component
from .diagram import (Graph, VertexlessLoopError, component_legs, diagram_graph,
                      is_dual, leg_labels, nverts)
from .linalg import RowReducer, SingularMatrixError, inverse
from .series import Caps, DSum, disjoint_union

A_CAPS = Caps(64, 64)

_lock = threading.Lock()


class SkeletonError(ValueError):
    pass


def _asum(terms, truncated=False):
    return DSum(terms, A_CAPS, truncated)


def strands_of(d):
    """Counter strand -> number of attachments."""
    return Counter(lab[0] for lab in leg_labels(d))


def split_legless(d):
    """``(touching, legless)`` parts of a diagram, each a canonical tuple."""
    touch = tuple(c for c in d if c[0] == 0 or component_legs(c))
    free = tuple(c for c in d if c[0] != 0 and not component_legs(c))
    return touch, free


def _canon(g):
    return g.canonical()


# --------------------------------------------------------------------------
# STU

def stu_step(g: Graph, h):
    """Expand at leg ``h`` (an attachment adjacent to a vertex): S = T - U.

    Returns the list ``[(+1, T graph), (-1, U graph)]``.  For a vertex with
    slots ``(k, k+1, k+2)`` and slot k on attachment ``(s, i)``, T puts the
    partner of slot k+1 at position i and the partner of slot k+2 at i+1.
    """
    s, i = g.legs[h]
    v, k = g.vslot[g.match[h]]
    hs = g.verts[v]
    a, b = hs[(k + 1) % 3], hs[(k + 2) % 3]
    pa, pb = g.match[a], g.match[b]
    out = []
    for sign, (first, second) in ((1, (pa, pb)), (-1, (pb, pa))):
        gg = g.copy()
        for hh, lab in list(gg.legs.items()):
            if lab[0] == s and lab[1] > i:
                gg.legs[hh] = (s, lab[1] + 1)
        del gg.legs[h]
        gg.match.pop(h)
        gg.remove_vertex(v)
        l1 = gg.new_leg((s, i))
        l2 = gg.new_leg((s, i + 1))
        gg.join(l1, first)
        gg.join(l2, second)
        out.append((sign, gg))
    return out


_stu_cache = {}


def stu_reduce_diagram(d):
    """Express a skeleton diagram through chord diagrams (legless parts kept)."""
    hit = _stu_cache.get(d)
    if hit is not None:
        return hit
    g = diagram_graph(d)
    target = None
    for h in sorted(g.legs, key=lambda h: g.legs[h]):
        if g.match[h] in g.vslot:
            target = h
            break
    if target is None:
        res = {d: Fraction(1)}
    else:
        acc = Counter()
        for sign, gg in stu_step(g, target):
            s, dd = gg.canonical()
            if s:
                for k, v in stu_reduce_diagram(dd).items():
                    acc[k] += sign * s * v
        res = {k: v for k, v in acc.items() if v}
    with _lock:
        _stu_cache[d] = res
    return res


# --------------------------------------------------------------------------
# chord spaces

def chord_degree(d):
    return len(d)


def _compositions(total, parts):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for k in range(1, total - parts + 2):
        for rest in _compositions(total - k, parts - 1):
            yield (k,) + rest


def _matchings(points):
    if not points:
        yield []
        return
    a = points[0]
    for j in range(1, len(points)):
        rest = points[1:j] + points[j + 1:]
        for m in _matchings(rest):
            yield [(a, points[j])] + m


def _points(strands, comp):
    return [(s, i) for s, k in zip(strands, comp) for i in range(k)]


def chord_diagram(pairs):
    return tuple(sorted((0, tuple(sorted(p))) for p in pairs))


class ChordSpace:
    """Chord diagrams with n chords using exactly the strands S, mod 4T.

    With ``closed`` set to a strand name, that strand is closed into a
    circle: rotation of its attachment points is added as a relation.
    """

    def __init__(self, strands, n, closed=None):
        self.strands = tuple(sorted(strands))
        self.n = n
        self.closed = closed
        self.diagrams = []
        for comp in _compositions(2 * n, len(self.strands)) if self.strands else ([()] if n == 0 else []):
            pts = _points(self.strands, comp)
            for m in _matchings(pts):
                self.diagrams.append(chord_diagram(m))
        self.diagrams.sort()
        self.index = {d: i for i, d in enumerate(self.diagrams)}
        self.reducer = RowReducer()
        for rel in self._four_term():
            self.reducer.add(rel)
        if closed is not None:
            for d in self.diagrams:
                r = self._vec({d: 1})
                rd = rotate_strand(d, closed)
                j = self.index[rd]
                r[j] = r.get(j, 0) - 1
                self.reducer.add(r)

    def _vec(self, terms):
        v = {}
        for d, c in terms.items():
            i = self.index.get(d)
            if i is None:
                raise AssertionError("diagram outside chord space: %r" % (d,))
            v[i] = v.get(i, 0) + c
        return v

    def _four_term(self):
        n = self.n
        if n < 2 or not self.strands:
            return
        for comp in _compositions(2 * n - 1, len(self.strands)):
            pts = _points(self.strands, comp)
            for tri in combinations(range(len(pts)), 3):
                rest = [p for t, p in enumerate(pts) if t not in tri]
                for m in _matchings(rest):
                    g = Graph()
                    hv = g.new_vertex()
                    legs = {}
                    for slot, t in enumerate(tri):
                        lh = g.new_leg(pts[t])
                        g.join(lh, hv[slot])
                        legs[slot] = lh
                    for p, q in m:
                        g.join(g.new_leg(p), g.new_leg(q))
                    exps = []
                    for slot in range(3):
                        e = Counter()
                        for sign, gg in stu_step(g, legs[slot]):
                            s, dd = gg.canonical()
                            if s:
                                e[dd] += sign * s
                        exps.append(e)
                    for a, b in ((0, 1), (1, 2)):
                        rel = Counter(exps[a])
                        rel.subtract(exps[b])
                        rel = {k: v for k, v in rel.items() if v}
                        if rel:
                            yield self._vec(rel)

    @property
    def dimension(self):
        return len(self.diagrams) - self.reducer.rank

    @property
    def basis(self):
        piv = self.reducer.pivots
        return [d for i, d in enumerate(self.diagrams) if i not in piv]

    def coords(self, terms):
        red = self.reducer.reduce(self._vec(terms))
        return {self.diagrams[i]: c for i, c in red.items()}


_space_cache = {}


def chord_space(strands, n, closed=None) -> ChordSpace:
    key = (tuple(sorted(strands)), n, closed)
    with _lock:
        hit = _space_cache.get(key)
    if hit is not None:
        return hit
    sp = ChordSpace(strands, n, closed)
    with _lock:
        return _space_cache.setdefault(key, sp)


def stu_basis(strands, n) -> ChordSpace:
    """Quotient basis of chord diagrams with n chords on exactly these strands."""
    return chord_space(strands, n)


def _reduce_chord_terms(terms, closed=None):
    """Reduce ``{chord-diagram ⊔ legless: coef}`` to normal form."""
    groups = {}
    for d, c in terms.items():
        touch, free = split_legless(d)
        key = (frozenset(strands_of(touch)), len(touch))
        groups.setdefault(key, {}).setdefault(free, {})
        gr = groups[key][free]
        gr[touch] = gr.get(touch, 0) + c
    out = Counter()
    for (S, n), by_free in groups.items():
        cl = closed if closed in S else None
        sp = chord_space(S, n, cl)
        for free, tm in by_free.items():
            red = sp.coords(tm)
            if not red:
                continue
            fparts = [list(reduce_component(c).items()) for c in free]
            for combo in product(*fparts):
                ff = tuple(cc for cc, _ in combo)
                k = Fraction(1)
                for _, v in combo:
                    k *= v
                for t, c in red.items():
                    out[tuple(sorted(t + ff))] += c * k
    return {k: v for k, v in out.items() if v}


def reduce_a(a: DSum, closed=None) -> DSum:
    """Normal form of a skeleton sum modulo STU (and rotation on ``closed``)."""
    acc = Counter()
    for d, c in a.items():
        for k, v in stu_reduce_diagram(d).items():
            acc[k] += c * v
    return _asum(_reduce_chord_terms({k: v for k, v in acc.items() if v}, closed),
                 a.truncated)


def close_strand(a: DSum, x) -> DSum:
    """Image in the space where strand x is closed into a circle."""
    return reduce_a(a, closed=x)


def rotate_strand(d, x):
    """Move the first attachment on strand x to the end."""
    k = strands_of(d)[x]
    if k <= 1:
        return d
    g = diagram_graph(d)
    for h, lab in list(g.legs.items()):
        if lab[0] == x:
            g.legs[h] = (x, (lab[1] - 1) % k)
    return g.canonical()[1]


# --------------------------------------------------------------------------
# χ and σ

def _chi_term(d):
    """χ of one B-diagram with string labels, as ``{skeleton diagram: coef}``."""
    touch, free = split_legless(d)
    g = diagram_graph(touch)
    for lab in g.legs.values():
        if not isinstance(lab, str) or is_dual(lab):
            raise SkeletonError("χ needs primal labels, got %r" % (lab,))
    counts = Counter(g.legs.values())
    for h in g.legs:
        g.legs[h] = (g.legs[h],)
    s, start = g.canonical()
    states = {start: Fraction(s)}
    for strand in sorted(counts):
        k = counts[strand]
        for step in range(k):
            nxt = Counter()
            for sd, c in states.items():
                gg = diagram_graph(sd)
                for h, lab in gg.legs.items():
                    if lab == (strand,):
                        gg.legs[h] = (strand, step)
                        sg, dd = gg.canonical()
                        gg.legs[h] = (strand,)
                        if sg:
                            nxt[dd] += sg * c
            states = {kk: v for kk, v in nxt.items() if v}
        f = Fraction(1)
        for j in range(2, k + 1):
            f *= j
        states = {kk: v / f for kk, v in states.items()}
    return {tuple(sorted(kk + free)): v for kk, v in states.items()}


def chi(b: DSum, reduce=True) -> DSum:
    """Average over all orderings of the x-legs along strand x, for each x."""
    acc = Counter()
    for d, c in b.items():
        for k, v in _chi_term(d).items():
            acc[k] += c * v
    out = _asum({k: v for k, v in acc.items() if v}, b.truncated)
    return reduce_a(out) if reduce else out


def _connected_with_legs(labels, max_size):
    """Connected reduced basis components with legs in ``labels``.

    Returns a list of ``(component, size)`` where size = vertices + legs.
    """
    labels = sorted(labels)
    out = []
    for L in range(1, max_size + 1):
        for V in range(0, max_size - L + 1):
            if (3 * V + L) % 2:
                continue
            if V == 0 and L != 2:
                continue
            for legs in _multisets(labels, L):
                if V == 0:
                    out.append(((0, tuple(legs)), L))
                    continue
                gb = build_basis(V, legs, connected=True)
                for d in gb.basis:
                    out.append((d[0], V + L))
    return out


def _multisets(labels, k):
    if k == 0:
        yield ()
        return
    if not labels:
        return
    first, rest = labels[0], labels[1:]
    for j in range(k, -1, -1):
        for tail in _multisets(rest, k - j):
            yield (first,) * j + tail


def b_basis_total_degree(labels, n):
    """Products of connected reduced components (each with legs), total degree n,
    using every label in ``labels`` at least once."""
    labels = sorted(labels)
    comps = _connected_with_legs(labels, 2 * n)
    out = []

    def rec(start, left, chosen):
        if left == 0:
            d = tuple(sorted(chosen))
            if set(leg_labels(d)) == set(labels):
                out.append(d)
            return
        for t in range(start, len(comps)):
            c, sz = comps[t]
            if sz <= left:
                rec(t, left - sz, chosen + [c])

    rec(0, 2 * n, [])
    return sorted(set(out))


class SigmaTable:
    """χ matrix between B and chord bases at one grade, and its inverse."""

    def __init__(self, strands, n):
        self.strands = tuple(sorted(strands))
        self.n = n
        self.space = chord_space(self.strands, n)
        self.abasis = self.space.basis
        self.aindex = {d: i for i, d in enumerate(self.abasis)}
        self.bbasis = b_basis_total_degree(self.strands, n)
        if len(self.bbasis) != len(self.abasis):
            raise AssertionError("PBW dimension mismatch at %r degree %d: B %d, A %d"
                                 % (self.strands, n, len(self.bbasis), len(self.abasis)))
        rows = []
        for b in self.bbasis:
            img = chi(DSum({b: 1}, A_CAPS))
            row = [Fraction(0)] * len(self.abasis)
            for d, c in img.items():
                row[self.aindex[d]] = c
            rows.append(row)
        self.matrix = rows
        try:
            self.inv = inverse(rows) if rows else []
        except SingularMatrixError:
            raise AssertionError("χ is not invertible at %r degree %d" % (self.strands, n))


_sigma_cache = {}


def sigma_table(strands, n) -> SigmaTable:
    key = (tuple(sorted(strands)), n)
    with _lock:
        hit = _sigma_cache.get(key)
    if hit is not None:
        return hit
    t = SigmaTable(key[0], n)
    with _lock:
        return _sigma_cache.setdefault(key, t)


def sigma(a: DSum, caps=None) -> DSum:
    """Inverse of χ, computed gradewise by inverting the χ matrix."""
    red = reduce_a(a)
    out = Counter()
    for d, c in red.items():
        touch, free = split_legless(d)
        S = sorted(strands_of(touch))
        n = len(touch)
        if n == 0:
            out[free] += c
            continue
        tab = sigma_table(S, n)
        j = tab.aindex[touch]
        for i, b in enumerate(tab.bbasis):
            k = tab.inv[j][i]
            if k:
                out[tuple(sorted(b + free))] += c * k
    from .series import DEFAULT_CAPS

    return DSum({k: v for k, v in out.items() if v}, caps or DEFAULT_CAPS, a.truncated)


# --------------------------------------------------------------------------
# strand operations

def _relabel_legs(d, fn):
    g = diagram_graph(d)
    for h, lab in list(g.legs.items()):
        g.legs[h] = fn(lab)
    return g.canonical()


def m_xyz(a: DSum, x, y, z) -> DSum:
    """Join strand y after strand x and call the result z."""
    acc = Counter()
    for d, c in a.items():
        st = strands_of(d)
        if z in st and z not in (x, y):
            raise SkeletonError("target strand %r already present" % z)
        kx = st[x]

        def fn(lab):
            s, i = lab
            if s == x:
                return (z, i)
            if s == y:
                return (z, kx + i)
            return lab

        sg, dd = _relabel_legs(d, fn)
        if sg:
            acc[dd] += sg * c
    return _asum({k: v for k, v in acc.items() if v}, a.truncated)


def m_yxz(a: DSum, x, y, z) -> DSum:
    return m_xyz(a, y, x, z)


def delta(a: DSum, y, y2) -> DSum:
    """Double strand y: lift each y-attachment to y or y2, keeping order."""
    acc = Counter()
    for d, c in a.items():
        st = strands_of(d)
        if st[y2]:
            raise SkeletonError("strand %r already present" % y2)
        k = st[y]
        for mask in range(1 << k):
            pos = {}
            a1 = a2 = 0
            for i in range(k):
                if mask >> i & 1:
                    pos[i] = (y2, a2)
                    a2 += 1
                else:
                    pos[i] = (y, a1)
                    a1 += 1
            sg, dd = _relabel_legs(d, lambda lab: pos[lab[1]] if lab[0] == y else lab)
            if sg:
                acc[dd] += sg * c
    return _asum({k: v for k, v in acc.items() if v}, a.truncated)


# --------------------------------------------------------------------------
# link relations

def expand_link_relation(d, star_leg_index, caps=None) -> DSum:
    """Re-attach the starred leg next to the end of every other leg of its label.

    ``star_leg_index`` indexes the legs of ``d`` in the order they are met
    when the canonical diagram is decoded.  For each other leg ℓ with the
    same label a new vertex is inserted on ℓ's edge, with cyclic order
    (ℓ, partner of the starred leg, old partner of ℓ).
    """
    from .series import DEFAULT_CAPS

    g = Graph()
    hs = g.add_diagram(d)
    star = hs[star_leg_index]
    x = g.legs[star]
    acc = Counter()
    for h in hs:
        if h == star or g.legs[h] != x:
            continue
        gg = g.copy()
        ps = gg.match[star]
        pl = gg.match[h]
        if ps == h:
            continue  # the starred leg and ℓ bound one strut: a tadpole
        w = gg.new_vertex()
        del gg.legs[star]
        gg.match.pop(star)
        gg.join(w[0], h)
        gg.join(w[1], ps)
        gg.join(w[2], pl)
        s, dd = gg.canonical()
        if s:
            acc[dd] += s
    return DSum({k: v for k, v in acc.items() if v}, caps or DEFAULT_CAPS)


# --------------------------------------------------------------------------
# text form

def skeleton_from_text(text, line=1, col=1) -> DSum:
    from .grammar import parse_skeleton_graph

    strands, g = parse_skeleton_graph(text, line, col)
    s, d = g.canonical()
    return _asum({d: s} if s else {})


def skeleton_strands(d):
    st = strands_of(d)
    return [(s, st[s]) for s in sorted(st)]
