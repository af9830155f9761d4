"""
Uni-trivalent diagrams and their signed canonical forms.

A diagram is stored canonically as a sorted tuple of connected-component
codes.  Internal vertices carry a cyclic order on their three slots
(slot 0 -> 1 -> 2); reversing it negates the diagram (AS).  Legs carry a
label: a string for ordinary diagrams (``"x"`` primal, ``"∂x"`` dual) or a
tuple ``(strand, position)`` for diagrams drawn on a skeleton.

Component codes
---------------
strut            ``(0, (a, b))`` with ``a <= b``
vertex component ``(V, start, entries)`` where ``start`` is ``(1, label)``
                 for components with legs (traversal starts from a leg of
                 minimal label) and ``(0,)`` for legless ones; ``entries``
                 lists, vertex by vertex and slot by slot, either
                 ``(0, label)`` for a leg or ``(1, 3*w + pos)`` for a slot of
                 vertex ``w``.

The code is the lexicographically least one over all traversal choices,
so it is a complete isomorphism invariant.  The accompanying sign relates
the input diagram to the diagram decoded from the code.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import count

DUAL = "∂"


class DiagramError(ValueError):
    """Malformed diagram input."""


class VertexlessLoopError(DiagramError):
    """A gluing closed a circle with no internal vertex on it."""


# --------------------------------------------------------------------------
# labels

def dual(label: str) -> str:
    if label.startswith(DUAL):
        return label[len(DUAL):]
    return DUAL + label


def is_dual(label) -> bool:
    return isinstance(label, str) and label.startswith(DUAL)


def base(label: str) -> str:
    return label[len(DUAL):] if label.startswith(DUAL) else label


# --------------------------------------------------------------------------
# raw graphs

class Graph:
    """Mutable half-edge graph used while building or gluing diagrams.

    ``verts[v]`` is the cyclically ordered triple of half-edges of vertex v
    (``None`` once a vertex is deleted), ``legs`` maps leg half-edges to
    labels and ``match`` is the edge involution.
    """

    __slots__ = ("verts", "vslot", "legs", "match", "_ids")

    def __init__(self):
        self.verts = []
        self.vslot = {}
        self.legs = {}
        self.match = {}
        self._ids = count()

    def copy(self) -> "Graph":
        g = Graph.__new__(Graph)
        g.verts = list(self.verts)
        g.vslot = dict(self.vslot)
        g.legs = dict(self.legs)
        g.match = dict(self.match)
        g._ids = count(next(self._ids))
        return g

    def new_vertex(self):
        hs = (next(self._ids), next(self._ids), next(self._ids))
        v = len(self.verts)
        self.verts.append(hs)
        for i, h in enumerate(hs):
            self.vslot[h] = (v, i)
        return hs

    def new_leg(self, label):
        h = next(self._ids)
        self.legs[h] = label
        return h

    def join(self, a, b):
        self.match[a] = b
        self.match[b] = a

    def add_diagram(self, d):
        """Add a canonical diagram; return the list of its leg half-edges."""
        legs = []
        for comp in d:
            nv = comp[0]
            if nv == 0:
                a, b = comp[1]
                ha, hb = self.new_leg(a), self.new_leg(b)
                self.join(ha, hb)
                legs += [ha, hb]
                continue
            vs = [self.new_vertex() for _ in range(nv)]
            for t, e in enumerate(comp[2]):
                h = vs[t // 3][t % 3]
                if e[0] == 0:
                    lh = self.new_leg(e[1])
                    self.join(h, lh)
                    legs.append(lh)
                else:
                    r = e[1]
                    self.join(h, vs[r // 3][r % 3])
        return legs

    def glue(self, h1, h2):
        """Fuse two legs: their partners become joined by one edge."""
        a = self.match.pop(h1)
        if a == h2:
            raise VertexlessLoopError(
                "gluing leg %s to leg %s closes a vertexless loop "
                "(both are ends of one strut)" % (self.legs[h1], self.legs[h2]))
        b = self.match.pop(h2)
        del self.legs[h1]
        del self.legs[h2]
        self.join(a, b)

    def remove_vertex(self, v):
        for h in self.verts[v]:
            del self.vslot[h]
            self.match.pop(h, None)
        self.verts[v] = None

    def canonical(self):
        """Return ``(sign, diagram)``; sign is 0 when the diagram is AS-zero."""
        sign = 1
        comps = []
        for cv, cl in self._components():
            code, s = _component_code(self, cv, cl)
            if s == 0:
                return 0, None
            sign *= s
            comps.append(code)
        comps.sort()
        return sign, tuple(comps)

    def _components(self):
        seen_v = set()
        seen_l = set()
        match, vslot, legs, verts = self.match, self.vslot, self.legs, self.verts
        starts = [("v", v) for v, hs in enumerate(verts) if hs is not None]
        starts += [("l", h) for h in legs]
        for kind, x in starts:
            if (kind == "v" and x in seen_v) or (kind == "l" and x in seen_l):
                continue
            cv, cl = [], []
            stack = [(kind, x)]
            while stack:
                kind, x = stack.pop()
                if kind == "v":
                    if x in seen_v:
                        continue
                    seen_v.add(x)
                    cv.append(x)
                    hs = verts[x]
                else:
                    if x in seen_l:
                        continue
                    seen_l.add(x)
                    cl.append(x)
                    hs = (x,)
                for h in hs:
                    q = match.get(h)
                    if q is None:
                        raise DiagramError("half-edge %r is not matched" % (h,))
                    if q in legs:
                        if q not in seen_l:
                            stack.append(("l", q))
                    else:
                        w = vslot[q][0]
                        if w not in seen_v:
                            stack.append(("v", w))
            yield cv, cl


def _component_code(g: Graph, cv, cl):
    legs, match = g.legs, g.match
    if not cv:
        if len(cl) != 2:
            raise DiagramError("vertexless component with %d legs" % len(cl))
        a, b = sorted(legs[h] for h in cl)
        return (0, (a, b)), 1

    verts, vslot = g.verts, g.vslot
    nv = len(cv)
    n3 = 3 * nv
    starts = []
    if cl:
        lab = min(legs[h] for h in cl)
        key = (1, lab)
        for h in cl:
            if legs[h] != lab:
                continue
            v, i = vslot[match[h]]
            hs = verts[v]
            starts.append((v, (hs[i], hs[(i + 1) % 3], hs[(i + 2) % 3]), 1))
            starts.append((v, (hs[i], hs[(i + 2) % 3], hs[(i + 1) % 3]), -1))
    else:
        key = (0,)
        for v in cv:
            hs = verts[v]
            for i in range(3):
                starts.append((v, (hs[i], hs[(i + 1) % 3], hs[(i + 2) % 3]), 1))
                starts.append((v, (hs[i], hs[(i + 2) % 3], hs[(i + 1) % 3]), -1))

    best = [None, set()]

    def search(order, pos, entries, sign, tight):
        idx = len(entries)
        bcode = best[0]
        while idx < n3:
            h = order[idx // 3][idx % 3]
            q = match[h]
            lab = legs.get(q)
            if lab is not None:
                e = (0, lab)
            else:
                r = pos.get(q)
                if r is not None:
                    e = (1, r)
                else:
                    w, j = vslot[q]
                    hs = verts[w]
                    nn = len(order)
                    e = (1, 3 * nn)
                    if tight and bcode is not None:
                        be = bcode[idx]
                        if e > be:
                            return
                        if e < be:
                            tight = False
                    entries.append(e)
                    a, b, c = hs[j], hs[(j + 1) % 3], hs[(j + 2) % 3]
                    for ow, sg in (((a, b, c), 1), ((a, c, b), -1)):
                        t2 = False
                        if best[0] is not None:
                            # the best code may have moved inside a sibling
                            pre = best[0][:idx + 1]
                            cur = tuple(entries)
                            if cur > pre:
                                continue
                            t2 = cur == pre
                        p2 = dict(pos)
                        p2[ow[0]] = 3 * nn
                        p2[ow[1]] = 3 * nn + 1
                        p2[ow[2]] = 3 * nn + 2
                        search(order + [ow], p2, list(entries), sign * sg, t2)
                    return
            if tight and bcode is not None:
                be = bcode[idx]
                if e > be:
                    return
                if e < be:
                    tight = False
            entries.append(e)
            idx += 1
        code = tuple(entries)
        if best[0] is None or code < best[0]:
            best[0] = code
            best[1] = {sign}
        elif code == best[0]:
            best[1].add(sign)

    for v, ordv, sg in starts:
        pos = {ordv[0]: 0, ordv[1]: 1, ordv[2]: 2}
        if best[0] is None:
            search([ordv], pos, [], sg, False)
        else:
            search([ordv], pos, [], sg, True)

    signs = best[1]
    sign = 0 if len(signs) == 2 else next(iter(signs))
    return (nv, key, best[0]), sign


# --------------------------------------------------------------------------
# canonical diagrams

EMPTY = ()


def canonical(g: Graph):
    return g.canonical()


def diagram_graph(d) -> Graph:
    g = Graph()
    g.add_diagram(d)
    return g


def from_edges(nverts, edges, leg_labels):
    """Build ``(sign, diagram)`` from an explicit edge list.

    Ends are ``("leg", i)`` for leg i (labelled ``leg_labels[i]``) or
    ``(v, slot)`` for vertex v in ``range(nverts)``.
    """
    g = Graph()
    vs = [g.new_vertex() for _ in range(nverts)]
    lh = [g.new_leg(lab) for lab in leg_labels]
    used = set()

    def half(end):
        if end[0] == "leg":
            h = lh[end[1]]
        else:
            v, s = end
            if not (0 <= v < nverts and s in (0, 1, 2)):
                raise DiagramError("bad vertex end %r" % (end,))
            h = vs[v][s]
        if h in used:
            raise DiagramError("end %r used twice" % (end,))
        used.add(h)
        return h

    for a, b in edges:
        g.join(half(a), half(b))
    if len(used) != 3 * nverts + len(leg_labels):
        raise DiagramError("not every half-edge is matched")
    return g.canonical()


def strut(a, b):
    return ((0, tuple(sorted((a, b)))),)


def ytree(a, b, c):
    """Single vertex with legs a, b, c in that cyclic order: (sign, diagram)."""
    return from_edges(1, [(("leg", 0), (0, 0)), (("leg", 1), (0, 1)),
                          (("leg", 2), (0, 2))], [a, b, c])


def union(d1, d2):
    return tuple(sorted(d1 + d2))


@lru_cache(maxsize=None)
def nverts(d) -> int:
    return sum(c[0] for c in d)


@lru_cache(maxsize=None)
def leg_labels(d) -> tuple:
    """Sorted tuple of the leg labels of a canonical diagram."""
    out = []
    for c in d:
        out.extend(component_legs(c))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def component_legs(c) -> tuple:
    if c[0] == 0:
        return c[1]
    return tuple(sorted(e[1] for e in c[2] if e[0] == 0))


def nlegs(d) -> int:
    return len(leg_labels(d))


def is_strut(c) -> bool:
    return c[0] == 0


def relabel_diagram(d, fn):
    """Apply a label-to-label function to every leg (then re-canonicalise)."""
    g = diagram_graph(d)
    for h, lab in list(g.legs.items()):
        g.legs[h] = fn(lab)
    return g.canonical()
