"""Shared test helpers: explicit edge lists and random diagram sums."""
from __future__ import annotations

from fractions import Fraction

from diagcalc.basis import build_basis
from diagcalc.diagram import diagram_graph
from diagcalc.series import Caps, DSum


def edges_of(d):
    """``(nverts, edges, labels)`` for :func:`diagcalc.diagram.from_edges`."""
    g = diagram_graph(d)
    labels, leg_index = [], {}
    for h in sorted(g.legs):
        leg_index[h] = len(labels)
        labels.append(g.legs[h])

    def end(h):
        if h in leg_index:
            return ("leg", leg_index[h])
        return g.vslot[h]

    edges, seen = [], set()
    for h, q in g.match.items():
        if h in seen:
            continue
        seen.update((h, q))
        edges.append((end(h), end(q)))
    return len(g.verts), edges, labels


def basis_pool(labels=("x", "y", "e"), max_vertices=2, max_legs=4):
    """Reduced connected basis diagrams of small grades, for random sums."""
    from itertools import combinations_with_replacement

    pool = []
    for nv in range(0, max_vertices + 1):
        for L in range(0, max_legs + 1):
            if (3 * nv + L) % 2 or (nv == 0 and L != 2):
                continue
            for legs in combinations_with_replacement(labels, L):
                pool.extend(build_basis(nv, legs, connected=True).basis)
    return sorted(set(pool))


def random_sum(rng, pool, terms=3, caps=Caps(6, 16)):
    acc = {}
    for _ in range(terms):
        d = rng.choice(pool)
        if rng.random() < 0.3:
            d = tuple(sorted(d + rng.choice(pool)))
        acc[d] = acc.get(d, 0) + Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    return DSum(acc, caps)
