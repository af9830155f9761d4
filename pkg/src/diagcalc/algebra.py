"""
Products, exponentials, gluing (pairing and operator application) and
multilinear relabelling of diagram sums.

Gluing enumerates assignments between individual leg half-edges, so the
usual symmetry factors come out of the count of matchings by themselves.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from functools import lru_cache

from .diagram import EMPTY, DiagramError, Graph, base, diagram_graph, is_dual, leg_labels, nverts
from .series import Caps, DSum, disjoint_union

__all__ = [
    "disjoint_union", "exp_union", "log_union", "power_union", "pair", "apply",
    "relabel", "Relabeling", "compose_relabelings", "linear_substitution",
]

_FINITE = 200


def _check_finite(caps: Caps):
    if caps.vertices > _FINITE or caps.legs > _FINITE:
        raise ValueError("exp/log need finite caps (got %r)" % (caps,))


def _series(s: DSum, coeffs, admit=None) -> DSum:
    """``sum_n coeffs(n) * s^n`` for n >= 1, stopping once powers vanish."""
    caps = s.caps
    _check_finite(caps)
    acc = DSum({}, caps, s.truncated)
    power = DSum({EMPTY: 1}, caps)
    n = 0
    while True:
        n += 1
        power = disjoint_union(power, s)
        if admit is not None:
            power = power.filter(admit)
        if not power:
            acc.truncated = acc.truncated or power.truncated
            break
        acc = acc + power.scale(coeffs(n))
    return acc


def exp_union(s: DSum, admit=None) -> DSum:
    """``exp`` under disjoint union, truncated at the caps of ``s``.

    ``admit`` is an optional predicate on diagrams that must be closed
    under taking sub-diagrams of a product (e.g. a leg-count budget); terms
    failing it are discarded early.
    """
    if s.coefficient(EMPTY):
        raise ValueError("exp_union needs a sum without an empty-diagram term")
    facts = [Fraction(1)]

    def coef(n):
        while len(facts) <= n:
            facts.append(facts[-1] / len(facts))
        return facts[n]

    return DSum({EMPTY: 1}, s.caps) + _series(s, coef, admit)


def log_union(s: DSum) -> DSum:
    """Inverse of :func:`exp_union`; the empty coefficient must be exactly 1."""
    if s.coefficient(EMPTY) != 1:
        raise ValueError("log_union needs empty-diagram coefficient 1")
    t = s - DSum({EMPTY: 1}, s.caps)
    return _series(t, lambda n: Fraction((-1) ** (n + 1), n))


def power_union(s: DSum, k) -> DSum:
    """``s^k`` for rational k via ``exp(k log s)``; needs unit empty term."""
    return exp_union(log_union(s).scale(k))


# --------------------------------------------------------------------------
# gluing

def _injections(ops, targets_by_label, label_of):
    """All injective maps op-leg -> target-leg with matching labels."""
    out = []
    used = set()
    cur = []

    def rec(i):
        if i == len(ops):
            out.append(list(cur))
            return
        for t in targets_by_label.get(label_of(ops[i]), ()):
            if t in used:
                continue
            used.add(t)
            cur.append((ops[i], t))
            rec(i + 1)
            cur.pop()
            used.discard(t)

    rec(0)
    return out


def glue_graph(g: Graph, pairs):
    """Glue the given leg pairs of ``g`` in place."""
    for a, b in pairs:
        g.glue(a, b)
    return g


@lru_cache(maxsize=200000)
def _glue_terms(dD, df, op_labels, full):
    """Glue dual legs of dD (labels in op_labels, or all duals if None) to df.

    With ``full`` every leg of df whose label is the base of a gluing label
    must be consumed (pairing); otherwise only D's dual legs must be.
    Returns a tuple of ``(diagram, coef)``.
    """
    g = Graph()
    lD = g.add_diagram(dD)
    lf = g.add_diagram(df)
    legs = g.legs

    def wanted(lab):
        if not is_dual(lab):
            return False
        return op_labels is None or base(lab) in op_labels

    ops = [h for h in lD if wanted(legs[h])]
    targets = {}
    for h in lf:
        lab = legs[h]
        if isinstance(lab, str) and not is_dual(lab):
            targets.setdefault(lab, []).append(h)
    need = Counter(base(legs[h]) for h in ops)
    for lab, k in need.items():
        if len(targets.get(lab, ())) < k:
            return ()
    if full:
        for lab, hs in targets.items():
            if (op_labels is None or lab in op_labels) and len(hs) != need.get(lab, 0):
                return ()
    acc = Counter()
    for inj in _injections(ops, targets, lambda h: base(legs[h])):
        gg = glue_graph(g.copy(), inj)
        s, d = gg.canonical()
        if s:
            acc[d] += s
    return tuple((d, c) for d, c in acc.items() if c)


def _glue_sums(D: DSum, f: DSum, op_labels, full, caps=None):
    caps = caps or D.caps.meet(f.caps)
    out = {}
    truncated = D.truncated or f.truncated
    for dD, cD in D.items():
        vD = nverts(dD)
        for df, cf in f.items():
            if vD + nverts(df) > caps.vertices:
                truncated = True
                continue
            for d, k in _glue_terms(dD, df, op_labels, full):
                out[d] = out.get(d, 0) + cD * cf * k
    return DSum(out, caps, truncated)


def pair(D: DSum, P: DSum, X, caps=None) -> DSum:
    """``<D, P>_X``: glue every ∂x-leg of D to an x-leg of P, x in X, bijectively.

    Raises :class:`VertexlessLoopError` if a gluing closes a strut circle.
    """
    return _glue_sums(D, P, frozenset(X), True, caps)


def apply(D: DSum, f: DSum, caps=None) -> DSum:
    """``D ⊣ f``: glue all dual legs of D injectively into legs of f."""
    return _glue_sums(D, f, None, False, caps)


# --------------------------------------------------------------------------
# relabelling

class Relabeling(dict):
    """Map label -> ``{label: rational}``; plain labels mean coefficient 1."""

    def __init__(self, mapping=(), partial=False):
        super().__init__()
        self.partial = partial
        for k, v in dict(mapping).items():
            if isinstance(v, (str, tuple)):
                v = {v: Fraction(1)}
            self[k] = {lab: Fraction(c) for lab, c in v.items() if c}

    def image(self, lab):
        if lab in self:
            return self[lab]
        if self.partial:
            return {lab: Fraction(1)}
        raise DiagramError("relabelling has no image for label %r" % (lab,))


def relabel(s: DSum, r, partial=False, caps=None) -> DSum:
    """Multilinear expansion of ``s`` under the relabelling ``r``."""
    if not isinstance(r, Relabeling):
        r = Relabeling(r, partial)
    caps = caps or s.caps
    out = {}
    for d, c in s.items():
        for dd, k in _relabel_term(d, r).items():
            out[dd] = out.get(dd, 0) + c * k
    return DSum(out, caps, s.truncated)


def _relabel_term(d, r):
    g = diagram_graph(d)
    hs = list(g.legs)
    choices = [list(r.image(g.legs[h]).items()) for h in hs]
    acc = Counter()

    def rec(i, coef):
        if i == len(hs):
            s, dd = g.canonical()
            if s:
                acc[dd] += s * coef
            return
        h = hs[i]
        for lab, k in choices[i]:
            g.legs[h] = lab
            rec(i + 1, coef * k)

    rec(0, Fraction(1))
    return {dd: c for dd, c in acc.items() if c}


def compose_relabelings(first: Relabeling, second: Relabeling) -> Relabeling:
    """The relabelling ``second ∘ first`` (apply ``first``, then ``second``)."""
    out = {}
    for lab, img in first.items():
        acc = Counter()
        for l2, c in img.items():
            for l3, c3 in second.image(l2).items():
                acc[l3] += c * c3
        out[lab] = {k: v for k, v in acc.items() if v}
    if first.partial:
        for lab, img in second.items():
            out.setdefault(lab, img)
    return Relabeling(out, first.partial and second.partial)


def linear_substitution(matrix, labels, new_labels=None):
    """Relabelling for ``x_i -> sum_j M_ij y_j`` and its dual counterpart.

    Dual labels transform by the inverse transpose, ``∂x_i -> sum_j
    (M^{-T})_ij ∂y_j``, so that gluing ∂x to x stays invariant.
    """
    from .diagram import dual
    from .linalg import inverse, transpose

    new_labels = list(new_labels or labels)
    n = len(labels)
    inv_t = transpose(inverse(matrix))
    mp = {}
    for i, x in enumerate(labels):
        mp[x] = {new_labels[j]: Fraction(matrix[i][j]) for j in range(n)}
        mp[dual(x)] = {dual(new_labels[j]): inv_t[i][j] for j in range(n)}
    return Relabeling(mp, partial=True)


def leg_budget(counts):
    """Predicate admitting diagrams with at most ``counts[label]`` legs per label.

    Labels not mentioned are unrestricted.
    """
    counts = dict(counts)

    def admit(d):
        c = Counter(leg_labels(d))
        return all(c[k] <= v for k, v in counts.items())

    return admit
