"""
Seeded property-check suites over random Gaussians and diagram bases.

Every suite takes a ``random.Random`` (or a seed), an internal-degree bound
and a case count, and returns a :class:`Report`.  Failures carry a witness:
the reduced difference of the two sides in the diagram grammar.  Reports
contain no timings, so equal seeds give byte-identical text.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import exp_union
from .basis import build_basis, reduce
from .bch import bch_trees, m_via_bch, m_via_operator, tree_coefficient
from .diagram import DiagramError, dual, nverts
from .gaussian import (DegenerateCovarianceError, Gaussian, fubini_check,
                       integrate_by_parts_check)
from .grammar import format_rational, format_sum
from .linalg import SingularMatrixError, inverse, matmul
from .pipeline import (cyclic_check, kirby2_check, ogl_leading_check,
                       parity_flip_check, reparametrization_check, trivalent_graphs)
from .series import Caps, DSum
from .skeleton import b_basis_total_degree, chi, m_xyz, sigma

SUITES = ("kirby2", "cyclic", "fubini", "ibp", "parity", "ogl", "bch")

# the four tree coefficients displayed for log(e^x e^y)
BCH_ANCHORS = (
    (("x", "y"), Fraction(1, 2)),
    (("x", ("x", "y")), Fraction(1, 12)),
    (("y", ("x", "y")), Fraction(-1, 12)),
    (("x", ("y", ("x", "y"))), Fraction(-1, 24)),
)

LEG_CAP = 16


@dataclass
class Report:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, case, witness):
        self.failures.append((case, witness))

    def text(self) -> str:
        lines = ["check %s: %d cases" % (self.name, self.cases)]
        lines.extend("  note: %s" % n for n in self.notes)
        for case, w in self.failures:
            lines.append("  FAIL %s" % case)
            for wl in w.splitlines():
                lines.append("    %s" % wl)
        lines.append("%s: %s (%d/%d passed)" % (
            self.name, "PASS" if self.ok else "FAIL",
            self.cases - len(self.failures), self.cases))
        return "\n".join(lines) + "\n"


def caps_for(max_degree) -> Caps:
    return Caps(2 * max_degree, LEG_CAP)


# --------------------------------------------------------------------------
# random inputs

def random_fraction(rng, num=3, den=3) -> Fraction:
    return Fraction(rng.choice([k for k in range(-num, num + 1) if k]),
                    rng.randint(1, den))


def is_invertible(m) -> bool:
    if not m:
        return True
    try:
        inverse(m)
    except SingularMatrixError:
        return False
    return True


def submatrix(m, idx):
    return [[m[i][j] for j in idx] for i in idx]


def random_covariance(rng, n, blocks=(), bound=2):
    """Random symmetric integer matrix, invertible along with each index block."""
    while True:
        m = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = Fraction(rng.randint(-bound, bound + 1))
            for j in range(i):
                m[i][j] = m[j][i] = Fraction(rng.randint(-bound, bound))
        if is_invertible(m) and all(is_invertible(submatrix(m, b)) for b in blocks):
            return m


def random_unimodular(rng, n, steps=6):
    """Product of random elementary integer matrices and sign flips."""
    m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        i = rng.randrange(n)
        if n > 1 and rng.random() < 0.8:
            j = rng.choice([k for k in range(n) if k != i])
            e[i][j] = Fraction(rng.choice([-2, -1, 1, 2]))
        else:
            e[i][i] = Fraction(-1)
        m = matmul(e, m)
    return m


def random_connected(rng, labels, max_vertices, max_legs=4, min_vertices=1,
                     fixed=()):
    """A random reduced connected diagram with a trivalent vertex.

    ``fixed`` legs are always present; further legs are drawn from labels.
    """
    for _ in range(1000):
        nv = rng.randint(min_vertices, max_vertices)
        free = [k for k in range(0, max_legs + 1 - len(fixed))
                if (3 * nv + len(fixed) + k) % 2 == 0 and len(fixed) + k >= 1]
        if not free:
            continue
        k = rng.choice(free)
        legs = tuple(fixed) + tuple(rng.choice(labels) for _ in range(k))
        gb = build_basis(nv, legs, connected=True)
        basis = gb.basis
        if basis:
            return rng.choice(basis)
    raise ValueError("no nonzero connected diagram with legs %r and at most %d vertices"
                     % (fixed, max_vertices))


def random_P(rng, labels, max_vertices, caps, terms=2):
    """A strutless sum, sometimes with two-component products."""
    acc = {}
    for _ in range(terms):
        d = random_connected(rng, labels, max_vertices)
        if nverts(d) < max_vertices and rng.random() < 0.4:
            e = random_connected(rng, labels, max_vertices - nverts(d))
            d = tuple(sorted(d + e))
        acc[d] = acc.get(d, 0) + random_fraction(rng)
    return DSum(acc, caps)


def random_group_like(rng, labels, max_vertices, caps, terms=2):
    """``exp_⊔`` of a random primitive (connected, strutless) sum."""
    prim = {}
    for _ in range(terms):
        d = random_connected(rng, labels, max_vertices)
        prim[d] = prim.get(d, 0) + random_fraction(rng)
    return exp_union(DSum(prim, caps))


def random_operator(rng, z, labels, order, max_vertices, caps, terms=2):
    """Homogeneous order-``order`` operator in ∂z with no struts."""
    acc = {}
    for _ in range(terms):
        d = random_connected(rng, labels, max_vertices, max_legs=order + 2,
                             fixed=(dual(z),) * order)
        acc[d] = acc.get(d, 0) + random_fraction(rng)
    return DSum(acc, caps)


# --------------------------------------------------------------------------
# witnesses

def format_matrix(labels, m) -> str:
    rows = [",".join(labels)]
    rows += [" ".join(format_rational(c) for c in r) for r in m]
    return "\n".join(rows)


def difference(a, b):
    """None if equal modulo AS/IHX, else a grammar witness."""
    if isinstance(a, Gaussian) or isinstance(b, Gaussian):
        if not (isinstance(a, Gaussian) and isinstance(b, Gaussian)):
            return "one side is a Gaussian, the other a sum"
        if set(a.labels) != set(b.labels):
            return "variables differ: %s vs %s" % (",".join(a.labels), ",".join(b.labels))
        ib = b.index()
        perm = [ib[x] for x in a.labels]
        bc = [[b.cov[i][j] for j in perm] for i in perm]
        if bc != [list(r) for r in a.cov]:
            return "covariances differ:\n%s\n%s" % (format_matrix(a.labels, a.cov),
                                                    format_matrix(a.labels, bc))
        return difference(a.P, b.P)
    d = reduce(a - b)
    return format_sum(d) if d else None


def describe(g: Gaussian) -> str:
    return "covariance %s; P = %s" % (
        "; ".join(" ".join(format_rational(c) for c in r) for r in g.cov)
        + " on " + ",".join(g.labels), format_sum(g.P))


def _rng(seed_or_rng):
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


# --------------------------------------------------------------------------
# suites

def check_parity(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("parity")
    X = ("x", "y", "e")
    for i in range(cases):
        g = Gaussian(X, random_covariance(rng, 3), random_P(rng, X, 2 * max_degree, caps))
        y = rng.choice(X)
        rep.cases += 1
        w = difference(*parity_flip_check(g, y))
        if w:
            rep.fail("case %d (flip %s): %s" % (i, y, describe(g)), w)
    return rep


def check_reparametrization(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("reparametrization")
    X = ("x", "y", "e")
    for i in range(cases):
        g = Gaussian(X, random_covariance(rng, 3), random_P(rng, X, 2 * max_degree, caps))
        M = random_unimodular(rng, 3)
        rep.cases += 1
        w = difference(*reparametrization_check(g, M))
        if w:
            rep.fail("case %d: %s; M = %s" % (i, describe(g), M), w)
    return rep


def check_fubini(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("fubini")
    X = ("x", "y", "e")
    for i in range(cases):
        k = rng.randint(1, 2)
        idx = sorted(rng.sample(range(3), k))
        cov = random_covariance(rng, 3, blocks=[idx])
        g = Gaussian(X, cov, random_P(rng, X, 2 * max_degree, caps))
        X1 = [X[j] for j in idx]
        rep.cases += 1
        w = difference(*fubini_check(g, X1))
        if w:
            rep.fail("case %d (inner %s): %s" % (i, ",".join(X1), describe(g)), w)
    return rep


def check_ibp(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("ibp")
    X = ("x", "y", "e")
    for i in range(cases):
        z = rng.choice(X)
        order = 1 + i % 2
        D = random_operator(rng, z, X, order, max(order, max_degree), caps)
        g = Gaussian(X, random_covariance(rng, 3),
                     random_P(rng, X, max(1, 2 * max_degree - 2), caps))
        rep.cases += 1
        w = difference(*integrate_by_parts_check(D, g, z))
        if w:
            rep.fail("case %d (z = %s, D = %s): %s" % (i, z, format_sum(D), describe(g)), w)
    return rep


def check_kirby2(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("kirby2")
    X = ("x", "y", "e")
    for i in range(cases):
        g = Gaussian(X, random_covariance(rng, 3), random_P(rng, X, 2 * max_degree, caps))
        rep.cases += 1
        lhs, hat, tilde = kirby2_check(g)
        for tag, other in (("merge", hat), ("substitution", tilde)):
            w = difference(lhs, other)
            if w:
                rep.fail("case %d (%s): %s" % (i, tag, describe(g)), w)
    return rep


def merged_covariance(cov):
    """Covariance on (z, e) after x, y -> z for variables (x, y, e)."""
    zz = cov[0][0] + 2 * cov[0][1] + cov[1][1]
    ze = cov[0][2] + cov[1][2]
    return [[zz, ze], [ze, cov[2][2]]]


def random_cyclic_input(rng, max_degree, caps):
    X = ("x", "y", "e")
    while True:
        cov = random_covariance(rng, 3)
        m = merged_covariance(cov)
        if m[0][0] and is_invertible(m):
            break
    return Gaussian(X, cov, random_group_like(rng, X, 2 * max_degree, caps))


def check_cyclic(seed, max_degree=2, cases=20) -> Report:
    rng = _rng(seed)
    caps = caps_for(max_degree)
    rep = Report("cyclic")
    for i in range(cases):
        g = random_cyclic_input(rng, max_degree, caps)
        for F in (("z", "e"), ("z",)):
            rep.cases += 1
            w = difference(*cyclic_check(g, F))
            if w:
                rep.fail("case %d (F = %s): %s" % (i, ",".join(F), describe(g)), w)
    return rep


def check_ogl(seed=None, max_degree=2, cases=None) -> Report:
    rep = Report("ogl")
    signs = []
    for d in trivalent_graphs(2 * max_degree):
        rep.cases += 1
        c, rd = ogl_leading_check(d)
        signs.append(format_rational(c))
        if rd != d or abs(c) != 1:
            rep.fail("graph %s" % format_sum(DSum({d: 1})),
                     "recovered %s with coefficient %s"
                     % ("nothing" if rd is None else format_sum(DSum({rd: 1})),
                        format_rational(c)))
    rep.notes.append("coefficients in graph order: %s" % " ".join(signs))
    return rep


def bch_cases(max_degree):
    """Basis elements of B over x, y: internal degree <= max_degree and
    total degree <= max_degree + 1."""
    out = []
    for n in range(1, max_degree + 2):
        for S in (("x",), ("y",), ("x", "y")):
            for b in b_basis_total_degree(S, n):
                if sum(c[0] for c in b) <= 2 * max_degree:
                    out.append(b)
    return out


def check_bch(seed=None, max_degree=2, cases=None) -> Report:
    rep = Report("bch")
    lam = bch_trees(4)
    for expr, want in BCH_ANCHORS:
        rep.cases += 1
        got = tree_coefficient(lam, expr)
        if got != want:
            rep.fail("tree %r" % (expr,), "coefficient %s, expected %s"
                     % (format_rational(got), format_rational(want)))
    caps = Caps(2 * max_degree + 2, LEG_CAP)
    for b in bch_cases(max_degree):
        C = DSum({b: 1}, caps)
        glued = m_via_bch(C)
        rep.cases += 1
        w = difference(sigma(m_xyz(chi(C, reduce=False), "x", "y", "z"), caps=caps), glued)
        if w:
            rep.fail("skeleton merge of %s" % format_sum(C), w)
        rep.cases += 1
        w = difference(m_via_operator(C), glued)
        if w:
            rep.fail("operator merge of %s" % format_sum(C), w)
    return rep


RUNNERS = {
    "kirby2": check_kirby2,
    "cyclic": check_cyclic,
    "fubini": check_fubini,
    "ibp": check_ibp,
    "parity": lambda seed, max_degree=2, cases=20: _merge(
        "parity", check_parity(seed, max_degree, cases),
        check_reparametrization(seed, max_degree, cases)),
    "ogl": check_ogl,
    "bch": check_bch,
}


def _merge(name, *reports) -> Report:
    out = Report(name)
    for r in reports:
        out.cases += r.cases
        out.notes.extend("%s: %s" % (r.name, n) for n in r.notes)
        out.failures.extend(("%s %s" % (r.name, c), w) for c, w in r.failures)
    return out


def run_suite(name, seed=0, max_degree=2, cases=20) -> Report:
    if name not in RUNNERS:
        raise ValueError("unknown check %r (choose from %s)" % (name, ", ".join(SUITES)))
    try:
        return RUNNERS[name](seed, max_degree, cases)
    except (DegenerateCovarianceError, DiagramError) as e:
        rep = Report(name)
        rep.fail("error", str(e))
        return rep
