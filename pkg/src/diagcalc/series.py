"""Graded, truncated, exact-rational linear combinations of canonical diagrams."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .diagram import EMPTY, Graph, leg_labels, nlegs, nverts, union


@dataclass(frozen=True)
class Caps:
    """Truncation caps: internal vertex count (twice the internal degree) and legs."""

    vertices: int = 6
    legs: int = 12

    @classmethod
    def degree(cls, max_degree, legs=12):
        """Caps from a (possibly half-integer) internal degree."""
        return cls(int(2 * Fraction(max_degree)), legs)

    def admits(self, d) -> bool:
        return nverts(d) <= self.vertices and nlegs(d) <= self.legs

    def meet(self, other: "Caps") -> "Caps":
        return Caps(min(self.vertices, other.vertices), min(self.legs, other.legs))


UNCAPPED = Caps(10 ** 9, 10 ** 9)
DEFAULT_CAPS = Caps()


def _q(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError("coefficients must be exact rationals, got %r" % (c,))


class DSum:
    """A finite sum ``sum c_d * d`` over canonical diagrams.

    Terms beyond ``caps`` are dropped on construction and ``truncated`` is
    set, so callers can tell whether a result is exact.
    """

    __slots__ = ("terms", "caps", "truncated")

    def __init__(self, terms=None, caps: Caps = DEFAULT_CAPS, truncated=False):
        clean = {}
        if terms:
            for d, c in terms.items():
                if not c:
                    continue
                if not caps.admits(d):
                    truncated = True
                    continue
                clean[d] = _q(c)
        self.terms = clean
        self.caps = caps
        self.truncated = truncated

    # construction ---------------------------------------------------------
    @classmethod
    def zero(cls, caps=DEFAULT_CAPS):
        return cls({}, caps)

    @classmethod
    def one(cls, caps=DEFAULT_CAPS):
        return cls({EMPTY: 1}, caps)

    @classmethod
    def of(cls, d, coef=1, caps=DEFAULT_CAPS):
        return cls({d: coef}, caps)

    @classmethod
    def signed(cls, pair, coef=1, caps=DEFAULT_CAPS):
        """From a ``(sign, diagram)`` pair as returned by canonicalisation."""
        s, d = pair
        if s == 0:
            return cls({}, caps)
        return cls({d: s * _q(coef)}, caps)

    def with_caps(self, caps: Caps) -> "DSum":
        return DSum(self.terms, caps, self.truncated)

    # container protocol ---------------------------------------------------
    def items(self):
        return self.terms.items()

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def coefficient(self, d) -> Fraction:
        return self.terms.get(d, Fraction(0))

    def __eq__(self, other):
        if isinstance(other, DSum):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        from .grammar import format_sum

        tail = " (truncated)" if self.truncated else ""
        try:
            body = format_sum(self)
        except ValueError:
            body = repr(self.terms)
        return "DSum(%s)%s" % (body, tail)

    # linear structure -----------------------------------------------------
    def _combine(self, other, sign):
        caps = self.caps.meet(other.caps)
        out = dict(self.terms)
        for d, c in other.terms.items():
            out[d] = out.get(d, 0) + sign * c
        return DSum(out, caps, self.truncated or other.truncated)

    def __add__(self, other):
        if isinstance(other, DSum):
            return self._combine(other, 1)
        if other == 0:
            return self
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, DSum):
            return self._combine(other, -1)
        if other == 0:
            return self
        return NotImplemented

    def __neg__(self):
        return DSum({d: -c for d, c in self.terms.items()}, self.caps, self.truncated)

    def scale(self, k) -> "DSum":
        k = _q(k)
        return DSum({d: k * c for d, c in self.terms.items()}, self.caps, self.truncated)

    def __mul__(self, other):
        if isinstance(other, DSum):
            return disjoint_union(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    # grading ----------------------------------------------------------------
    def filter(self, pred) -> "DSum":
        return DSum({d: c for d, c in self.terms.items() if pred(d)},
                    self.caps, self.truncated)

    def upto_vertices(self, v) -> "DSum":
        return self.filter(lambda d: nverts(d) <= v)

    def empty_coefficient(self) -> Fraction:
        return self.coefficient(EMPTY)

    def labels(self) -> set:
        out = set()
        for d in self.terms:
            out.update(leg_labels(d))
        return out


class Accumulator:
    """Mutable dict-of-coefficients builder that canonicalises raw graphs."""

    __slots__ = ("terms",)

    def __init__(self):
        self.terms = {}

    def add(self, d, c):
        if c:
            self.terms[d] = self.terms.get(d, 0) + c

    def add_graph(self, g: Graph, c):
        s, d = g.canonical()
        if s:
            self.add(d, s * c)

    def to_sum(self, caps=DEFAULT_CAPS, truncated=False) -> DSum:
        return DSum(self.terms, caps, truncated)


def disjoint_union(a: DSum, b: DSum) -> DSum:
    """Bilinear extension of disjoint union; internal degrees add."""
    caps = a.caps.meet(b.caps)
    out = {}
    truncated = a.truncated or b.truncated
    for d1, c1 in a.terms.items():
        v1, l1 = nverts(d1), nlegs(d1)
        for d2, c2 in b.terms.items():
            if v1 + nverts(d2) > caps.vertices or l1 + nlegs(d2) > caps.legs:
                truncated = True
                continue
            d = union(d1, d2)
            out[d] = out.get(d, 0) + c1 * c2
    return DSum(out, caps, truncated)
