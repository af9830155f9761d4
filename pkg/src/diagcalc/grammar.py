"""
Text formats: diagram sums, series files, covariance files, skeleton diagrams.

Diagram sums::

    sum      := term (('+'|'-') term)*
    term     := [rational '*'] diagram
    diagram  := 'D[' edge (';' edge)* ']' | 'empty'
    edge     := end '-' end
    end      := 'leg(' label ')' | 'v' N '.' slot
    label    := ident | 'd' ident          # leading 'd' marks a dual label

The literal ``0`` is also accepted (and printed) for the zero sum.  Skeleton
diagrams use ``S[strand x: p1,p2; strand y: p3; p1-v1.0; ...]`` where the
attachment points ``pK`` are numbered consecutively in strand order.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .diagram import DUAL, DiagramError, Graph, VertexlessLoopError
from .series import DSum, DEFAULT_CAPS


class ParseError(ValueError):
    """Syntax or content error with a 1-based line and column."""

    def __init__(self, msg, line=1, col=1):
        super().__init__("line %d, column %d: %s" % (line, col, msg))
        self.msg = msg
        self.line = line
        self.col = col


# --------------------------------------------------------------------------
# printing

def format_label(lab) -> str:
    if not isinstance(lab, str):
        raise ValueError("only string labels have a text form: %r" % (lab,))
    if lab.startswith(DUAL):
        return "d" + lab[len(DUAL):]
    if lab.startswith("d") and len(lab) > 1:
        raise ValueError("primal label %r would read back as a dual" % lab)
    return lab


def format_diagram(d) -> str:
    if not d:
        return "empty"
    edges = []
    offset = 0
    for comp in d:
        if comp[0] == 0:
            a, b = comp[1]
            edges.append("leg(%s)-leg(%s)" % (format_label(a), format_label(b)))
            continue
        entries = comp[2]
        for t, e in enumerate(entries):
            here = "v%d.%d" % (offset + t // 3 + 1, t % 3)
            if e[0] == 0:
                edges.append("leg(%s)-%s" % (format_label(e[1]), here))
            elif e[1] > t:
                r = e[1]
                edges.append("%s-v%d.%d" % (here, offset + r // 3 + 1, r % 3))
        offset += comp[0]
    return "D[" + "; ".join(edges) + "]"


def format_rational(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else "%d/%d" % (c.numerator, c.denominator)


def format_sum(s) -> str:
    items = sorted(s.items(), key=lambda kv: (sum(x[0] for x in kv[0]), kv[0]))
    if not items:
        return "0"
    out = []
    for i, (d, c) in enumerate(items):
        body = format_diagram(d)
        if i == 0:
            if c in (1, -1):
                out.append(body if c == 1 else "-" + body)
            else:
                out.append("%s*%s" % (format_rational(c), body))
        else:
            sign = "+" if c > 0 else "-"
            a = abs(c)
            out.append(" %s %s" % (sign, body if a == 1 else "%s*%s" % (format_rational(a), body)))
    return "".join(out)


# --------------------------------------------------------------------------
# scanning

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<kw>D\[|S\[|leg\(|empty\b|strand\b)
  | (?P<vert>v\d+\.\d+)
  | (?P<pt>p\d+\b)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<sym>[-+*;:,\]\)])
""", re.VERBOSE)


class _Scanner:
    def __init__(self, text, line=1, col0=1):
        self.text = text
        self.toks = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                raise ParseError("unexpected character %r" % text[pos], *self._lc(pos, line, col0))
            if m.lastgroup != "ws":
                self.toks.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0
        self.line = line
        self.col0 = col0

    def _lc(self, pos, line, col0):
        before = self.text[:pos]
        nl = before.count("\n")
        if nl:
            return line + nl, pos - before.rfind("\n")
        return line, col0 + pos

    def where(self, tok=None):
        tok = tok or self.toks[self.i]
        return self._lc(tok[2], self.line, self.col0)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.next()
        if t[1] != value:
            raise ParseError("expected %r, found %r" % (value, t[1] or "end of input"), *self.where(t))
        return t

    def fail(self, msg, tok=None):
        raise ParseError(msg, *self.where(tok))


def parse_label(text) -> str:
    if text.startswith("d") and len(text) > 1:
        return DUAL + text[1:]
    return text


def _parse_rational(sc):
    t = sc.next()
    if t[0] != "num":
        sc.fail("expected a rational", t)
    num = t[1]
    if "/" in num and int(num.split("/")[1]) == 0:
        sc.fail("zero denominator", t)
    return Fraction(num)


def _parse_end(sc, nv_seen, allow_points=False):
    t = sc.next()
    if t[1] == "leg(":
        lt = sc.next()
        if lt[0] not in ("ident", "pt") and lt[1] not in ("empty", "strand"):
            sc.fail("expected a label", lt)
        sc.expect(")")
        return ("leg", parse_label(lt[1])), lt
    if t[0] == "vert":
        v, s = t[1][1:].split(".")
        v, s = int(v), int(s)
        if v < 1:
            sc.fail("vertices are numbered from 1", t)
        if s not in (0, 1, 2):
            sc.fail("bad slot %d (slots are 0, 1, 2)" % s, t)
        nv_seen.add(v)
        return ("v", v, s), t
    if allow_points and t[0] == "pt":
        return ("pt", int(t[1][1:])), t
    sc.fail("expected an edge end, found %r" % (t[1] or "end of input"), t)


def _edges_to_graph(sc, edges, vertices, point_labels=None):
    """Build a Graph from parsed edges; returns the graph."""
    g = Graph()
    vmap = {}
    for v in sorted(vertices):
        vmap[v] = g.new_vertex()
    used = {}
    for (a, ta), (b, tb) in edges:
        hs = []
        for end, tok in ((a, ta), (b, tb)):
            if end[0] == "leg":
                h = g.new_leg(end[1])
            elif end[0] == "pt":
                if point_labels is None or end[1] not in point_labels:
                    sc.fail("unknown attachment point p%d" % end[1], tok)
                key = ("pt", end[1])
                if key in used:
                    sc.fail("attachment point p%d used twice" % end[1], tok)
                h = g.new_leg(point_labels[end[1]])
                used[key] = h
            else:
                key = (end[1], end[2])
                if key in used:
                    sc.fail("slot v%d.%d used twice" % key, tok)
                h = vmap[end[1]][end[2]]
                used[key] = h
            hs.append(h)
        g.join(*hs)
    for v, trip in vmap.items():
        for s in range(3):
            if (v, s) not in used:
                raise ParseError("slot v%d.%d is not connected" % (v, s), *sc.where())
    if point_labels is not None:
        for p in point_labels:
            if ("pt", p) not in used:
                raise ParseError("attachment point p%d is not connected" % p, *sc.where())
    return g


def _parse_diagram(sc):
    t = sc.peek()
    if t[1] == "empty":
        sc.next()
        return Graph()
    if t[1] != "D[":
        sc.fail("expected 'D[' or 'empty', found %r" % (t[1] or "end of input"))
    sc.next()
    edges, verts = [], set()
    while True:
        a = _parse_end(sc, verts)
        sc.expect("-")
        b = _parse_end(sc, verts)
        edges.append((a, b))
        t = sc.next()
        if t[1] == "]":
            break
        if t[1] != ";":
            sc.fail("expected ';' or ']'", t)
    return _edges_to_graph(sc, edges, verts)


def _term(sc, sign):
    coef = Fraction(sign)
    t = sc.peek()
    if t[0] == "num":
        coef *= _parse_rational(sc)
        sc.expect("*")
    start = sc.peek()
    g = _parse_diagram(sc)
    try:
        s, d = g.canonical()
    except VertexlessLoopError as e:
        sc.fail(str(e), start)
    except DiagramError as e:
        sc.fail(str(e), start)
    return d, s * coef


def parse_sum(text, caps=DEFAULT_CAPS, line=1, col=1) -> DSum:
    """Parse a diagram sum; raises :class:`ParseError` with a position."""
    sc = _Scanner(text, line, col)
    terms = {}
    t = sc.peek()
    if t[1] == "0" and sc.toks[1][0] == "eof":
        return DSum({}, caps)
    sign = 1
    if t[1] in "+-" and t[0] == "sym" and t[1]:
        sc.next()
        sign = -1 if t[1] == "-" else 1
    while True:
        d, c = _term(sc, sign)
        if d is not None:
            terms[d] = terms.get(d, 0) + c
        t = sc.next()
        if t[0] == "eof":
            break
        if t[1] not in ("+", "-"):
            sc.fail("expected '+', '-' or end of input, found %r" % t[1], t)
        sign = -1 if t[1] == "-" else 1
    return DSum(terms, caps)


# --------------------------------------------------------------------------
# series and covariance files

def parse_series(text, caps=DEFAULT_CAPS) -> DSum:
    """One ``<rational><TAB><diagram>`` per line; ``#`` comments, blank lines."""
    total = {}
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "\t" not in line:
            raise ParseError("expected <rational><TAB><diagram>", ln, 1)
        rat, diag = line.split("\t", 1)
        sc = _Scanner(rat.strip(), ln, 1)
        if rat.strip().startswith("-"):
            sc.next()
            sg = -1
        else:
            sg = 1
        c = sg * _parse_rational(sc)
        if sc.peek()[0] != "eof":
            sc.fail("trailing text after coefficient")
        dsc = _Scanner(diag, ln, len(rat) + 2)
        g_start = dsc.peek()
        g = _parse_diagram(dsc)
        if dsc.peek()[0] != "eof":
            dsc.fail("trailing text after diagram")
        try:
            s, d = g.canonical()
        except DiagramError as e:
            dsc.fail(str(e), g_start)
        if s:
            total[d] = total.get(d, 0) + s * c
    return DSum(total, caps)


def format_series(s) -> str:
    lines = []
    for d, c in sorted(s.items(), key=lambda kv: (sum(x[0] for x in kv[0]), kv[0])):
        lines.append("%s\t%s" % (format_rational(c), format_diagram(d)))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_covariance(text):
    """Return ``(labels, matrix)``; the matrix must be square and symmetric."""
    rows = []
    labels = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if labels is None:
            labels = [x.strip() for x in line.split(",")]
            for lab in labels:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", lab):
                    raise ParseError("bad label %r" % lab, ln, raw.find(lab) + 1)
            if len(set(labels)) != len(labels):
                raise ParseError("repeated label", ln, 1)
            continue
        row = []
        for cell in re.split(r"[,\s]+", line):
            try:
                row.append(Fraction(cell))
            except (ValueError, ZeroDivisionError):
                raise ParseError("bad rational %r" % cell, ln, raw.find(cell) + 1) from None
        if len(row) != len(labels):
            raise ParseError("row has %d entries, expected %d" % (len(row), len(labels)), ln, 1)
        rows.append(row)
    if labels is None:
        raise ParseError("empty covariance file", 1, 1)
    if len(rows) != len(labels):
        raise ParseError("expected %d rows, found %d" % (len(labels), len(rows)), 1, 1)
    n = len(rows)
    for i in range(n):
        for j in range(i):
            if rows[i][j] != rows[j][i]:
                raise ParseError("covariance is not symmetric at (%s, %s)"
                                 % (labels[i], labels[j]), i + 2, 1)
    return labels, rows


# --------------------------------------------------------------------------
# skeleton diagrams

def parse_skeleton_graph(text, line=1, col=1):
    """Parse ``S[...]``; return ``(strands, graph)``.

    ``strands`` is the ordered list of ``(name, count)``; legs of the graph
    carry ``(name, position)`` labels with positions counted from 0.
    """
    sc = _Scanner(text, line, col)
    sc.expect("S[")
    strands = []
    point_labels = {}
    edges, verts = [], set()
    nxt = 1
    while True:
        t = sc.peek()
        if t[1] == "]":
            sc.next()
            break
        if t[1] == "strand":
            sc.next()
            nt = sc.next()
            if nt[0] != "ident":
                sc.fail("expected a strand name", nt)
            name = nt[1]
            if any(name == s for s, _ in strands):
                sc.fail("strand %r listed twice" % name, nt)
            sc.expect(":")
            k = 0
            while sc.peek()[0] == "pt":
                pt = sc.next()
                idx = int(pt[1][1:])
                if idx != nxt:
                    sc.fail("expected p%d (points are numbered in strand order)" % nxt, pt)
                point_labels[idx] = (name, k)
                nxt += 1
                k += 1
                if sc.peek()[1] == ",":
                    sc.next()
            strands.append((name, k))
        else:
            a = _parse_end(sc, verts, allow_points=True)
            sc.expect("-")
            b = _parse_end(sc, verts, allow_points=True)
            for end, tok in (a, b):
                if end[0] == "leg":
                    sc.fail("skeleton diagrams have no free legs", tok)
            edges.append((a, b))
        t = sc.next()
        if t[1] == "]":
            break
        if t[1] != ";":
            sc.fail("expected ';' or ']'", t)
    if sc.peek()[0] != "eof":
        sc.fail("trailing text")
    g = _edges_to_graph(sc, edges, verts, point_labels)
    return strands, g


def format_skeleton(strands, d) -> str:
    """Print a canonical skeleton diagram (legs labelled ``(strand, pos)``)."""
    number = {}
    parts = []
    nxt = 1
    for name, k in strands:
        pts = []
        for i in range(k):
            number[(name, i)] = nxt
            pts.append("p%d" % nxt)
            nxt += 1
        parts.append("strand %s: %s" % (name, ",".join(pts)) if pts else "strand %s:" % name)
    offset = 0
    for comp in d:
        if comp[0] == 0:
            a, b = comp[1]
            parts.append("p%d-p%d" % (number[a], number[b]))
            continue
        for t, e in enumerate(comp[2]):
            here = "v%d.%d" % (offset + t // 3 + 1, t % 3)
            if e[0] == 0:
                parts.append("p%d-%s" % (number[e[1]], here))
            elif e[1] > t:
                r = e[1]
                parts.append("%s-v%d.%d" % (here, offset + r // 3 + 1, r % 3))
        offset += comp[0]
    return "S[" + "; ".join(parts) + "]"
