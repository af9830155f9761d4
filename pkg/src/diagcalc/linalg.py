"""Exact rational linear algebra: sparse row reduction, inversion, signature."""
from __future__ import annotations

from fractions import Fraction
from math import lcm


class SingularMatrixError(ArithmeticError):
    pass


class RowReducer:
    """Incremental reduced row echelon form over Q with sparse dict rows.

    Rows are ``{column: Fraction}``.  The pivot of a new row is its largest
    column index, so the surviving (non-pivot) columns are the small ones.
    Every stored row is fully reduced against every other pivot, which
    makes :meth:`reduce` a single pass.
    """

    def __init__(self):
        self.rows = {}

    @property
    def rank(self):
        return len(self.rows)

    @property
    def pivots(self):
        return set(self.rows)

    def reduce(self, vec):
        v = {k: Fraction(c) for k, c in vec.items() if c}
        rows = self.rows
        for p in [k for k in v if k in rows]:
            c = v.get(p)
            if not c:
                continue
            for k, r in rows[p].items():
                nv = v.get(k, 0) - c * r
                if nv:
                    v[k] = nv
                else:
                    v.pop(k, None)
        return v

    def add(self, vec) -> bool:
        """Insert a relation; return True if it raised the rank."""
        v = self.reduce(vec)
        if not v:
            return False
        p = max(v)
        inv = 1 / v[p]
        v = {k: c * inv for k, c in v.items()}
        for q, row in self.rows.items():
            c = row.get(p)
            if c:
                for k, r in v.items():
                    nv = row.get(k, 0) - c * r
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
        self.rows[p] = v
        return True


def _to_integer_rows(m):
    den = 1
    for row in m:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    return [[int(Fraction(x) * den) for x in row] for row in m], den


def inverse(m):
    """Inverse of a square rational matrix by fraction-free Gauss-Jordan.

    The matrix is scaled to integers and reduced with Bareiss' exact
    divisions; at the end the left block is ``det * I`` and the right block
    is the adjugate, so only one rational division per entry happens.
    """
    n = len(m)
    if n == 0:
        return []
    a, den = _to_integer_rows(m)
    for i in range(n):
        a[i] = a[i] + [1 if j == i else 0 for j in range(n)]
    width = 2 * n
    prev = 1
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        if p != k:
            a[k], a[p] = a[p], a[k]
        akk = a[k][k]
        rk = a[k]
        for i in range(n):
            if i == k:
                continue
            ri = a[i]
            aik = ri[k]
            for j in range(width):
                if j != k:
                    ri[j] = (akk * ri[j] - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    # every diagonal entry now equals the (row-swapped) determinant
    d = a[0][0]
    return [[Fraction(a[i][n + j] * den, d) for j in range(n)] for i in range(n)]


def inverse_gauss_jordan(m):
    """Plain Fraction Gauss-Jordan inverse, kept as an independent check."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(m)]
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k] != 0), None)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        a[k], a[p] = a[p], a[k]
        inv = 1 / a[k][k]
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                c = a[i][k]
                a[i] = [x - c * y for x, y in zip(a[i], a[k])]
    return [row[n:] for row in a]


def matmul(a, b):
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def transpose(a):
    return [list(r) for r in zip(*a)] if a else []


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def is_symmetric(m) -> bool:
    n = len(m)
    return all(m[i][j] == m[j][i] for i in range(n) for j in range(n))


def signature(m):
    """Return ``(positive, negative)`` inertia of a symmetric rational matrix.

    Congruence diagonalisation: pivot on a nonzero diagonal entry, or first
    make one by adding a row/column to another (Sylvester's law of inertia
    guarantees the counts do not depend on the route).
    """
    if not is_symmetric(m):
        raise ValueError("signature needs a symmetric matrix")
    a = [[Fraction(x) for x in row] for row in m]
    pos = neg = 0
    while a:
        n = len(a)
        k = next((i for i in range(n) if a[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in range(n) for j in range(i + 1, n)
                         if a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # row_i += row_j and col_i += col_j: new a_ii = 2 a_ij != 0
            for t in range(n):
                a[i][t] += a[j][t]
            for t in range(n):
                a[t][i] += a[t][j]
            k = i
        piv = a[k][k]
        if piv > 0:
            pos += 1
        else:
            neg += 1
        rest = [i for i in range(n) if i != k]
        a = [[a[i][j] - a[i][k] * a[k][j] / piv for j in rest] for i in rest]
    return pos, neg
