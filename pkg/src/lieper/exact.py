"""Exact rational and integer linear algebra.

Matrices are plain lists of rows of :class:`fractions.Fraction`.  Everything
here is exact; no tolerances anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence

Matrix = list[list[Fraction]]


def scalar(value) -> Fraction:
    """Parse an int, Fraction or a ``"p/q"`` string into a reduced Fraction.

    Floats are rejected: they would silently smuggle rounding into exact code.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


def to_matrix(rows: Iterable[Iterable]) -> Matrix:
    return [[scalar(x) for x in row] for row in rows]


def zeros(m: int, n: int) -> Matrix:
    return [[Fraction(0)] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    out = zeros(n, n)
    for i in range(n):
        out[i][i] = Fraction(1)
    return out


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    if inner == 0:
        return [[] for _ in a]
    cols = len(b[0])
    out = []
    for row in a:
        if len(row) != inner:
            raise ValueError("shape mismatch in matmul")
        acc = [Fraction(0)] * cols
        for k, x in enumerate(row):
            if x:
                bk = b[k]
                for j in range(cols):
                    if bk[j]:
                        acc[j] += x * bk[j]
        out.append(acc)
    return out


def matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    out = []
    for row in a:
        if len(row) != len(v):
            raise ValueError("shape mismatch in matvec")
        out.append(sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)))
    return out


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c, a: Matrix) -> Matrix:
    c = Fraction(c)
    return [[c * x for x in row] for row in a]


def is_zero(a: Matrix) -> bool:
    return all(x == 0 for row in a for x in row)


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(row) for row in a]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        if pv != 1:
            m[r] = [x / pv for x in m[r]]
        prow = m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], prow)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def nullspace(a: Matrix, ncols: int | None = None) -> Matrix:
    """Basis (as rows) of {x : a x = 0}."""
    if ncols is None:
        ncols = len(a[0]) if a else 0
    rows, pivots = rref(a) if a else ([], [])
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Sequence[Fraction]) -> list[Fraction] | None:
    """One solution of a x = b, or None if the system is inconsistent."""
    ncols = len(a[0]) if a else 0
    aug = [list(row) + [Fraction(bi)] for row, bi in zip(a, b)]
    rows, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(rows, pivots):
        x[p] = row[ncols]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(row) + e for row, e in zip(a, identity(n))]
    rows, pivots = rref(aug)
    if pivots[:n] != list(range(n)) or len(rows) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in rows]


def row_space_basis(vectors: Matrix) -> Matrix:
    return rref(vectors)[0] if vectors else []


def in_span(vectors: Matrix, v: Sequence[Fraction]) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    return rank(vectors + [list(v)]) == rank(vectors)


# -- integer lattices ---------------------------------------------------------

def clear_denominators(row: Sequence[Fraction]) -> list[int]:
    den = 1
    for x in row:
        den = lcm(den, Fraction(x).denominator)
    return [int(Fraction(x) * den) for x in row]


def hermite_normal_form(a: list[list[int]]) -> tuple[list[list[int]], list[list[int]]]:
    """Row-style Hermite normal form by unimodular row operations.

    Returns ``(h, u)`` with ``u @ a == h``, ``u`` unimodular, ``h`` in row
    echelon form with positive pivots and entries above each pivot reduced
    into ``[0, pivot)``.  Zero rows of ``h`` sit at the bottom.
    """
    m = len(a)
    n = len(a[0]) if m else 0
    h = [list(map(int, row)) for row in a]
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(n):
        if r == m:
            break
        # gcd-combine all rows below r into row r
        for i in range(r + 1, m):
            if h[i][c] == 0:
                continue
            x, y = h[r][c], h[i][c]
            g, s, t = _xgcd(x, y)
            # [s t; -y/g x/g] is unimodular
            p, q = -y // g, x // g
            hr, hi = h[r], h[i]
            h[r] = [s * e + t * f for e, f in zip(hr, hi)]
            h[i] = [p * e + q * f for e, f in zip(hr, hi)]
            ur, ui = u[r], u[i]
            u[r] = [s * e + t * f for e, f in zip(ur, ui)]
            u[i] = [p * e + q * f for e, f in zip(ur, ui)]
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-e for e in h[r]]
            u[r] = [-e for e in u[r]]
        piv = h[r][c]
        for i in range(r):
            f = h[i][c] // piv
            if f:
                h[i] = [e - f * g for e, g in zip(h[i], h[r])]
                u[i] = [e - f * g for e, g in zip(u[i], u[r])]
        r += 1
    return h, u


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def integer_kernel(a: Matrix, m: int) -> list[list[int]]:
    """A Z-basis of {n in Z^m : sum_i n_i * a[i] = 0} (a has m rows).

    Rows of ``a`` are rational; each column is scaled to integers first,
    which does not change the kernel.
    """
    if m == 0:
        return []
    ncols = len(a[0]) if a else 0
    cols = []
    for j in range(ncols):
        col = clear_denominators([a[i][j] for i in range(m)])
        cols.append(col)
    ints = [[cols[j][i] for j in range(ncols)] for i in range(m)]
    h, u = hermite_normal_form(ints)
    return [u[i] for i in range(m) if all(e == 0 for e in h[i])]


def lattice_basis(vectors: Matrix) -> Matrix:
    """A Z-basis of the group generated by rational row vectors."""
    if not vectors:
        return []
    den = 1
    for row in vectors:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    ints = [[int(Fraction(x) * den) for x in row] for row in vectors]
    h, _ = hermite_normal_form(ints)
    return [[Fraction(e, den) for e in row] for row in h if any(row)]


def content_gcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g
