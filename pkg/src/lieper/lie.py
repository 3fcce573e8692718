"""Finite-dimensional Lie algebras over the rationals.

A :class:`LieAlgebra` is stored through its structure constants
``c[i][j][k]`` with ``[e_i, e_j] = sum_k c[i][j][k] e_k``.  All structural
predicates below are exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from . import exact
from .errors import DimensionMismatch, InvalidLieAlgebra

Vector = list[Fraction]


def _vec(x, n: int) -> Vector:
    if len(x) != n:
        raise DimensionMismatch(f"expected a vector of length {n}, got {len(x)}")
    return [exact.scalar(v) if not isinstance(v, Fraction) else v for v in x]


@dataclass(frozen=True)
class LinearMap:
    """A matrix acting on column vectors: ``target_dim x source_dim``."""

    source_dim: int
    target_dim: int
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if len(self.matrix) != self.target_dim or any(
            len(row) != self.source_dim for row in self.matrix
        ):
            raise DimensionMismatch("matrix shape does not match declared dims")

    @classmethod
    def from_rows(cls, rows) -> "LinearMap":
        m = exact.to_matrix(rows)
        ncols = len(m[0]) if m else 0
        return cls(ncols, len(m), tuple(tuple(r) for r in m))

    @classmethod
    def identity(cls, n: int) -> "LinearMap":
        return cls.from_rows(exact.identity(n))

    @classmethod
    def zero(cls, source_dim: int, target_dim: int) -> "LinearMap":
        return cls(source_dim, target_dim,
                   tuple((Fraction(0),) * source_dim for _ in range(target_dim)))

    @property
    def rows(self) -> exact.Matrix:
        return [list(r) for r in self.matrix]

    def __call__(self, v) -> Vector:
        return exact.matvec(self.rows, _vec(v, self.source_dim))

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.target_dim != self.source_dim:
            raise DimensionMismatch("cannot compose maps of incompatible shapes")
        if self.target_dim == 0 or other.source_dim == 0:
            return LinearMap.zero(other.source_dim, self.target_dim)
        return LinearMap.from_rows(exact.matmul(self.rows, other.rows))

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap.from_rows(exact.sub(self.rows, other.rows))

    def __add__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap.from_rows(exact.add(self.rows, other.rows))

    def scaled(self, c) -> "LinearMap":
        return LinearMap.from_rows(exact.scale(c, self.rows))

    def inverse(self) -> "LinearMap":
        return LinearMap.from_rows(exact.inverse(self.rows))

    def is_square(self) -> bool:
        return self.source_dim == self.target_dim

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix],
                        dtype=float).reshape(self.target_dim, self.source_dim)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.matrix]


@dataclass(frozen=True)
class SymBilinearForm:
    """Symmetric bilinear form on an ``n``-dimensional algebra with values in Q^d."""

    algebra_dim: int
    value_dim: int
    table: tuple[tuple[tuple[Fraction, ...], ...], ...]

    def __post_init__(self):
        n, d = self.algebra_dim, self.value_dim
        if len(self.table) != n or any(len(r) != n for r in self.table):
            raise DimensionMismatch("form table must be n x n")
        for i, j in product(range(n), repeat=2):
            if len(self.table[i][j]) != d:
                raise DimensionMismatch("form values must have length value_dim")
            if self.table[i][j] != self.table[j][i]:
                raise ValueError("bilinear form is not symmetric")

    @classmethod
    def from_values(cls, n: int, d: int, value) -> "SymBilinearForm":
        """Build from a callable ``value(i, j) -> length-d sequence``."""
        table = tuple(
            tuple(tuple(exact.scalar(x) for x in value(i, j)) for j in range(n))
            for i in range(n)
        )
        return cls(n, d, table)

    @classmethod
    def scalar(cls, rows) -> "SymBilinearForm":
        m = exact.to_matrix(rows)
        n = len(m)
        return cls.from_values(n, 1, lambda i, j: (m[i][j],))

    @classmethod
    def zero(cls, n: int, d: int = 1) -> "SymBilinearForm":
        return cls.from_values(n, d, lambda i, j: (0,) * d)

    def __call__(self, x, y) -> Vector:
        n, d = self.algebra_dim, self.value_dim
        x, y = _vec(x, n), _vec(y, n)
        out = [Fraction(0)] * d
        for i in range(n):
            if not x[i]:
                continue
            for j in range(n):
                if not y[j]:
                    continue
                c = x[i] * y[j]
                for k, t in enumerate(self.table[i][j]):
                    if t:
                        out[k] += c * t
        return out

    def scaled(self, c) -> "SymBilinearForm":
        c = exact.scalar(c)
        return SymBilinearForm.from_values(
            self.algebra_dim, self.value_dim,
            lambda i, j: tuple(c * t for t in self.table[i][j]))

    def __add__(self, other: "SymBilinearForm") -> "SymBilinearForm":
        return SymBilinearForm.from_values(
            self.algebra_dim, self.value_dim,
            lambda i, j: tuple(a + b for a, b in zip(self.table[i][j], other.table[i][j])))

    def compose(self, phi: LinearMap) -> "SymBilinearForm":
        """Post-compose the values with a linear map ``phi: Q^d -> Q^e``."""
        if phi.source_dim != self.value_dim:
            raise DimensionMismatch("value map has wrong source dimension")
        return SymBilinearForm.from_values(
            self.algebra_dim, phi.target_dim, lambda i, j: phi(self.table[i][j]))

    def is_zero(self) -> bool:
        return all(t == 0 for row in self.table for v in row for t in v)

    def to_numpy(self) -> np.ndarray:
        return np.array(
            [[[float(t) for t in v] for v in row] for row in self.table], dtype=float
        ).reshape(self.algebra_dim, self.algebra_dim, self.value_dim)

    def to_json(self) -> list:
        return [[[str(t) for t in v] for v in row] for row in self.table]


@dataclass(frozen=True)
class LieAlgebra:
    dim: int
    basis_names: tuple[str, ...]
    c: tuple[tuple[tuple[Fraction, ...], ...], ...] = field(repr=False)

    def __post_init__(self):
        n = self.dim
        if n <= 0:
            raise InvalidLieAlgebra("dimension must be positive")
        if len(self.basis_names) != n:
            raise InvalidLieAlgebra("need one basis name per dimension")
        if len(self.c) != n or any(len(r) != n or any(len(v) != n for v in r)
                                   for r in self.c):
            raise InvalidLieAlgebra("structure constants must be n x n x n")
        for i, j in product(range(n), repeat=2):
            if any(a != -b for a, b in zip(self.c[i][j], self.c[j][i])):
                raise InvalidLieAlgebra(f"bracket not antisymmetric on ({i},{j})")
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    if any(self._jacobiator(i, j, k)):
                        raise InvalidLieAlgebra(
                            f"Jacobi identity fails on basis triple ({i},{j},{k})")

    def _jacobiator(self, i, j, k) -> Vector:
        e = self.basis
        out = [Fraction(0)] * self.dim
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            t = self.bracket(e[a], self.bracket(e[b], e[c]))
            out = [x + y for x, y in zip(out, t)]
        return out

    @classmethod
    def from_brackets(cls, basis_names: Sequence[str], brackets) -> "LieAlgebra":
        """``brackets`` maps ``(i, j)`` with ``i < j`` to ``{k: coefficient}``."""
        n = len(basis_names)
        c = [[[Fraction(0)] * n for _ in range(n)] for _ in range(n)]
        for (i, j), terms in brackets.items():
            if not (0 <= i < j < n):
                raise InvalidLieAlgebra(f"bracket pair ({i},{j}) must satisfy 0 <= i < j < n")
            for k, coeff in terms.items():
                if not 0 <= k < n:
                    raise InvalidLieAlgebra(f"bracket index {k} out of range")
                v = exact.scalar(coeff)
                c[i][j][k] = v
                c[j][i][k] = -v
        return cls(n, tuple(basis_names),
                   tuple(tuple(tuple(v) for v in row) for row in c))

    @cached_property
    def basis(self) -> list[Vector]:
        return [[Fraction(int(i == j)) for j in range(self.dim)] for i in range(self.dim)]

    @cached_property
    def structure_array(self) -> np.ndarray:
        """Float copy of the structure constants, shape (n, n, n)."""
        return np.array([[[float(x) for x in v] for v in r] for r in self.c])

    def bracket(self, x, y) -> Vector:
        n = self.dim
        x, y = _vec(x, n), _vec(y, n)
        out = [Fraction(0)] * n
        for i in range(n):
            if not x[i]:
                continue
            for j in range(n):
                if not y[j] or i == j:
                    continue
                s = x[i] * y[j]
                for k, ck in enumerate(self.c[i][j]):
                    if ck:
                        out[k] += s * ck
        return out

    def ad(self, x) -> LinearMap:
        x = _vec(x, self.dim)
        cols = [self.bracket(x, e) for e in self.basis]
        return LinearMap.from_rows(exact.transpose(cols))

    @cached_property
    def ad_basis(self) -> list[LinearMap]:
        return [self.ad(e) for e in self.basis]

    def derived_algebra(self) -> exact.Matrix:
        """Basis (rows) of [k, k]."""
        n = self.dim
        vecs = [self.bracket(self.basis[i], self.basis[j])
                for i in range(n) for j in range(i + 1, n)]
        return exact.row_space_basis(vecs)

    def to_json(self) -> dict:
        brackets = []
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                terms = [[k, str(v)] for k, v in enumerate(self.c[i][j]) if v]
                if terms:
                    brackets.append([i, j, terms])
        return {"dim": self.dim, "basis": list(self.basis_names), "brackets": brackets}

    @classmethod
    def from_json(cls, data: dict) -> "LieAlgebra":
        try:
            n = int(data["dim"])
            names = data.get("basis") or [f"e{i}" for i in range(n)]
            brackets = {}
            for entry in data.get("brackets", []):
                i, j, terms = entry
                if (i, j) in brackets:
                    raise InvalidLieAlgebra(f"duplicate bracket pair ({i},{j})")
                brackets[(int(i), int(j))] = {int(k): v for k, v in terms}
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidLieAlgebra):
                raise
            raise InvalidLieAlgebra(f"malformed Lie algebra JSON: {exc}") from exc
        if len(names) != n:
            raise InvalidLieAlgebra("basis list length differs from dim")
        return cls.from_brackets(names, brackets)


def load_algebra(path) -> LieAlgebra:
    with open(path) as fh:
        return LieAlgebra.from_json(json.load(fh))


def bracket(L: LieAlgebra, x, y) -> Vector:
    return L.bracket(x, y)


def killing_form(L: LieAlgebra) -> SymBilinearForm:
    ads = [a.rows for a in L.ad_basis]
    n = L.dim

    def value(i, j):
        prod = exact.matmul(ads[i], ads[j])
        return (sum((prod[k][k] for k in range(n)), Fraction(0)),)

    return SymBilinearForm.from_values(n, 1, value)


def is_invariant(L: LieAlgebra, kappa: SymBilinearForm) -> bool:
    """kappa([x, y], z) == kappa(x, [y, z]) on every basis triple."""
    if kappa.algebra_dim != L.dim:
        raise DimensionMismatch("form and algebra dimensions differ")
    e = L.basis
    for i, j, k in product(range(L.dim), repeat=3):
        if kappa(L.bracket(e[i], e[j]), e[k]) != kappa(e[i], L.bracket(e[j], e[k])):
            return False
    return True


def is_derivation(L: LieAlgebra, D: LinearMap) -> bool:
    if D.source_dim != L.dim or D.target_dim != L.dim:
        raise DimensionMismatch("derivation must be an n x n map")
    e = L.basis
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            lhs = D(L.bracket(e[i], e[j]))
            rhs = [a + b for a, b in zip(L.bracket(D(e[i]), e[j]),
                                         L.bracket(e[i], D(e[j])))]
            if lhs != rhs:
                return False
    return True


def is_automorphism(L: LieAlgebra, phi: LinearMap) -> bool:
    if phi.source_dim != L.dim or phi.target_dim != L.dim:
        raise DimensionMismatch("automorphism must be an n x n map")
    if exact.rank(phi.rows) != L.dim:
        return False
    e = L.basis
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            if phi(L.bracket(e[i], e[j])) != L.bracket(phi(e[i]), phi(e[j])):
                return False
    return True


def radical(L: LieAlgebra) -> exact.Matrix:
    """Solvable radical as the Killing-orthogonal complement of [k, k]."""
    B = killing_form(L)
    derived = L.derived_algebra()
    if not derived:
        return [list(e) for e in L.basis]
    n = L.dim
    gram = [[B.table[i][j][0] for j in range(n)] for i in range(n)]
    # rows: constraints x . (gram @ d) = 0 for each d in [k,k]
    constraints = [exact.matvec(gram, d) for d in derived]
    return exact.row_space_basis(exact.nullspace(constraints, n))


def is_ideal(L: LieAlgebra, basis: exact.Matrix) -> bool:
    if not basis:
        return True
    for e in L.basis:
        for v in basis:
            if not exact.in_span(basis, L.bracket(e, v)):
                return False
    return True


# -- a small library of algebras used across the toolkit ----------------------

def su2() -> LieAlgebra:
    """Imaginary quaternions: [I, J] = 2K and cyclic."""
    return LieAlgebra.from_brackets(
        ["I", "J", "K"], {(0, 1): {2: 2}, (1, 2): {0: 2}, (0, 2): {1: -2}})


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra.from_brackets([f"x{i}" for i in range(n)], {})


def gl(n: int) -> LieAlgebra:
    """gl_n with basis E_ab in row-major order."""
    idx = [(a, b) for a in range(n) for b in range(n)]
    pos = {p: k for k, p in enumerate(idx)}
    brackets = {}
    for i, (a, b) in enumerate(idx):
        for j, (c, d) in enumerate(idx):
            if j <= i:
                continue
            terms: dict[int, int] = {}
            # [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
            if b == c:
                terms[pos[(a, d)]] = terms.get(pos[(a, d)], 0) + 1
            if d == a:
                terms[pos[(c, b)]] = terms.get(pos[(c, b)], 0) - 1
            terms = {k: v for k, v in terms.items() if v}
            if terms:
                brackets[(i, j)] = terms
    return LieAlgebra.from_brackets([f"E{a + 1}{b + 1}" for a, b in idx], brackets)


def sl2() -> LieAlgebra:
    """sl_2(R) with basis H, E, F."""
    return LieAlgebra.from_brackets(
        ["H", "E", "F"], {(0, 1): {1: 2}, (0, 2): {2: -2}, (1, 2): {0: 1}})


def realification(L: LieAlgebra) -> LieAlgebra:
    """The complex algebra L (x) C viewed as a real algebra: basis e_k, i*e_k."""
    n = L.dim
    names = list(L.basis_names) + [f"i{nm}" for nm in L.basis_names]
    brackets = {}
    for a in range(2 * n):
        for b in range(a + 1, 2 * n):
            i, ri = a % n, a >= n
            j, rj = b % n, b >= n
            base = L.c[i][j]
            terms = {}
            for k, v in enumerate(base):
                if not v:
                    continue
                if ri and rj:
                    terms[k] = -v
                elif ri or rj:
                    terms[k + n] = v
                else:
                    terms[k] = v
            if terms:
                brackets[(a, b)] = terms
    return LieAlgebra.from_brackets(names, brackets)


def sl2c_real() -> LieAlgebra:
    return realification(sl2())


def direct_sum(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    n, m = a.dim, b.dim
    names = [f"{x}_1" for x in a.basis_names] + [f"{x}_2" for x in b.basis_names]
    brackets = {}
    for i in range(n):
        for j in range(i + 1, n):
            t = {k: v for k, v in enumerate(a.c[i][j]) if v}
            if t:
                brackets[(i, j)] = t
    for i in range(m):
        for j in range(i + 1, m):
            t = {k + n: v for k, v in enumerate(b.c[i][j]) if v}
            if t:
                brackets[(i + n, j + n)] = t
    return LieAlgebra.from_brackets(names, brackets)


BUILTIN = {
    "su2": su2,
    "sl2": sl2,
    "sl2c": sl2c_real,
    "gl2": lambda: gl(2),
    "su2+su2": lambda: direct_sum(su2(), su2()),
    "abelian3": lambda: abelian(3),
}
