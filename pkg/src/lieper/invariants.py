"""The universal invariant symmetric bilinear form V(k) = S^2(k) / k.S^2(k).

Coordinates on S^2(k) use the basis ``e_i v e_j`` (i <= j) in lexicographic
order, where ``x v y`` stands for ``x (x) y + y (x) x``.  In those
coordinates ``x v y`` has entry ``x_i y_j + x_j y_i`` at ``(i, j)`` for
``i < j`` and ``x_i y_i`` at ``(i, i)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement

from . import exact
from .errors import DimensionMismatch, InputNotComplementary, NotInvariant, NotMorphism
from .lie import (LieAlgebra, LinearMap, SymBilinearForm, is_automorphism,
                  is_derivation, is_invariant)


@dataclass(frozen=True)
class QuotientSpace:
    """Q^ambient_dim modulo the span of ``relation_basis``.

    Quotient coordinates are the non-pivot coordinates left after reducing
    against the RREF of the relations; the section puts a vector back on
    those coordinates.
    """

    ambient_dim: int
    relation_basis: tuple[tuple[Fraction, ...], ...]
    pivots: tuple[int, ...]

    @classmethod
    def of(cls, ambient_dim: int, relations: exact.Matrix) -> "QuotientSpace":
        rows, pivots = exact.rref(relations) if relations else ([], [])
        return cls(ambient_dim, tuple(tuple(r) for r in rows), tuple(pivots))

    @property
    def quotient_dim(self) -> int:
        return self.ambient_dim - len(self.pivots)

    @cached_property
    def free(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ambient_dim) if c not in piv]

    @cached_property
    def projection(self) -> LinearMap:
        rows = []
        for f in self.free:
            row = [Fraction(0)] * self.ambient_dim
            row[f] = Fraction(1)
            for rel, p in zip(self.relation_basis, self.pivots):
                if rel[f]:
                    row[p] -= rel[f]
            rows.append(row)
        if not rows:
            return LinearMap.zero(self.ambient_dim, 0)
        return LinearMap.from_rows(rows)

    @cached_property
    def section(self) -> LinearMap:
        if not self.free:
            return LinearMap.zero(0, self.ambient_dim)
        cols = []
        for f in self.free:
            col = [Fraction(0)] * self.ambient_dim
            col[f] = Fraction(1)
            cols.append(col)
        return LinearMap.from_rows(exact.transpose(cols))

    def project(self, v) -> list[Fraction]:
        if len(v) != self.ambient_dim:
            raise DimensionMismatch("vector does not live in the ambient space")
        if self.quotient_dim == 0:
            return []
        return self.projection(v)


def sym_coords(x, y) -> list[Fraction]:
    """Coordinates of x v y in the basis {e_i v e_j : i <= j}."""
    n = len(x)
    out = []
    for i, j in combinations_with_replacement(range(n), 2):
        out.append(x[i] * y[i] if i == j else x[i] * y[j] + x[j] * y[i])
    return out


def sym_index(n: int) -> list[tuple[int, int]]:
    return list(combinations_with_replacement(range(n), 2))


@dataclass(frozen=True)
class UniversalForm:
    algebra: LieAlgebra
    V: QuotientSpace

    @property
    def sym_square_dim(self) -> int:
        n = self.algebra.dim
        return n * (n + 1) // 2

    @property
    def dim(self) -> int:
        return self.V.quotient_dim

    @cached_property
    def kappa_u(self) -> SymBilinearForm:
        e = self.algebra.basis
        return SymBilinearForm.from_values(
            self.algebra.dim, self.dim,
            lambda i, j: self.V.project(sym_coords(e[i], e[j])))

    @property
    def relation_rank(self) -> int:
        return len(self.V.pivots)


def universal_form(L: LieAlgebra) -> UniversalForm:
    n = L.dim
    e = L.basis
    relations = []
    for k in range(n):
        for i, j in sym_index(n):
            # e_k.(e_i v e_j) = [e_k, e_i] v e_j + e_i v [e_k, e_j]
            a = sym_coords(L.bracket(e[k], e[i]), e[j])
            b = sym_coords(e[i], L.bracket(e[k], e[j]))
            rel = [x + y for x, y in zip(a, b)]
            if any(rel):
                relations.append(rel)
    return UniversalForm(L, QuotientSpace.of(n * (n + 1) // 2, relations))


def _form_as_map(beta: SymBilinearForm) -> exact.Matrix:
    """beta viewed as a linear map S^2(k) -> Q^d (columns indexed by i <= j)."""
    cols = [list(beta.table[i][j]) for i, j in sym_index(beta.algebra_dim)]
    return exact.transpose(cols) if cols else []


def factor_through(U: UniversalForm, beta: SymBilinearForm) -> LinearMap:
    """The unique linear map phi: V(k) -> W with phi o kappa_u == beta."""
    L = U.algebra
    if beta.algebra_dim != L.dim:
        raise DimensionMismatch("form lives on an algebra of different dimension")
    if not is_invariant(L, beta):
        raise NotInvariant("beta is not an invariant form")
    B = _form_as_map(beta)
    if U.dim == 0:
        phi = LinearMap.zero(0, beta.value_dim)
    else:
        phi = LinearMap.from_rows(exact.matmul(B, U.V.section.rows))
    # uniqueness is automatic (projection is onto); existence is checked here
    if U.dim:
        assert exact.matmul(phi.rows, U.V.projection.rows) == B
    else:
        assert exact.is_zero(B)
    return phi


def centroid(L: LieAlgebra) -> list[LinearMap]:
    """Basis of {phi in End(k) : phi ad(e_i) = ad(e_i) phi for all i}."""
    n = L.dim
    ads = [a.rows for a in L.ad_basis]
    # unknown phi[r][c] at position r*n + c
    eqs = []
    for A in ads:
        for r in range(n):
            for c in range(n):
                row = [Fraction(0)] * (n * n)
                # (phi A)[r][c] - (A phi)[r][c]
                for k in range(n):
                    if A[k][c]:
                        row[r * n + k] += A[k][c]
                    if A[r][k]:
                        row[k * n + c] -= A[r][k]
                if any(row):
                    eqs.append(row)
    basis = exact.nullspace(eqs, n * n) if eqs else [
        [Fraction(int(i == j)) for j in range(n * n)] for i in range(n * n)]
    return [LinearMap.from_rows([v[r * n:(r + 1) * n] for r in range(n)]) for v in basis]


def _sym_square_map(phi: LinearMap, derivation: bool) -> exact.Matrix:
    n = phi.source_dim
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    cols = []
    for i, j in sym_index(n):
        if derivation:
            a = sym_coords(phi(e[i]), e[j])
            b = sym_coords(e[i], phi(e[j]))
            cols.append([x + y for x, y in zip(a, b)])
        else:
            cols.append(sym_coords(phi(e[i]), phi(e[j])))
    return exact.transpose(cols)


def induced_map_on_V(U: UniversalForm, phi: LinearMap, mode: str = "auto") -> LinearMap:
    """V(phi) for an automorphism, or the induced action of a derivation.

    ``mode`` is ``"automorphism"``, ``"derivation"`` or ``"auto"`` (try
    automorphism first).
    """
    L = U.algebra
    if mode == "auto":
        if is_automorphism(L, phi):
            mode = "automorphism"
        elif is_derivation(L, phi):
            mode = "derivation"
        else:
            raise NotMorphism("map is neither an automorphism nor a derivation")
    elif mode == "automorphism":
        if not is_automorphism(L, phi):
            raise NotMorphism("map does not preserve brackets or is singular")
    elif mode == "derivation":
        if not is_derivation(L, phi):
            raise NotMorphism("map does not satisfy the Leibniz rule")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if U.dim == 0:
        return LinearMap.zero(0, 0)
    S = _sym_square_map(phi, derivation=(mode == "derivation"))
    P = U.V.projection.rows
    Vphi = exact.matmul(exact.matmul(P, S), U.V.section.rows)
    # well-definedness: V(phi) o P == P o S^2(phi)
    assert exact.matmul(Vphi, P) == exact.matmul(P, S)
    return LinearMap.from_rows(Vphi)


@dataclass(frozen=True)
class DecompositionReport:
    dims: tuple[int, ...]
    total_rank: int
    quotient_dim: int
    direct: bool
    exhaustive: bool

    @property
    def ok(self) -> bool:
        return self.direct and self.exhaustive

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "total_rank": self.total_rank,
                "quotient_dim": self.quotient_dim, "direct": self.direct,
                "exhaustive": self.exhaustive}


def verify_decomposition(U: UniversalForm, radical_basis, isotypic_bases) -> DecompositionReport:
    """Check V(k) = V_0 + V_1 + ... + V_r is a direct sum exhausting V(k).

    V_0 = span kappa_u(r, k); V_i = span kappa_u(s_i, s_i) for each supplied
    isotypic block.
    """
    L = U.algebra
    n = L.dim
    rad = [[exact.scalar(x) for x in v] for v in radical_basis]
    blocks = [[[exact.scalar(x) for x in v] for v in b] for b in isotypic_bases]
    everything = rad + [v for b in blocks for v in b]
    if any(len(v) != n for v in everything):
        raise DimensionMismatch("subspace vectors must have length dim(k)")
    if len(everything) != n or exact.rank(everything) != n:
        raise InputNotComplementary("radical and semisimple blocks must form a basis of k")
    k = U.kappa_u
    spaces = [[k(r, e) for r in rad for e in L.basis]]
    for b in blocks:
        spaces.append([k(x, y) for x in b for y in b])
    dims = tuple(exact.rank(s) if s and U.dim else 0 for s in spaces)
    union = [v for s in spaces for v in s]
    total = exact.rank(union) if union and U.dim else 0
    return DecompositionReport(dims, total, U.dim, total == sum(dims), total == U.dim)
