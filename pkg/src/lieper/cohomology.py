"""Low-degree Chevalley-Eilenberg cochains with trivial coefficients.

A p-cochain is stored by its values on increasing basis index tuples.  The
differential uses

    (dc)(x_0, ..., x_p) = sum_{i<j} (-1)^(i+j) c([x_i, x_j], x_0, ..^i..^j.., x_p)

so on 1-cochains ``(d lam)(x, y) = -lam([x, y])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Callable

import numpy as np

from . import exact
from .errors import DimensionMismatch, NotDerivation, NotInvariant, NotSkew
from .lie import LieAlgebra, LinearMap, SymBilinearForm, is_derivation, is_invariant

MAX_DEGREE = 3


def _sort_sign(idx: tuple[int, ...]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``idx``; 0 if an index repeats."""
    if len(set(idx)) < len(idx):
        return 0, idx
    sign = 1
    arr = list(idx)
    for i in range(len(arr)):
        for j in range(len(arr) - 1 - i):
            if arr[j] > arr[j + 1]:
                arr[j], arr[j + 1] = arr[j + 1], arr[j]
                sign = -sign
    return sign, tuple(arr)


@dataclass(frozen=True)
class Cochain:
    degree: int
    algebra_dim: int
    value_dim: int
    values: tuple[tuple[Fraction, ...], ...]  # indexed like combinations(range(n), p)

    @classmethod
    def from_function(cls, p: int, n: int, d: int,
                      f: Callable[[tuple[int, ...]], object]) -> "Cochain":
        vals = tuple(tuple(exact.scalar(x) if not isinstance(x, Fraction) else x
                           for x in f(idx))
                     for idx in combinations(range(n), p))
        if any(len(v) != d for v in vals):
            raise DimensionMismatch("cochain values must have length value_dim")
        return cls(p, n, d, vals)

    @classmethod
    def zero(cls, p: int, n: int, d: int = 1) -> "Cochain":
        return cls.from_function(p, n, d, lambda idx: (0,) * d)

    @classmethod
    def from_component_vectors(cls, p: int, n: int, comps: list[list[Fraction]]) -> "Cochain":
        """Inverse of :meth:`component`: one coordinate vector per value dimension."""
        d = len(comps)
        size = len(_tuples(n, p))
        vals = tuple(tuple(comps[k][t] for k in range(d)) for t in range(size))
        return cls(p, n, d, vals)

    def component(self, k: int) -> list[Fraction]:
        return [v[k] for v in self.values]

    def on_basis(self, idx: tuple[int, ...]) -> tuple[Fraction, ...]:
        sign, key = _sort_sign(tuple(idx))
        if sign == 0:
            return (Fraction(0),) * self.value_dim
        v = self.values[_index(self.algebra_dim, self.degree)[key]]
        return v if sign > 0 else tuple(-x for x in v)

    def __call__(self, *vectors) -> list[Fraction]:
        if len(vectors) != self.degree:
            raise DimensionMismatch(f"a {self.degree}-cochain takes {self.degree} arguments")
        out = [Fraction(0)] * self.value_dim
        supports = [[(i, x) for i, x in enumerate(v) if x] for v in vectors]
        for combo in product(*supports):
            coeff = Fraction(1)
            for _, x in combo:
                coeff *= x
            val = self.on_basis(tuple(i for i, _ in combo))
            for k, t in enumerate(val):
                if t:
                    out[k] += coeff * t
        return out

    def __add__(self, other: "Cochain") -> "Cochain":
        return Cochain(self.degree, self.algebra_dim, self.value_dim,
                       tuple(tuple(a + b for a, b in zip(u, v))
                             for u, v in zip(self.values, other.values)))

    def scaled(self, c) -> "Cochain":
        c = exact.scalar(c)
        return Cochain(self.degree, self.algebra_dim, self.value_dim,
                       tuple(tuple(c * a for a in u) for u in self.values))

    def is_zero(self) -> bool:
        return all(x == 0 for v in self.values for x in v)

    def is_alternating(self) -> bool:
        """Check antisymmetry by re-evaluating on every ordered index tuple."""
        n, p = self.algebra_dim, self.degree
        for idx in product(range(n), repeat=p):
            sign, key = _sort_sign(idx)
            val = self.on_basis(idx)
            if sign == 0:
                if any(val):
                    return False
                continue
            base = self.values[_index(n, p)[key]]
            if tuple(sign * x for x in base) != val:
                return False
        return True

    def to_numpy(self) -> np.ndarray:
        """Dense float array of shape (n,)*p + (d,)."""
        n, p, d = self.algebra_dim, self.degree, self.value_dim
        arr = np.zeros((n,) * p + (d,))
        for idx in product(range(n), repeat=p):
            arr[idx] = [float(x) for x in self.on_basis(idx)]
        return arr

    def to_json(self) -> dict:
        return {"degree": self.degree, "values": {
            ",".join(map(str, idx)): [str(x) for x in v]
            for idx, v in zip(_tuples(self.algebra_dim, self.degree), self.values) if any(v)}}


@lru_cache(maxsize=None)
def _tuples(n: int, p: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), p))


@lru_cache(maxsize=None)
def _index(n: int, p: int) -> dict[tuple[int, ...], int]:
    return {t: k for k, t in enumerate(_tuples(n, p))}


def ce_differential(c: Cochain, L: LieAlgebra) -> Cochain:
    if c.algebra_dim != L.dim:
        raise DimensionMismatch("cochain and algebra dimensions differ")
    p = c.degree
    if p > MAX_DEGREE:
        raise ValueError(f"differential only implemented for degree <= {MAX_DEGREE}")
    e = L.basis
    d = c.value_dim

    def value(idx):
        out = [Fraction(0)] * d
        for a, b in combinations(range(p + 1), 2):
            br = L.bracket(e[idx[a]], e[idx[b]])
            if not any(br):
                continue
            rest = [e[idx[k]] for k in range(p + 1) if k not in (a, b)]
            val = c(br, *rest)
            s = -1 if (a + b) % 2 else 1
            out = [o + s * v for o, v in zip(out, val)]
        return out

    return Cochain.from_function(p + 1, L.dim, d, value)


@lru_cache(maxsize=32)
def _differential_matrix_cached(L: LieAlgebra, p: int) -> tuple[tuple[Fraction, ...], ...]:
    n = L.dim
    cols = []
    for t in range(len(_tuples(n, p))):
        unit = [[Fraction(int(k == t))] for k in range(len(_tuples(n, p)))]
        basis_cochain = Cochain(p, n, 1, tuple(tuple(u) for u in unit))
        cols.append(ce_differential(basis_cochain, L).component(0))
    rows = exact.transpose(cols) if cols else []
    return tuple(tuple(r) for r in rows)


def differential_matrix(L: LieAlgebra, p: int) -> exact.Matrix:
    """Matrix of d: C^p -> C^(p+1) for scalar cochains in the increasing-tuple basis."""
    return [list(r) for r in _differential_matrix_cached(L, p)]


def cartan_map(L: LieAlgebra, kappa: SymBilinearForm) -> Cochain:
    """C(kappa)(x, y, z) = kappa([x, y], z), asserted closed."""
    if not is_invariant(L, kappa):
        raise NotInvariant("Cartan map needs an invariant form")
    e = L.basis
    C = Cochain.from_function(
        3, L.dim, kappa.value_dim,
        lambda idx: kappa(L.bracket(e[idx[0]], e[idx[1]]), e[idx[2]]))
    assert is_closed(C, L)
    return C


def is_closed(c: Cochain, L: LieAlgebra) -> bool:
    return ce_differential(c, L).is_zero()


@dataclass(frozen=True)
class NotExact:
    """Certificate that d(eta) = target has no solution.

    ``component`` is the first value coordinate whose augmented system has
    larger rank than the coefficient matrix.
    """

    component: int
    matrix_rank: int
    augmented_rank: int

    def to_json(self) -> dict:
        return {"exact": False, "component": self.component,
                "matrix_rank": self.matrix_rank, "augmented_rank": self.augmented_rank}


def _solve_preimage(target: Cochain, L: LieAlgebra) -> Cochain | NotExact:
    p = target.degree - 1
    M = differential_matrix(L, p)
    ncols = len(_tuples(L.dim, p))
    comps = []
    for k in range(target.value_dim):
        b = target.component(k)
        if not M:
            x = [Fraction(0)] * ncols if not any(b) else None
        else:
            x = exact.solve(M, b)
        if x is None:
            r = exact.rank(M) if M else 0
            aug = [row + [bi] for row, bi in zip(M, b)] if M else [[bi] for bi in b]
            return NotExact(k, r, exact.rank(aug))
        comps.append(x)
    sol = Cochain.from_component_vectors(p, L.dim, comps) if comps else Cochain.zero(p, L.dim, 0)
    assert ce_differential(sol, L) == target
    return sol


def solve_exactness(C: Cochain, L: LieAlgebra) -> Cochain | NotExact:
    """Find a 2-cochain eta with d(eta) = C, or certify there is none."""
    if C.degree != 3:
        raise ValueError("solve_exactness expects a 3-cochain")
    if not is_closed(C, L):
        raise ValueError("target cochain is not closed")
    return _solve_preimage(C, L)


def is_coboundary2(omega: Cochain, L: LieAlgebra) -> Cochain | NotExact:
    """Find a 1-cochain lam with d(lam) = omega, or certify there is none."""
    if omega.degree != 2:
        raise ValueError("is_coboundary2 expects a 2-cochain")
    if not is_closed(omega, L):
        raise ValueError("target cochain is not closed")
    return _solve_preimage(omega, L)


def is_skew(kappa: SymBilinearForm, D: LinearMap) -> bool:
    """kappa(Dx, y) + kappa(x, Dy) == 0 on basis pairs."""
    n = kappa.algebra_dim
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i, n):
            s = [a + b for a, b in zip(kappa(D(e[i]), e[j]), kappa(e[i], D(e[j])))]
            if any(s):
                return False
    return True


def eta_D(L: LieAlgebra, kappa: SymBilinearForm, D: LinearMap) -> Cochain:
    """eta_D(x, y) = kappa(x, D y) for a kappa-skew derivation D."""
    if not is_derivation(L, D):
        raise NotDerivation("D does not satisfy the Leibniz rule")
    if not is_skew(kappa, D):
        raise NotSkew("D is not skew with respect to kappa")
    e = L.basis
    eta = Cochain.from_function(2, L.dim, kappa.value_dim,
                                lambda idx: kappa(e[idx[0]], D(e[idx[1]])))
    assert is_closed(eta, L)
    return eta


def linear_functional(kappa: SymBilinearForm, x) -> Cochain:
    """The 1-cochain y -> kappa(x, y)."""
    n = kappa.algebra_dim
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    return Cochain.from_function(1, n, kappa.value_dim, lambda idx: kappa(x, e[idx[0]]))
