"""Discreteness of finitely generated subgroups of R^n.

Generators are vectors whose coordinates are rational combinations of named
real constants, the constant ``"1"`` always among them.  Non-unit constants
are treated as algebraically independent transcendentals.  Under that model a
subgroup is discrete exactly when its rank as an abelian group (``z_rank``)
equals the dimension of its real span (``span_rank``); both are computed
exactly.  A numeric mode with integer relation search covers generators
known only through floating values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, sqrt
from typing import Callable, Sequence

import numpy as np
import sympy
from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix

from . import exact
from .errors import DimensionMismatch, NumericModeUnsupported
from .lie import LinearMap

ALGEBRAIC = "algebraically_independent"
NUMERIC = "numeric"

LLL_DELTA = Fraction(99, 100)
COEFF_BOUND = 10**6
NUMERIC_TOL = 1e-9


@dataclass(frozen=True)
class SymbolicVector:
    """``v = sum_j coeffs[:, j] * constants[j]`` in R^n."""

    constants: tuple[str, ...]
    coeffs: tuple[tuple[Fraction, ...], ...]  # n rows, one column per constant

    def __post_init__(self):
        if "1" not in self.constants:
            raise ValueError('the constant "1" must be declared')
        if len(set(self.constants)) != len(self.constants):
            raise ValueError("constants must be pairwise distinct")
        if any(len(r) != len(self.constants) for r in self.coeffs):
            raise DimensionMismatch("coefficient rows must have one entry per constant")

    @classmethod
    def of(cls, constants: Sequence[str], rows) -> "SymbolicVector":
        return cls(tuple(constants), tuple(tuple(exact.scalar(x) for x in r) for r in rows))

    @classmethod
    def rational(cls, values, constants: Sequence[str] = ("1",)) -> "SymbolicVector":
        k = len(constants)
        one = list(constants).index("1")
        rows = [[exact.scalar(v) if j == one else Fraction(0) for j in range(k)] for v in values]
        return cls.of(constants, rows)

    @property
    def ambient_dim(self) -> int:
        return len(self.coeffs)

    def flat(self) -> list[Fraction]:
        return [x for r in self.coeffs for x in r]

    def numeric(self, values: dict[str, float]) -> np.ndarray:
        b = np.array([_const_value(c, values) for c in self.constants])
        return np.array([[float(x) for x in r] for r in self.coeffs]).reshape(
            self.ambient_dim, len(self.constants)) @ b

    def exact_value(self, values: dict[str, float]) -> list[Fraction]:
        """Value with each constant replaced by the exact rational of its float."""
        b = [Fraction(_const_value(c, values)) for c in self.constants]
        return [sum((x * y for x, y in zip(r, b)), Fraction(0)) for r in self.coeffs]

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in r] for r in self.coeffs]


def _const_value(name: str, values: dict[str, float]) -> float:
    if name == "1":
        return 1.0
    if name not in values:
        raise NumericModeUnsupported(f"no numeric value supplied for constant {name!r}")
    return float(values[name])


@dataclass(frozen=True)
class GeneratedSubgroup:
    generators: tuple[SymbolicVector, ...]
    constants: tuple[str, ...]
    ambient_dim: int
    independence_mode: str = ALGEBRAIC
    values: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for g in self.generators:
            if g.constants != self.constants:
                raise DimensionMismatch("generators must share one constant list")
            if g.ambient_dim != self.ambient_dim:
                raise DimensionMismatch("generators must share one ambient dimension")
        if self.independence_mode not in (ALGEBRAIC, NUMERIC):
            raise ValueError(f"unknown independence mode {self.independence_mode!r}")
        if self.independence_mode == NUMERIC:
            for c in self.constants:
                _const_value(c, self.values)

    @classmethod
    def of(cls, constants: Sequence[str], vectors, ambient_dim: int | None = None,
           mode: str = ALGEBRAIC, values: dict[str, float] | None = None) -> "GeneratedSubgroup":
        constants = tuple(constants)
        gens = tuple(v if isinstance(v, SymbolicVector) else SymbolicVector.of(constants, v)
                     for v in vectors)
        if ambient_dim is None:
            if not gens:
                raise ValueError("ambient_dim is required for an empty generator list")
            ambient_dim = gens[0].ambient_dim
        return cls(gens, constants, ambient_dim, mode, dict(values or {}))

    @classmethod
    def from_json(cls, data: dict, numeric: bool = False,
                  values: dict[str, float] | None = None) -> "GeneratedSubgroup":
        constants = data["constants"]
        vectors = data["vectors"]
        vals = dict(data.get("values", {}))
        vals.update(values or {})
        amb = data.get("ambient_dim")
        return cls.of(constants, vectors, amb, NUMERIC if numeric else ALGEBRAIC, vals)

    @property
    def m(self) -> int:
        return len(self.generators)

    def numeric_vectors(self) -> np.ndarray:
        if not self.generators:
            return np.zeros((0, self.ambient_dim))
        return np.array([g.numeric(self.values) for g in self.generators])


def z_rank(G: GeneratedSubgroup) -> tuple[int, list[list[int]]]:
    """Rank of G as an abelian group and a Z-basis of its relation lattice.

    The constants are Q-linearly independent, so sum n_i v_i = 0 splits into
    one rational equation per (coordinate, constant) pair.
    """
    if G.independence_mode != ALGEBRAIC:
        raise NumericModeUnsupported("z_rank needs exact generators")
    rows = [g.flat() for g in G.generators]
    relations = exact.integer_kernel(rows, G.m) if rows and rows[0] else [
        [int(i == j) for j in range(G.m)] for i in range(G.m)]
    return G.m - len(relations), relations


def span_rank(G: GeneratedSubgroup) -> int:
    if not G.generators or G.ambient_dim == 0:
        return 0
    if G.independence_mode == NUMERIC:
        return _numeric_rank(G.numeric_vectors())
    syms = [sympy.Symbol(f"c{j}") if c != "1" else None for j, c in enumerate(G.constants)]
    gens = [s for s in syms if s is not None]
    domain = QQ.frac_field(*gens) if gens else QQ
    entries = []
    for g in G.generators:
        row = []
        for r in g.coeffs:
            expr = sum((sympy.Rational(x.numerator, x.denominator) * (s if s is not None else 1)
                        for x, s in zip(r, syms)), sympy.Integer(0))
            row.append(domain.from_sympy(expr))
        entries.append(row)
    return DomainMatrix(entries, (G.m, G.ambient_dim), domain).rank()


def _numeric_rank(V: np.ndarray, tol: float = NUMERIC_TOL) -> int:
    if V.size == 0:
        return 0
    s = np.linalg.svd(V, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


@dataclass
class DiscretenessVerdict:
    verdict: str
    z_rank: int
    span_rank: int
    witness: dict

    @property
    def discrete(self) -> bool:
        return self.verdict in ("discrete", "likely_discrete")

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "z_rank": self.z_rank,
                "span_rank": self.span_rank, "witness": self.witness}


def _hnf_basis(G: GeneratedSubgroup) -> tuple[list[SymbolicVector], list[list[int]]]:
    """Z-basis of G and, for each basis vector, its integer combination of generators."""
    rows = [g.flat() for g in G.generators]
    den = 1
    for r in rows:
        den = lcm(den, *(x.denominator for x in r))
    ints = [[int(x * den) for x in r] for r in rows]
    h, u = exact.hermite_normal_form(ints)
    k = len(G.constants)
    basis, combos = [], []
    for hr, ur in zip(h, u):
        if not any(hr):
            continue
        flat = [Fraction(e, den) for e in hr]
        basis.append(SymbolicVector(G.constants, tuple(
            tuple(flat[i * k:(i + 1) * k]) for i in range(G.ambient_dim))))
        combos.append(list(ur))
    return basis, combos


def lattice_coordinates(basis: list[SymbolicVector], v: SymbolicVector) -> list[Fraction] | None:
    """Coordinates of v in the basis (exact), or None if v is not in their span."""
    if not basis:
        return [] if not any(v.flat()) else None
    A = exact.transpose([b.flat() for b in basis])
    return exact.solve(A, v.flat())


def is_discrete(G: GeneratedSubgroup) -> DiscretenessVerdict:
    if G.independence_mode == NUMERIC:
        return _numeric_verdict(G)
    z, relations = z_rank(G)
    s = span_rank(G)
    if z == s:
        basis, _ = _hnf_basis(G)
        coords = []
        for g in G.generators:
            c = lattice_coordinates(basis, g)
            assert c is not None and all(x.denominator == 1 for x in c)
            coords.append([int(x) for x in c])
        witness = {"lattice_basis": [b.to_json() for b in basis],
                   "generator_coordinates": coords}
        return DiscretenessVerdict("discrete", z, s, witness)
    witness = {"relations": relations, "rank_excess": z - s}
    if G.values:
        try:
            witness["small_elements"] = small_elements(G, 1e-6)
        except NumericModeUnsupported:
            pass
    return DiscretenessVerdict("not_discrete", z, s, witness)


def _lll(rows: list[list[int]]) -> list[list[int]]:
    M = DomainMatrix([[ZZ(x) for x in r] for r in rows], (len(rows), len(rows[0])), ZZ)
    red = M.lll(delta=QQ(LLL_DELTA.numerator, LLL_DELTA.denominator))
    return [[int(x) for x in r] for r in red.to_list()]


def small_elements(G: GeneratedSubgroup, eps: float) -> dict:
    """Find m+1 distinct group elements inside the eps-ball around 0.

    Works on a Z-basis of G, so every nonzero integer combination is a
    nonzero group element; LLL with a growing weight finds a combination w
    with 0 < |w| < eps/m, and 0, w, ..., m*w are the witnesses.  Values of
    the constants are taken as the exact rationals of their floats.
    """
    basis, combos = _hnf_basis(G)
    z = len(basis)
    if z == 0:
        raise ValueError("trivial group has no small nonzero elements")
    U = [b.exact_value(G.values) for b in basis]
    n = G.ambient_dim
    target = eps / max(G.m, 1)
    scale = Fraction(10**4)
    while scale < Fraction(10**40):
        rows = [[int(i == j) for j in range(z)] + [round(scale * x) for x in U[i]]
                for i in range(z)]
        for r in _lll(rows):
            c = r[:z]
            if not any(c):
                continue
            w = [sum((ci * U[i][k] for i, ci in enumerate(c)), Fraction(0)) for k in range(n)]
            norm = sqrt(float(sum(x * x for x in w)))
            if 0 < norm < target:
                gen_combo = [sum(ci * combos[i][j] for i, ci in enumerate(c)) for j in range(G.m)]
                return {"eps": eps, "step_norm": norm,
                        "step_generator_combination": gen_combo,
                        "elements": [[float(t * x) for x in w] for t in range(G.m + 1)]}
        scale *= 100
    raise ValueError("no small element found; the group may be discrete for these values")


def _numeric_verdict(G: GeneratedSubgroup) -> DiscretenessVerdict:
    V = G.numeric_vectors()
    s = _numeric_rank(V)
    relations = find_relations(V)
    z = G.m - len(relations)
    verdict = "likely_discrete" if z == s else "likely_not_discrete"
    return DiscretenessVerdict(verdict, z, s, {"relations": relations,
                                               "tolerance": NUMERIC_TOL,
                                               "coefficient_bound": COEFF_BOUND})


def find_relations(V: np.ndarray, tol: float = NUMERIC_TOL,
                   bound: int = COEFF_BOUND) -> list[list[int]]:
    """Integer relations among the rows of V found by LLL (heuristic)."""
    m = V.shape[0]
    if m == 0:
        return []
    vmax = float(np.max(np.abs(V))) if V.size else 0.0
    if vmax == 0.0:
        return [[int(i == j) for j in range(m)] for i in range(m)]
    weight = 1.0 / (tol * vmax)
    rows = [[int(i == j) for j in range(m)] +
            [int(round(weight * x)) for x in V[i]] for i in range(m)]
    found: list[list[int]] = []
    for r in _lll(rows):
        c = r[:m]
        if not any(c) or max(abs(x) for x in c) > bound:
            continue
        resid = np.linalg.norm(np.asarray(c, dtype=float) @ V)
        if resid <= tol * vmax:
            cand = found + [c]
            if exact.rank(exact.to_matrix(cand)) == len(cand):
                found.append(c)
    return found


def image_under_projection(G: GeneratedSubgroup, P: LinearMap) -> GeneratedSubgroup:
    if P.source_dim != G.ambient_dim:
        raise DimensionMismatch("projection source must be the ambient space")
    gens = []
    for g in G.generators:
        cols = exact.transpose([list(r) for r in g.coeffs]) if g.coeffs else []
        img_cols = [P(c) for c in cols]
        rows = exact.transpose(img_cols) if img_cols and P.target_dim else [
            [Fraction(0)] * len(G.constants) for _ in range(P.target_dim)]
        gens.append(SymbolicVector.of(G.constants, rows))
    return GeneratedSubgroup(tuple(gens), G.constants, P.target_dim,
                             G.independence_mode, dict(G.values))


def simpson(y: np.ndarray, a: float = 0.0, b: float = 1.0) -> np.ndarray:
    """Composite Simpson rule along axis 0 on an even number of uniform intervals."""
    N = y.shape[0] - 1
    if N < 2 or N % 2:
        raise ValueError("Simpson's rule needs an even number of intervals")
    h = (b - a) / N
    w = np.ones(N + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return h / 3 * np.tensordot(w, y, axes=(0, 0))


def torus_example(h_integral=None, *, samples=None, h: Callable | None = None, N: int = 256,
                  values: dict[str, float] | None = None) -> DiscretenessVerdict:
    """Discreteness of Z + Z * integral_0^1 h(s) ds in R.

    Pass an exact rational (or a constant name for an independent
    transcendental) as ``h_integral``, or a callable ``h`` / sampled values on
    a uniform grid of [0, 1] for the numeric verdict.
    """
    if h is not None or samples is not None:
        if samples is None:
            s = np.linspace(0.0, 1.0, N + 1)
            samples = np.asarray(h(s), dtype=float) * np.ones_like(s)
        value = float(simpson(np.asarray(samples, dtype=float)))
        G = GeneratedSubgroup.of(["1", "h"], [[[1, 0]], [[0, 1]]], mode=NUMERIC,
                                 values={"h": value})
        verdict = is_discrete(G)
        verdict.witness["integral"] = value
        return verdict
    if isinstance(h_integral, str):
        try:
            q = exact.scalar(h_integral)
        except ValueError:
            G = GeneratedSubgroup.of(["1", h_integral], [[[1, 0]], [[0, 1]]],
                                     values=values)
            return is_discrete(G)
    else:
        q = exact.scalar(h_integral)
    G = GeneratedSubgroup.of(["1"], [[[1]], [[q]]])
    return is_discrete(G)
