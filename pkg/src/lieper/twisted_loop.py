"""Sampled twisted loop algebras over the circle.

A twisted section is sampled at ``t_j = j / N`` for ``j = 0..N`` and obeys
``f(t + 1) = phi^{-1} f(t)``.  Derivatives use fourth-order central
differences whose stencils wrap around through the twist; integrals use the
composite Simpson rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from . import exact
from .errors import (DimensionMismatch, IncompatibleKappa, OrderBoundExceeded,
                     SingularTwist, TwistMismatch)
from .invariants import QuotientSpace
from .lattice import simpson
from .lie import LieAlgebra, LinearMap, SymBilinearForm

TWIST_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SampledTwistedSection:
    """Samples of a section of the flat bundle with holonomy ``twist``.

    ``algebra`` is None for sections of a plain vector bundle (the V-valued
    sections fed to :func:`lemma_a5_forward`).
    """

    twist: LinearMap
    samples: np.ndarray  # shape (N + 1, dim)
    algebra: LieAlgebra | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", s)
        if s.ndim != 2 or s.shape[1] != self.twist.source_dim:
            raise DimensionMismatch("samples must have shape (N + 1, dim)")
        if self.algebra is not None and self.algebra.dim != s.shape[1]:
            raise DimensionMismatch("samples do not match the algebra dimension")
        if (s.shape[0] - 1) % 2:
            raise ValueError("N must be even for Simpson integration")
        expected = s[0] @ self.twist_inv.T
        scale = max(1.0, float(np.max(np.abs(s))))
        if np.max(np.abs(s[-1] - expected)) > TWIST_TOL * scale:
            raise TwistMismatch("samples violate f(1) = phi^{-1} f(0)")

    @classmethod
    def from_function(cls, twist: LinearMap, func: Callable[[np.ndarray], np.ndarray],
                      N: int, algebra: LieAlgebra | None = None) -> "SampledTwistedSection":
        t = np.linspace(0.0, 1.0, N + 1)
        return cls(twist, np.asarray(func(t), dtype=float).reshape(N + 1, -1), algebra)

    @property
    def N(self) -> int:
        return self.samples.shape[0] - 1

    @cached_property
    def twist_matrix(self) -> np.ndarray:
        return self.twist.to_numpy()

    @cached_property
    def twist_inv(self) -> np.ndarray:
        return np.linalg.inv(self.twist_matrix)

    def derivative(self) -> np.ndarray:
        return twisted_derivative(self.samples, self.twist_matrix, self.twist_inv)

    def bracket(self, other: "SampledTwistedSection") -> "SampledTwistedSection":
        if self.algebra is None or other.algebra is not self.algebra and other.algebra != self.algebra:
            raise DimensionMismatch("bracket needs sections of the same Lie algebra")
        _check_same_twist(self, other)
        c = self.algebra.structure_array
        vals = np.einsum("ti,tj,ijk->tk", self.samples, other.samples, c)
        # the bracket of twisted sections is twisted; rounding can break the
        # check by a hair, so re-impose the endpoint exactly
        vals[-1] = vals[0] @ self.twist_inv.T
        return SampledTwistedSection(self.twist, vals, self.algebra)


def twisted_derivative(samples: np.ndarray, twist: np.ndarray, twist_inv: np.ndarray) -> np.ndarray:
    """Fourth-order d/dt along axis 0 of samples shaped (N + 1, ..., dim)."""
    f = np.asarray(samples, dtype=float)
    N = f.shape[0] - 1
    h = 1.0 / N
    ahead = f[1:3] @ twist_inv.T          # f(1 + h), f(1 + 2h)
    behind = f[N - 2:N] @ twist.T         # f(-2h), f(-h)
    ext = np.concatenate([behind, f, ahead], axis=0)
    return (ext[0:N + 1] - 8 * ext[1:N + 2] + 8 * ext[3:N + 4] - ext[4:N + 5]) / (12 * h)


def _check_same_twist(f: SampledTwistedSection, g: SampledTwistedSection) -> None:
    if f.twist != g.twist or f.N != g.N:
        raise TwistMismatch("sections use different twists or grids")


@dataclass(frozen=True)
class CokernelSpace:
    """coker(phi_V - id) with an exact projection onto quotient coordinates."""

    phi_V: LinearMap
    quotient: QuotientSpace

    @property
    def dim(self) -> int:
        return self.quotient.quotient_dim

    @property
    def image_basis(self):
        return [list(r) for r in self.quotient.relation_basis]

    @cached_property
    def projection(self) -> LinearMap:
        return self.quotient.projection

    @cached_property
    def projection_array(self) -> np.ndarray:
        return self.projection.to_numpy().reshape(self.dim, self.phi_V.source_dim)

    def project(self, v: np.ndarray) -> np.ndarray:
        return self.projection_array @ np.asarray(v, dtype=float)


def cokernel(phi_V: LinearMap) -> CokernelSpace:
    if not phi_V.is_square():
        raise DimensionMismatch("phi_V must be square")
    d = phi_V.source_dim
    A = (phi_V - LinearMap.identity(d)).rows
    image = exact.transpose(A)  # columns of A as rows
    return CokernelSpace(phi_V, QuotientSpace.of(d, [r for r in image if any(r)]))


def matrix_order(phi: LinearMap, bound: int = 64) -> int:
    ident = LinearMap.identity(phi.source_dim)
    power = phi
    for k in range(1, bound + 1):
        if power == ident:
            return k
        power = power @ phi
    raise OrderBoundExceeded(f"matrix order exceeds {bound}")


@dataclass(frozen=True)
class CokerFixedReport:
    order: int
    dim_coker: int
    dim_fixed: int
    averaging: LinearMap
    descends: bool
    iso: bool

    @property
    def ok(self) -> bool:
        return self.dim_coker == self.dim_fixed and self.descends and self.iso

    def to_json(self) -> dict:
        return {"order": self.order, "dim_coker": self.dim_coker, "dim_fixed": self.dim_fixed,
                "descends": self.descends, "isomorphism": self.iso,
                "averaging": self.averaging.to_json()}


def coker_equals_fixed_for_finite_order(phi_V: LinearMap, bound: int = 64) -> CokerFixedReport:
    """Compare coker(phi - id) with ker(phi - id) through the averaging projector."""
    d = phi_V.source_dim
    order = matrix_order(phi_V, bound)
    ident = LinearMap.identity(d)
    total = LinearMap.zero(d, d)
    power = ident
    for _ in range(order):
        total = total + power
        power = power @ phi_V
    avg = total.scaled(Fraction(1, order))
    shifted = phi_V - ident
    C = cokernel(phi_V)
    fixed = exact.nullspace(shifted.rows, d)
    descends = exact.is_zero((avg @ shifted).rows) and exact.is_zero((shifted @ avg).rows)
    if C.dim:
        induced = avg @ C.quotient.section
        iso = exact.rank(induced.rows) == C.dim == len(fixed)
    else:
        iso = len(fixed) == 0
    return CokerFixedReport(order, C.dim, len(fixed), avg, descends, iso)


def check_compatible(kappa: SymBilinearForm, phi_k: LinearMap, phi_V: LinearMap) -> bool:
    """phi_V(kappa(x, y)) == kappa(phi_k x, phi_k y) on basis pairs (exact)."""
    n = kappa.algebra_dim
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i, n):
            if phi_V(kappa.table[i][j]) != kappa(phi_k(e[i]), phi_k(e[j])):
                return False
    return True


def _kappa_pairing(kappa: SymBilinearForm, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    return np.einsum("...i,ijv,...j->...v", f, kappa.to_numpy(), g)


def omega_tilde(f: SampledTwistedSection, g: SampledTwistedSection,
                kappa: SymBilinearForm) -> np.ndarray:
    """V-valued integral_0^1 kappa(f, g') dt (before projecting to the cokernel)."""
    _check_same_twist(f, g)
    return simpson(_kappa_pairing(kappa, f.samples, g.derivative()))


def omega_phi(f: SampledTwistedSection, g: SampledTwistedSection,
              kappa: SymBilinearForm, C: CokernelSpace) -> np.ndarray:
    """[integral_0^1 kappa(f, g') dt] in coker(phi_V - id)."""
    _check_same_twist(f, g)
    if C.phi_V.source_dim != kappa.value_dim:
        raise DimensionMismatch("cokernel does not live on the value space of kappa")
    if not check_compatible(kappa, f.twist, C.phi_V):
        raise IncompatibleKappa("phi_V(kappa(x, y)) != kappa(phi x, phi y)")
    return C.project(omega_tilde(f, g, kappa))


def cocycle_identity_check(f, g, h, kappa: SymBilinearForm, C: CokernelSpace) -> float:
    """max |sum_cyc omega_phi([f, g], h)| in cokernel coordinates."""
    total = (omega_phi(f.bracket(g), h, kappa, C)
             + omega_phi(g.bracket(h), f, kappa, C)
             + omega_phi(h.bracket(f), g, kappa, C))
    return float(np.max(np.abs(total))) if total.size else 0.0


def lemma_a5_forward(f: SampledTwistedSection, C: CokernelSpace) -> np.ndarray:
    """[f dt] -> [integral_0^1 f(t) dt] in coker(phi_V - id)."""
    if f.twist != C.phi_V:
        raise TwistMismatch("section twist differs from the cokernel's phi_V")
    return C.project(simpson(f.samples))


STEP_MARGIN = 0.125


def smooth_step(t: np.ndarray) -> np.ndarray:
    """0 on [0, 1/8], 1 on [7/8, 1], quintic smoothstep in between.

    The profile is point-symmetric about (1/2, 1/2), so its integral is
    exactly 1/2.
    """
    u = np.clip((np.asarray(t, dtype=float) - STEP_MARGIN) / (1 - 2 * STEP_MARGIN), 0.0, 1.0)
    return u ** 3 * (10 - 15 * u + 6 * u ** 2)


def lemma_a5_inverse(v, phi_V: LinearMap, N: int = 256) -> SampledTwistedSection:
    """Section f_v(t) = (1 - gamma(t)) v + gamma(t) phi_V^{-1} v with [int f_v] = [v].

    Uses N divisible by 16 so that the breakpoints of gamma fall on Simpson
    panel boundaries.
    """
    if N % 16:
        raise ValueError("N must be a multiple of 16")
    if exact.rank(phi_V.rows) != phi_V.source_dim:
        raise SingularTwist("phi_V is not invertible")
    v = np.asarray([float(x) for x in v])
    w = phi_V.inverse().to_numpy() @ v
    t = np.linspace(0.0, 1.0, N + 1)
    gam = smooth_step(t)[:, None]
    return SampledTwistedSection(phi_V, (1 - gam) * v + gam * w)
