"""Period integrals of left-invariant forms on SU(2) = unit quaternions.

The Lie algebra su(2) is identified with the imaginary quaternions and the
basis (I, J, K) of :func:`lieper.lie.su2`.  That frame is declared positively
oriented; with it the identity map of S^3 has period +8 pi^2 for
kappa = -1/4 Killing.

Charts:

* S^3: hyperspherical angles (psi, theta, phi) in [0, pi] x [0, pi] x [0, 2 pi],
  q = (cos psi, sin psi cos theta, sin psi sin theta cos phi,
  sin psi sin theta sin phi).
* [0, 1] x S^2: (t, theta, phi) with m = cos theta I + sin theta cos phi J +
  sin theta sin phi K.

Both are integrated with tensor Gauss-Legendre rules, except the loop
parameter t, which uses a uniform grid so the twisted-loop machinery
(fourth-order differences, Simpson) can be reused.  Jacobians never appear
explicitly: the integrand is the form evaluated on coordinate vectors.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.spatial.transform import Rotation

from .cohomology import cartan_map
from .errors import BoundaryMismatch, DimensionMismatch, GridTooCoarse, TwistMismatch
from .lattice import simpson
from .lie import LinearMap, SymBilinearForm, is_automorphism, su2
from .twisted_loop import twisted_derivative

FD_STEP = 1e-5
DEFAULT_S3_RES = 48
DEFAULT_LOOP_RES = (32, 32, 64)  # (theta, phi, t intervals)


# -- quaternions ---------------------------------------------------------------

@dataclass(frozen=True)
class Quaternion:
    a: float
    b: float
    c: float
    d: float

    @classmethod
    def from_array(cls, q) -> "Quaternion":
        return cls(*map(float, q))

    def to_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d])

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion.from_array(qmul(self.to_array(), other.to_array()))

    def conj(self) -> "Quaternion":
        return Quaternion(self.a, -self.b, -self.c, -self.d)

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_array()))

    def normalized(self) -> "Quaternion":
        return Quaternion.from_array(self.to_array() / self.norm())


def qmul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    a1, b1, c1, d1 = np.moveaxis(p, -1, 0)
    a2, b2, c2, d2 = np.moveaxis(q, -1, 0)
    return np.stack([
        a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
        a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
        a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
        a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
    ], axis=-1)


def qconj(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float) * np.array([1.0, -1.0, -1.0, -1.0])


def qinv(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return qconj(q) / np.sum(q * q, axis=-1, keepdims=True)


def qexp(v: np.ndarray) -> np.ndarray:
    """exp of an imaginary quaternion given by its (I, J, K) coordinates."""
    v = np.asarray(v, dtype=float)
    r = np.linalg.norm(v, axis=-1, keepdims=True)
    sinc = np.where(r > 0, np.sin(r) / np.where(r > 0, r, 1.0), 1.0)
    return np.concatenate([np.cos(r), sinc * v], axis=-1)


def qlog(q: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unit quaternion, as (I, J, K) coordinates."""
    q = np.asarray(q, dtype=float)
    v = q[..., 1:]
    s = np.linalg.norm(v, axis=-1, keepdims=True)
    ang = np.arctan2(s, q[..., :1])
    fac = np.where(s > 0, ang / np.where(s > 0, s, 1.0), 1.0)
    return fac * v


def imag(v: np.ndarray) -> np.ndarray:
    """Embed (I, J, K) coordinates as pure quaternions."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def rotation_to_quaternion(phi: np.ndarray) -> np.ndarray:
    """A unit quaternion u with u x u^{-1} = phi(x) on imaginary quaternions."""
    x, y, z, w = Rotation.from_matrix(np.asarray(phi, dtype=float)).as_quat()
    return np.array([w, x, y, z])


# -- sphere maps -----------------------------------------------------------------

def s3_chart(coords: np.ndarray) -> np.ndarray:
    psi, th, ph = np.moveaxis(np.asarray(coords, dtype=float), -1, 0)
    return np.stack([np.cos(psi), np.sin(psi) * np.cos(th),
                     np.sin(psi) * np.sin(th) * np.cos(ph),
                     np.sin(psi) * np.sin(th) * np.sin(ph)], axis=-1)


def s2_chart(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    return np.stack([np.cos(theta), np.sin(theta) * np.cos(phi),
                     np.sin(theta) * np.sin(phi)], axis=-1)


@dataclass(frozen=True)
class SphereMap:
    """A smooth map from a chart domain to unit quaternions.

    ``domain`` is ``"S3"`` (coordinates psi, theta, phi) or ``"S2_family"``
    (coordinates t, theta, phi for a map [0, 1] x S^2 -> SU(2)).
    """

    func: Callable[[np.ndarray], np.ndarray]
    domain: str = "S3"
    name: str = ""

    def __post_init__(self):
        if self.domain not in ("S3", "S2_family"):
            raise ValueError(f"unknown domain {self.domain!r}")

    def __call__(self, coords: np.ndarray) -> np.ndarray:
        return self.func(np.asarray(coords, dtype=float))

    @property
    def bounds(self) -> list[tuple[float, float]]:
        if self.domain == "S3":
            return [(0.0, np.pi), (0.0, np.pi), (0.0, 2 * np.pi)]
        return [(0.0, 1.0), (0.0, np.pi), (0.0, 2 * np.pi)]


@dataclass(frozen=True)
class SampledSphereMap:
    """Values of a sphere map on a tensor Gauss-Legendre grid."""

    domain: str
    resolution: tuple[int, int, int]
    nodes: tuple[np.ndarray, np.ndarray, np.ndarray]
    values: np.ndarray  # shape resolution + (4,)

    def max_norm_defect(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.values, axis=-1) - 1.0)))


def sample(sigma: SphereMap, res: int | tuple[int, int, int] = DEFAULT_S3_RES) -> SampledSphereMap:
    res = (res,) * 3 if isinstance(res, int) else tuple(res)
    nodes = tuple(_gauss(n, lo, hi)[0] for n, (lo, hi) in zip(res, sigma.bounds))
    grid = np.stack(np.meshgrid(*nodes, indexing="ij"), axis=-1)
    return SampledSphereMap(sigma.domain, res, nodes, sigma(grid))


def identity_map() -> SphereMap:
    return SphereMap(s3_chart, "S3", "identity")


def power_map(k: int) -> SphereMap:
    """q -> q^k composed with the chart; degree k."""
    def f(coords):
        q = s3_chart(coords)
        out = np.zeros_like(q)
        out[..., 0] = 1.0
        for _ in range(k):
            out = qmul(out, q)
        return out
    return SphereMap(f, "S3", f"power{k}")


def constant_map(q=(1.0, 0.0, 0.0, 0.0), domain: str = "S3") -> SphereMap:
    q = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return SphereMap(lambda c: np.broadcast_to(q, c.shape[:-1] + (4,)).copy(), domain, "constant")


def left_translate(g, sigma: SphereMap) -> SphereMap:
    g = np.asarray(g, dtype=float)
    return SphereMap(lambda c: qmul(g, sigma(c)), sigma.domain, f"{sigma.name}_translated")


def suspension_family(twist: LinearMap | None = None) -> SphereMap:
    """The S^3 generator as a family of based loops over S^2.

    (t, m) -> exp(pi t m) collapses {0} x S^2 and {1} x S^2 to the poles +1
    and -1 of S^3, i.e. it is the identity chart in suspension coordinates.
    Right multiplication by exp(-pi t I) moves the t = 1 end back to +1
    without changing the degree, so every loop is based at 1.  A twist
    phi = Ad(u) is absorbed by conjugating with exp(t xi), exp(xi) = u, which
    gives sigma(t + 1) = u^{-1} sigma(t) u.
    """
    xi = np.zeros(3)
    if twist is not None:
        xi = qlog(rotation_to_quaternion(twist.to_numpy()))

    def f(coords):
        t, th, ph = np.moveaxis(coords, -1, 0)
        m = s2_chart(th, ph)
        core = qmul(qexp(np.pi * t[..., None] * m),
                    qexp(-np.pi * t[..., None] * np.array([1.0, 0.0, 0.0])))
        if twist is None:
            return core
        c = qexp(t[..., None] * xi)
        return qmul(qmul(qconj(c), core), c)
    return SphereMap(f, "S2_family", "suspension")


# -- log derivatives and quadrature ---------------------------------------------------

def log_derivative(sigma: SphereMap, coords: np.ndarray, direction: int,
                   h: float = FD_STEP) -> np.ndarray:
    """sigma(m)^{-1} d sigma along a coordinate axis, as (I, J, K) coordinates."""
    coords = np.asarray(coords, dtype=float)
    step = np.zeros(coords.shape[-1])
    step[direction] = h
    q = sigma(coords)
    dq = (sigma(coords + step) - sigma(coords - step)) / (2 * h)
    return qmul(qinv(q), dq)[..., 1:]


def _gauss(n: int, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(n)
    return lo + (x + 1) * (hi - lo) / 2, w * (hi - lo) / 2


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LIEPER_THREADS", "1")))
    except ValueError:
        return 1


def _map_chunks(fn, chunks):
    """Evaluate chunks (in parallel if LIEPER_THREADS > 1) and sum in chunk order."""
    n = _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(fn, chunks))
    else:
        parts = [fn(c) for c in chunks]
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    return total


@dataclass
class PeriodResult:
    value: np.ndarray
    estimated_error: float
    resolutions: tuple

    def to_json(self) -> dict:
        return {"value": [float(x) for x in self.value],
                "estimated_error": float(self.estimated_error),
                "grid_resolutions": [list(r) if isinstance(r, tuple) else r
                                     for r in self.resolutions]}


def _su2_form(kappa: SymBilinearForm) -> SymBilinearForm:
    if kappa.algebra_dim != 3:
        raise DimensionMismatch("periods are computed for forms on su(2)")
    return kappa


def cartan_tensor(kappa: SymBilinearForm) -> np.ndarray:
    """C(kappa) as a dense (3, 3, 3, d) float array."""
    return cartan_map(su2(), _su2_form(kappa)).to_numpy()


def _s3_integral(C: np.ndarray, sigma: SphereMap, n: int) -> np.ndarray:
    (x0, w0), (x1, w1), (x2, w2) = (_gauss(n, lo, hi) for lo, hi in sigma.bounds)
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    w12 = np.outer(w1, w2)

    def chunk(i):
        coords = np.stack([np.full_like(g1, x0[i]), g1, g2], axis=-1)
        d = [log_derivative(sigma, coords, a) for a in range(3)]
        vals = np.einsum("ijkv,...i,...j,...k->...v", C, *d)
        return w0[i] * np.einsum("ab,abv->v", w12, vals)

    return _map_chunks(chunk, range(n))


def period_3form(kappa: SymBilinearForm, sigma: SphereMap, res: int = DEFAULT_S3_RES,
                 rel_tol: float | None = None) -> PeriodResult:
    """Integral over S^3 of sigma^* C(kappa)^l, estimated at res and 2 res."""
    if sigma.domain != "S3":
        raise DimensionMismatch("period_3form needs a map defined on S^3")
    C = cartan_tensor(kappa)
    coarse = _s3_integral(C, sigma, res)
    fine = _s3_integral(C, sigma, 2 * res)
    err = float(np.max(np.abs(fine - coarse)))
    scale = float(np.max(np.abs(fine))) if fine.size else 0.0
    if rel_tol is not None and err > rel_tol * max(scale, 1e-300):
        raise GridTooCoarse(f"estimated error {err:.3g} exceeds tolerance")
    return PeriodResult(fine, err, (res, 2 * res))


@dataclass
class LoopPeriodResult:
    lhs: np.ndarray          # integral over S^2 of the loop-algebra 2-cocycle
    rhs: np.ndarray          # half the integral of the pulled-back 3-form
    lhs_error: float
    rhs_error: float
    resolutions: tuple

    @property
    def difference(self) -> float:
        return float(np.max(np.abs(self.lhs - self.rhs)))

    @property
    def relative_difference(self) -> float:
        scale = float(np.max(np.abs(self.rhs)))
        return self.difference / scale if scale else self.difference

    def to_json(self) -> dict:
        return {"lhs": [float(x) for x in self.lhs], "rhs": [float(x) for x in self.rhs],
                "difference": self.difference, "relative_difference": self.relative_difference,
                "lhs_error": self.lhs_error, "rhs_error": self.rhs_error,
                "grid_resolutions": [list(r) for r in self.resolutions]}


def _loop_sides(kappa: SymBilinearForm, C: np.ndarray, sigma: SphereMap,
                twist: np.ndarray, res: tuple[int, int, int]) -> tuple[np.ndarray, np.ndarray]:
    n_th, n_ph, n_t = res
    (xt, wt), (xp, wp) = _gauss(n_th, 0.0, np.pi), _gauss(n_ph, 0.0, 2 * np.pi)
    t = np.linspace(0.0, 1.0, n_t + 1)
    T, TH, PH = np.meshgrid(t, xt, xp, indexing="ij")
    coords = np.stack([T, TH, PH], axis=-1)
    f = log_derivative(sigma, coords, 1)   # along theta
    g = log_derivative(sigma, coords, 2)   # along phi
    dt = log_derivative(sigma, coords, 0)  # along t
    tinv = np.linalg.inv(twist)
    fp = twisted_derivative(f, twist, tinv)
    gp = twisted_derivative(g, twist, tinv)
    K = kappa.to_numpy()
    pair = (np.einsum("...i,ijv,...j->...v", f, K, gp)
            - np.einsum("...i,ijv,...j->...v", g, K, fp))
    omega = 0.5 * simpson(pair)                       # (n_th, n_ph, d)
    lhs = np.einsum("a,b,abv->v", wt, wp, omega)
    three = np.einsum("ijkv,...i,...j,...k->...v", C, f, g, dt)
    rhs = 0.5 * np.einsum("a,b,abv->v", wt, wp, simpson(three))
    return lhs, rhs


def twisted_loop_period(kappa: SymBilinearForm, sigma: SphereMap,
                        phi_k: LinearMap | None = None,
                        res: tuple[int, int, int] = DEFAULT_LOOP_RES,
                        rel_tol: float | None = None) -> LoopPeriodResult:
    """Both sides of the loop-period relation for a family sigma: [0,1] x S^2 -> SU(2).

    lhs: integral over S^2 of omega(f, g) = 1/2 int_0^1 kappa(f, g') - kappa(g, f') dt
    on the log derivatives f, g of sigma along theta and phi.
    rhs: 1/2 integral over [0,1] x S^2 of C(kappa)(d_theta, d_phi, d_t) of the
    log derivative of sigma.  The symmetrised cochain agrees with
    int kappa(f, g') modulo boundary terms that vanish in coker(phi_V - id).
    """
    if sigma.domain != "S2_family":
        raise DimensionMismatch("twisted_loop_period needs a family over [0,1] x S^2")
    L = su2()
    if phi_k is None:
        phi_k = LinearMap.identity(3)
    if not is_automorphism(L, phi_k):
        raise TwistMismatch("twist is not an automorphism of su(2)")
    twist = phi_k.to_numpy()
    _check_boundary(sigma, twist)
    C = cartan_tensor(kappa)
    coarse = _loop_sides(kappa, C, sigma, twist, res)
    fine_res = tuple(2 * r for r in res)
    fine = _loop_sides(kappa, C, sigma, twist, fine_res)
    lhs_err = float(np.max(np.abs(fine[0] - coarse[0])))
    rhs_err = float(np.max(np.abs(fine[1] - coarse[1])))
    if rel_tol is not None:
        scale = max(float(np.max(np.abs(fine[1]))), 1e-300)
        if max(lhs_err, rhs_err) > rel_tol * scale:
            raise GridTooCoarse("loop period not resolved at the requested tolerance")
    return LoopPeriodResult(fine[0], fine[1], lhs_err, rhs_err, (res, fine_res))


def _check_boundary(sigma: SphereMap, twist: np.ndarray, n: int = 12, tol: float = 1e-10) -> None:
    """sigma(1, m) must equal phi^{-1}(sigma(0, m)) as group elements."""
    u = rotation_to_quaternion(twist)
    th, ph = np.meshgrid(np.linspace(0, np.pi, n), np.linspace(0, 2 * np.pi, n), indexing="ij")
    start = sigma(np.stack([np.zeros_like(th), th, ph], axis=-1))
    end = sigma(np.stack([np.ones_like(th), th, ph], axis=-1))
    expected = qmul(qmul(qconj(u), start), u)
    if np.max(np.abs(end - expected)) > tol:
        raise BoundaryMismatch("family violates the twist boundary condition")
