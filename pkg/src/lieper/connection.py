"""Local principal connections on a trivial patch U x H, H = U(1) or SU(2).

Both groups are modelled inside the unit quaternions: U(1) is the circle
{cos s + sin s I}, its Lie algebra is spanned by I, and algebra values are
given as 1-vectors.  SU(2) algebra values are (I, J, K) coordinates, so the
bracket is [a, b] = 2 a x b.

A connection 1-form is A = A_x dx + A_y dy with algebra-valued component
functions.  Horizontal lifts solve rho' = -rho A(gamma') and the local
curvature is F(v, w) = d_v A(w) - d_w A(v) + [A(v), A(w)].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, StepOutOfPatch
from .periods import qlog, qmul

BASE_TOL = 1e-12
FD_STEP = 1e-5
GROUPS = {"u1": 1, "su2": 3}

VectorField = Callable[[np.ndarray, np.ndarray], tuple]


def _to_imag(a: np.ndarray, group: str) -> np.ndarray:
    """Algebra coordinates -> (I, J, K) coordinates."""
    a = np.asarray(a, dtype=float)
    if group == "u1":
        return np.concatenate([a, np.zeros(a.shape[:-1] + (2,))], axis=-1)
    return a


def _from_imag(v: np.ndarray, group: str) -> np.ndarray:
    return v[..., :1] if group == "u1" else v


@dataclass(frozen=True)
class ConnectionPatch:
    """A = A_x dx + A_y dy on the box ``bounds`` around ``base_point``.

    ``A_x`` and ``A_y`` take coordinate arrays x, y and return arrays of
    shape x.shape + (algebra_dim,).  With ``normalized`` the gauge is
    required to satisfy A(m0) = 0; switch it off for lifts in arbitrary
    gauges.
    """

    group: str
    A_x: Callable[[np.ndarray, np.ndarray], np.ndarray]
    A_y: Callable[[np.ndarray, np.ndarray], np.ndarray]
    base_point: tuple[float, float] = (0.0, 0.0)
    bounds: tuple[tuple[float, float], tuple[float, float]] = ((-1.0, 1.0), (-1.0, 1.0))
    normalized: bool = True
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {sorted(GROUPS)}")
        if not self.contains(np.asarray(self.base_point, dtype=float)):
            raise StepOutOfPatch("base point lies outside the patch")
        if self.normalized:
            x0, y0 = self.base_point
            a = np.concatenate([self.components(np.array(x0), np.array(y0))])
            if np.max(np.abs(a)) > BASE_TOL:
                raise ValueError("connection must vanish at the base point")

    @property
    def algebra_dim(self) -> int:
        return GROUPS[self.group]

    def contains(self, p: np.ndarray) -> bool:
        p = np.asarray(p, dtype=float)
        (x0, x1), (y0, y1) = self.bounds
        return bool(np.all((p[..., 0] > x0) & (p[..., 0] < x1)
                           & (p[..., 1] > y0) & (p[..., 1] < y1)))

    def components(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape + (self.algebra_dim,)
        ax = np.broadcast_to(np.asarray(self.A_x(x, y), dtype=float), shape)
        ay = np.broadcast_to(np.asarray(self.A_y(x, y), dtype=float), shape)
        return ax, ay

    def __call__(self, p: np.ndarray, v: np.ndarray) -> np.ndarray:
        """A_p(v) for points p and vectors v of shape (..., 2)."""
        p, v = np.asarray(p, dtype=float), np.asarray(v, dtype=float)
        if not self.contains(p):
            raise StepOutOfPatch("path leaves the patch")
        ax, ay = self.components(p[..., 0], p[..., 1])
        return v[..., :1] * ax + v[..., 1:2] * ay


def algebra_bracket(group: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if group == "u1":
        return np.zeros(np.broadcast(np.asarray(a), np.asarray(b)).shape)
    return 2 * np.cross(a, b)


def curvature(P: ConnectionPatch, point, v, w, h: float = FD_STEP) -> np.ndarray:
    """F(v, w) at ``point``: central differences for dA, exact bracket term."""
    point = np.asarray(point, dtype=float)
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    dv_Aw = (P(point + h * v, w) - P(point - h * v, w)) / (2 * h)
    dw_Av = (P(point + h * w, v) - P(point - h * w, v)) / (2 * h)
    return dv_Aw - dw_Av + algebra_bracket(P.group, P(point, v), P(point, w))


@dataclass(frozen=True)
class HolonomyCurve:
    """Group elements rho(t_j) as unit quaternions, rho(0) = 1."""

    group: str
    times: np.ndarray
    samples: np.ndarray  # shape (len(times), 4)

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]

    def as_matrices(self) -> np.ndarray:
        """U(1) as 1x1 and SU(2) as 2x2 complex matrices."""
        a, b, c, d = np.moveaxis(self.samples, -1, 0)
        if self.group == "u1":
            return (a + 1j * b)[:, None, None]
        return np.stack([np.stack([a + 1j * b, c + 1j * d], -1),
                         np.stack([-c + 1j * d, a - 1j * b], -1)], -2)


@dataclass(frozen=True)
class Segment:
    """A path given on the RK4 half-step grid: points and velocities."""

    duration: float
    points: np.ndarray      # (2 n + 1, 2)
    velocities: np.ndarray  # (2 n + 1, 2)


def _rk4_lift(a: np.ndarray, h: float, start: np.ndarray) -> np.ndarray:
    """Integrate rho' = -rho a(s) with a given on the half-step grid (2 n + 1, 3)."""
    n = (a.shape[0] - 1) // 2
    A = np.concatenate([np.zeros(a.shape[:-1] + (1,)), a], axis=-1)
    out = np.empty((n + 1, 4))
    rho = np.asarray(start, dtype=float)
    out[0] = rho
    for k in range(n):
        a0, am, a1 = A[2 * k], A[2 * k + 1], A[2 * k + 2]
        k1 = -qmul(rho, a0)
        k2 = -qmul(rho + 0.5 * h * k1, am)
        k3 = -qmul(rho + 0.5 * h * k2, am)
        k4 = -qmul(rho + h * k3, a1)
        rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        rho = rho / np.linalg.norm(rho)
        out[k + 1] = rho
    return out


def lift_segment(P: ConnectionPatch, seg: Segment, start=(1.0, 0.0, 0.0, 0.0)) -> np.ndarray:
    if not P.contains(seg.points):
        raise StepOutOfPatch("path leaves the patch")
    a = _to_imag(P(seg.points, seg.velocities), P.group)
    n = (seg.points.shape[0] - 1) // 2
    return _rk4_lift(a, seg.duration / n if n else 0.0, np.asarray(start, dtype=float))


def path_segment(gamma: Callable, duration: float, steps: int = 200,
                 velocity: Callable | None = None, h: float = 1e-6) -> Segment:
    """Sample a parametrised path s -> gamma(s), s in [0, duration], vectorised in s."""
    s = np.linspace(0.0, duration, 2 * steps + 1)
    pts = np.asarray(gamma(s), dtype=float).reshape(len(s), 2)
    if velocity is not None:
        vel = np.asarray(velocity(s), dtype=float).reshape(len(s), 2)
    else:
        vel = (np.asarray(gamma(s + h), dtype=float).reshape(len(s), 2)
               - np.asarray(gamma(s - h), dtype=float).reshape(len(s), 2)) / (2 * h)
    return Segment(duration, pts, vel)


def horizontal_lift(P: ConnectionPatch, gamma: Callable, duration: float = 1.0,
                    steps: int = 200, velocity: Callable | None = None) -> HolonomyCurve:
    """Horizontal lift of gamma through the identity, as a curve in H.

    ``gamma`` maps an array of parameters to points of shape (len, 2);
    ``velocity`` (optional) is its derivative, otherwise central differences
    are used.
    """
    seg = path_segment(gamma, duration, steps, velocity)
    rho = lift_segment(P, seg)
    return HolonomyCurve(P.group, np.linspace(0.0, duration, steps + 1), rho)


def _field(V: VectorField, p: np.ndarray) -> np.ndarray:
    vx, vy = V(p[..., 0], p[..., 1])
    return np.stack(np.broadcast_arrays(np.asarray(vx, float), np.asarray(vy, float)), axis=-1)


def flow(V: VectorField, p: np.ndarray, times: np.ndarray, substeps: int = 64) -> np.ndarray:
    """Fl^V_t(p) for an array of times (possibly negative), RK4 per sample."""
    times = np.asarray(times, dtype=float)
    p = np.broadcast_to(np.asarray(p, dtype=float), times.shape + (2,)).copy()
    h = (times / substeps)[..., None]
    for _ in range(substeps):
        k1 = _field(V, p)
        k2 = _field(V, p + 0.5 * h * k1)
        k3 = _field(V, p + 0.5 * h * k2)
        k4 = _field(V, p + h * k3)
        p = p + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return p


def _flow_segment(V: VectorField, start: np.ndarray, t: float, sign: float,
                  steps: int) -> Segment:
    s = np.linspace(0.0, t, 2 * steps + 1)
    pts = flow(V, start, sign * s)
    return Segment(t, pts, sign * _field(V, pts))


def commutator_curve(X: VectorField, Y: VectorField, m0, u: np.ndarray) -> np.ndarray:
    """gamma(u) = Fl^Y_{-u} Fl^X_{-u} Fl^Y_u Fl^X_u (m0), vectorised in u."""
    u = np.asarray(u, dtype=float)
    p = np.broadcast_to(np.asarray(m0, dtype=float), u.shape + (2,))
    for V, sign in ((X, 1.0), (Y, 1.0), (X, -1.0), (Y, -1.0)):
        p = flow(V, p, sign * u)
    return p


def commutator_loop_holonomy(P: ConnectionPatch, X: VectorField, Y: VectorField,
                             t: float, steps: int = 200) -> np.ndarray:
    """beta(t): holonomy of the four flow edges followed by gamma run backwards."""
    rho = np.array([1.0, 0.0, 0.0, 0.0])
    if t == 0:
        return rho
    p = np.asarray(P.base_point, dtype=float)
    for V, sign in ((X, 1.0), (Y, 1.0), (X, -1.0), (Y, -1.0)):
        seg = _flow_segment(V, p, t, sign, steps)
        rho = lift_segment(P, seg, rho)[-1]
        p = seg.points[-1]
    m0 = P.base_point
    back = path_segment(lambda s: commutator_curve(X, Y, m0, t - s), t, steps)
    return lift_segment(P, back, rho)[-1]


@dataclass
class SecondDerivativeReport:
    beta_first: np.ndarray       # fitted beta'(0) in algebra coordinates
    beta_second: np.ndarray      # fitted beta''(0)
    curvature: np.ndarray        # R(v, w) at the base point
    sign: int                    # +1: beta'' = 2 R(v, w); -1: beta'' = 2 R(w, v)
    relative_error: float
    times: np.ndarray

    @property
    def first_derivative_norm(self) -> float:
        return float(np.max(np.abs(self.beta_first)))

    def passes(self, rel_tol: float = 1e-3, first_tol: float = 1e-6) -> bool:
        return self.relative_error <= rel_tol and self.first_derivative_norm <= first_tol

    def to_json(self) -> dict:
        return {"beta_prime_0": self.beta_first.tolist(),
                "beta_double_prime_0": self.beta_second.tolist(),
                "curvature_R_v_w": self.curvature.tolist(),
                "matching_ordering": "2R(v,w)" if self.sign > 0 else "2R(w,v)",
                "sign": self.sign, "relative_error": self.relative_error,
                "times": self.times.tolist()}


FIT_DEGREE = 6


def verify_second_derivative(P: ConnectionPatch, X: VectorField, Y: VectorField,
                             t_max: float = 0.2, samples: int = 8,
                             steps: int = 200) -> SecondDerivativeReport:
    """Fit log beta(t) by a polynomial without constant term and read off
    beta'(0) and beta''(0).

    Both orderings 2R(v, w) and 2R(w, v) are compared; the report keeps the
    one that matches.
    """
    ts = t_max / samples * np.arange(1, samples + 1)
    logs = np.array([_from_imag(qlog(commutator_loop_holonomy(P, X, Y, t, steps)), P.group)
                     for t in ts])
    deg = min(FIT_DEGREE, samples)
    V = np.stack([ts ** k for k in range(1, deg + 1)], axis=1)
    coef, *_ = np.linalg.lstsq(V, logs, rcond=None)
    first, second = coef[0], 2 * coef[1]
    m0 = np.asarray(P.base_point, dtype=float)
    R = curvature(P, m0, _field(X, m0), _field(Y, m0))
    best = None
    for sign in (1, -1):
        target = 2 * sign * R
        scale = float(np.linalg.norm(target))
        err = float(np.linalg.norm(second - target)) / scale if scale else float(np.linalg.norm(second))
        if best is None or err < best[1]:
            best = (sign, err)
    return SecondDerivativeReport(first, second, R, best[0], best[1], ts)


# -- presets and parsing ----------------------------------------------------------

def coordinate_field(axis: int) -> VectorField:
    def V(x, y):
        one, zero = np.ones_like(np.asarray(x, float)), np.zeros_like(np.asarray(x, float))
        return (one, zero) if axis == 0 else (zero, one)
    return V


def _zero_component(dim: int):
    return lambda x, y: np.zeros(np.broadcast(x, y).shape + (dim,))


PRESETS = {
    "zero-u1": ("u1", ["0"], ["0"]),
    "zero-su2": ("su2", ["0", "0", "0"], ["0", "0", "0"]),
    "xdy": ("u1", ["0"], ["x"]),
    "su2-test": ("su2", ["0", "y", "0"], ["x", "0", "0"]),
    "flat-u1": ("u1", ["2*x"], ["2*y"]),
}


def patch_from_expressions(group: str, A_x: list[str], A_y: list[str],
                           base_point=(0.0, 0.0), bounds=((-1.0, 1.0), (-1.0, 1.0)),
                           name: str = "") -> ConnectionPatch:
    """Build a patch from component expressions in x and y (parsed by sympy)."""
    import sympy

    if group not in GROUPS:
        raise ValueError(f"group must be one of {sorted(GROUPS)}")
    dim = GROUPS[group]
    if len(A_x) != dim or len(A_y) != dim:
        raise DimensionMismatch(f"{group} components need {dim} entries")
    x, y = sympy.symbols("x y")

    def compile_(exprs):
        fns = [sympy.lambdify((x, y), sympy.sympify(e, locals={"x": x, "y": y}), "numpy")
               for e in exprs]

        def A(X, Y):
            shape = np.broadcast(X, Y).shape
            return np.stack([np.broadcast_to(np.asarray(f(X, Y), dtype=float), shape)
                             for f in fns], axis=-1)
        return A

    return ConnectionPatch(group, compile_(A_x), compile_(A_y), tuple(base_point),
                           tuple(map(tuple, bounds)), name=name)


def load_patch(source: str, group: str | None = None) -> ConnectionPatch:
    """A preset name, a JSON file path, or an inline JSON object."""
    if source in PRESETS:
        g, ax, ay = PRESETS[source]
        if group is not None and group != g:
            raise ValueError(f"preset {source!r} is a {g} connection")
        return patch_from_expressions(g, ax, ay, name=source)
    text = source
    if not source.lstrip().startswith("{"):
        with open(source) as fh:
            text = fh.read()
    data = json.loads(text)
    g = data.get("group", group)
    if g is None:
        raise ValueError("connection JSON needs a group")
    return patch_from_expressions(g, data["A_x"], data["A_y"],
                                  data.get("base_point", (0.0, 0.0)),
                                  data.get("bounds", ((-1.0, 1.0), (-1.0, 1.0))),
                                  name=data.get("name", ""))

