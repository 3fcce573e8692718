"""Command-line entry point: ``lieper <subcommand> ...``.

Every subcommand except ``reproduce`` prints a JSON run report
``{subcommand, version, inputs_digest, outputs, timings}``.  Exit codes:
0 success, 1 domain error (JSON ``{"error": {"code", "message"}}``),
2 usage error or malformed input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, acceptance
from .cohomology import Cochain, cartan_map, eta_D, is_closed, is_coboundary2, solve_exactness
from .connection import (commutator_loop_holonomy, coordinate_field, load_patch,
                         verify_second_derivative)
from .errors import LieperError
from .invariants import centroid, induced_map_on_V, universal_form
from .lattice import GeneratedSubgroup, is_discrete, torus_example
from .lie import BUILTIN, LieAlgebra, LinearMap, SymBilinearForm, killing_form
from .periods import (constant_map, identity_map, period_3form, power_map,
                      suspension_family, twisted_loop_period)
from .twisted_loop import (SampledTwistedSection, cocycle_identity_check, cokernel,
                           coker_equals_fixed_for_finite_order, omega_phi)


class UsageError(Exception):
    pass


# -- input helpers ---------------------------------------------------------------------

class Inputs:
    """Collects every file and flag that feeds a run, for the input digest."""

    def __init__(self, args: argparse.Namespace):
        self.parts: list[tuple[str, str]] = []
        for k, v in sorted(vars(args).items()):
            if k != "func":
                self.parts.append((k, json.dumps(v, default=str)))

    def read_json(self, path: str):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
        self.parts.append((path, text))
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed JSON in {path}: {exc}") from exc

    def digest(self) -> str:
        h = hashlib.sha256()
        for k, v in self.parts:
            h.update(k.encode())
            h.update(b"\0")
            h.update(v.encode())
            h.update(b"\0")
        return h.hexdigest()


def bundled(name: str) -> str | None:
    """Text of a bundled data file (``su2.json`` etc.), if present."""
    res = resources.files("lieper") / "data" / name
    return res.read_text() if res.is_file() else None


def read_algebra(source: str, inputs: Inputs) -> LieAlgebra:
    """A file path, a builtin name, or the basename of a bundled example file."""
    if Path(source).is_file():
        data = inputs.read_json(source)
    else:
        name = Path(source).name
        stem = name[:-5] if name.endswith(".json") else name
        text = bundled(stem + ".json")
        if text is not None:
            inputs.parts.append((stem, text))
            data = json.loads(text)
        elif stem in BUILTIN:
            L = BUILTIN[stem]()
            inputs.parts.append((stem, json.dumps(L.to_json())))
            return L
        else:
            raise UsageError(f"no algebra file or builtin named {source!r}")
    return LieAlgebra.from_json(data)


def read_matrix(path: str, inputs: Inputs) -> LinearMap:
    data = inputs.read_json(path)
    if isinstance(data, dict):
        data = data.get("matrix")
    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise UsageError("matrix JSON must be a list of rows")
    return LinearMap.from_rows(data)


def read_form(source: str, L: LieAlgebra, inputs: Inputs) -> SymBilinearForm:
    if source == "killing":
        return killing_form(L)
    if source == "universal":
        return universal_form(L).kappa_u
    if source == "normalized":
        return killing_form(L).scaled(Fraction(-1, 4))
    data = inputs.read_json(source)
    table = data.get("table") if isinstance(data, dict) else data
    if not isinstance(table, list) or not table:
        raise UsageError("form JSON must be an n x n table (of scalars or value vectors)")
    n = len(table)
    if isinstance(table[0][0], list):
        d = len(table[0][0])
        return SymBilinearForm.from_values(n, d, lambda i, j: table[i][j])
    return SymBilinearForm.scalar(table)


def _frac_list(v) -> list[str]:
    return [str(x) for x in v]


# -- subcommands ------------------------------------------------------------------------

def cmd_vform(args, inputs):
    L = read_algebra(args.algebra, inputs)
    U = universal_form(L)
    return {"quotient_dim": U.dim, "relation_rank": U.relation_rank,
            "sym_square_dim": U.sym_square_dim, "kappa_u": U.kappa_u.to_json()}


def cmd_centroid(args, inputs):
    L = read_algebra(args.algebra, inputs)
    basis = centroid(L)
    return {"dim": len(basis), "basis": [b.to_json() for b in basis]}


def _exactness(sol) -> dict:
    if isinstance(sol, Cochain):
        return {"exact": True, "primitive": sol.to_json()}
    return sol.to_json()


def cmd_cocycle_check(args, inputs):
    L = read_algebra(args.algebra, inputs)
    kappa = read_form(args.kappa, L, inputs)
    C = cartan_map(L, kappa)
    out = {"value_dim": kappa.value_dim, "cartan": C.to_json(), "closed": is_closed(C, L)}
    sol = solve_exactness(C, L)
    out["cartan_exact"] = _exactness(sol)
    D = None
    if args.derivation:
        D = read_matrix(args.derivation, inputs)
    elif args.ad:
        D = L.ad([Fraction(x) for x in args.ad.split(",")])
    if D is not None:
        eta = eta_D(L, kappa, D)
        lam = is_coboundary2(eta, L)
        out["eta_D"] = eta.to_json()
        out["eta_D_coboundary"] = _exactness(lam)
    return out


def _su2_kappa(source: str, inputs):
    return read_form(source, BUILTIN["su2"](), inputs)


def cmd_period_s3(args, inputs):
    kappa = _su2_kappa(args.kappa, inputs)
    sigma = {"identity": identity_map(), "square": power_map(2),
             "constant": constant_map()}[args.map]
    r = period_3form(kappa, sigma, res=args.res or 48, rel_tol=args.tol)
    out = r.to_json()
    out["reference_8pi2"] = 8 * math.pi ** 2
    return out


def cmd_period_loop(args, inputs):
    kappa = _su2_kappa(args.kappa, inputs)
    twist = read_matrix(args.twist, inputs) if args.twist else None
    n = args.res or 32
    r = twisted_loop_period(kappa, suspension_family(twist), twist, res=(n, n, 2 * n),
                            rel_tol=args.tol)
    out = r.to_json()
    out["reference_4pi2"] = 4 * math.pi ** 2
    return out


def cmd_coker(args, inputs):
    phi = read_matrix(args.phi, inputs)
    C = cokernel(phi)
    out = {"dim": C.dim, "image_basis": [_frac_list(r) for r in C.image_basis],
           "projection": C.projection.to_json() if C.dim else []}
    try:
        out["fixed_space_report"] = coker_equals_fixed_for_finite_order(phi, args.bound).to_json()
    except LieperError as exc:
        out["fixed_space_report"] = {"error": exc.code, "message": str(exc)}
    return out


def cmd_loop_cocycle(args, inputs):
    L = read_algebra(args.algebra, inputs)
    phi = read_matrix(args.twist, inputs)
    kappa = read_form(args.kappa, L, inputs)
    if args.phi_v:
        phi_V = read_matrix(args.phi_v, inputs)
    elif args.kappa == "universal":
        phi_V = induced_map_on_V(universal_form(L), phi, "automorphism")
    else:
        phi_V = LinearMap.identity(kappa.value_dim)
    data = inputs.read_json(args.sections)
    try:
        raw = data["samples"]
        arrays = [np.asarray(s, dtype=float) for s in raw]
        if arrays and arrays[0].ndim == 1:
            arrays = [np.asarray(raw, dtype=float)]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"sections JSON needs a 'samples' list: {exc}") from exc
    secs = [SampledTwistedSection(phi, a, L) for a in arrays]
    if "N" in data and any(s.N != int(data["N"]) for s in secs):
        raise UsageError("declared N does not match the sample count")
    C = cokernel(phi_V)
    pairs = {}
    for i in range(len(secs)):
        for j in range(len(secs)):
            if i != j:
                pairs[f"{i},{j}"] = omega_phi(secs[i], secs[j], kappa, C).tolist()
    out = {"coker_dim": C.dim, "omega_phi": pairs}
    if len(secs) >= 3:
        out["cocycle_residual"] = cocycle_identity_check(*secs[:3], kappa, C)
    return out


def cmd_discrete(args, inputs):
    data = inputs.read_json(args.generators)
    if not isinstance(data, dict) or "vectors" not in data:
        raise UsageError("generator JSON must be an object with 'vectors'")
    if args.constants:
        data = dict(data, constants=args.constants.split(","))
    data.setdefault("constants", ["1"])
    values = {}
    for item in (args.values.split(",") if args.values else []):
        k, _, v = item.partition("=")
        values[k] = float(v)
    try:
        G = GeneratedSubgroup.from_json(data, numeric=args.numeric, values=values)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"malformed generator JSON: {exc}") from exc
    return is_discrete(G).to_json()


def cmd_torus(args, inputs):
    if args.h:
        import sympy
        s = sympy.Symbol("s")
        fn = sympy.lambdify(s, sympy.sympify(args.h, locals={"s": s}), "numpy")
        return torus_example(h=fn, N=args.N).to_json()
    return torus_example(args.integral).to_json()


def cmd_holonomy(args, inputs):
    try:
        P = load_patch(args.A, args.group)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read connection: {exc}") from exc
    X, Y = coordinate_field(0), coordinate_field(1)
    beta = commutator_loop_holonomy(P, X, Y, args.t)
    report = verify_second_derivative(P, X, Y, t_max=args.t_max)
    return {"group": P.group, "t": args.t, "beta": beta.tolist(),
            "verification": report.to_json()}


def cmd_reproduce(args) -> int:
    try:
        keys = acceptance.select(args.only)
    except KeyError as exc:
        raise UsageError(f"unknown criterion {exc.args[0]!r}; choose from "
                         f"{', '.join(acceptance.CRITERIA)}") from exc
    results = acceptance.run(keys)
    if args.json:
        print(json.dumps({"version": __version__,
                          "results": [r.to_json() for r in results]}, default=_jsonable))
    else:
        for r in results:
            print(r.line())
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if all(r.passed for r in results) else 1


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(type(o).__name__)


# -- parser -------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors print the full help, so the valid flags are listed."""

    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lieper", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    p.subcommands = sub.choices

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--json", action="store_true", help="JSON output (default for reports)")
        return sp

    sp = add("vform", cmd_vform, "universal invariant form V(k)")
    sp.add_argument("algebra")
    sp = add("centroid", cmd_centroid, "centroid of k")
    sp.add_argument("algebra")
    sp = add("cocycle-check", cmd_cocycle_check, "Cartan cocycle and eta_D coboundary checks")
    sp.add_argument("algebra")
    sp.add_argument("--kappa", default="killing", help="killing | universal | normalized | FILE")
    sp.add_argument("--derivation", help="matrix JSON of a derivation D")
    sp.add_argument("--ad", help="comma separated x, uses D = ad(x)")
    sp = add("period-s3", cmd_period_s3, "period of C(kappa) over S^3 in SU(2)")
    sp.add_argument("--kappa", default="normalized")
    sp.add_argument("--map", choices=["identity", "square", "constant"], default="identity")
    sp.add_argument("--res", type=int)
    sp.add_argument("--tol", type=float, help="relative error tolerance")
    sp = add("period-loop", cmd_period_loop, "both sides of the loop-period relation")
    sp.add_argument("--kappa", default="normalized")
    sp.add_argument("--twist", help="matrix JSON of an automorphism of su(2)")
    sp.add_argument("--res", type=int, help="S^2 nodes per axis (t uses twice as many)")
    sp.add_argument("--tol", type=float)
    sp = add("coker", cmd_coker, "coker(phi - id) and the fixed-space comparison")
    sp.add_argument("--phi", required=True)
    sp.add_argument("--bound", type=int, default=64)
    sp = add("loop-cocycle", cmd_loop_cocycle, "omega_phi on sampled twisted sections")
    sp.add_argument("algebra")
    sp.add_argument("--twist", required=True)
    sp.add_argument("--sections", required=True)
    sp.add_argument("--kappa", default="universal")
    sp.add_argument("--phi-v", dest="phi_v")
    sp = add("discrete", cmd_discrete, "discreteness of a generated subgroup")
    sp.add_argument("--generators", required=True)
    sp.add_argument("--constants", help="comma separated constant names")
    sp.add_argument("--numeric", action="store_true")
    sp.add_argument("--values", help="name=value pairs for numeric constants")
    sp = add("holonomy", cmd_holonomy, "commutator-loop holonomy and beta''(0)")
    sp.add_argument("--group", choices=["u1", "su2"])
    sp.add_argument("--A", required=True, help="preset name, JSON file or inline JSON")
    sp.add_argument("--t", type=float, default=0.1)
    sp.add_argument("--t-max", dest="t_max", type=float, default=0.2)
    sp = add("torus-example", cmd_torus, "discreteness of Z + Z int h")
    sp.add_argument("--integral", default="alpha", help="rational p/q or a constant name")
    sp.add_argument("--h", help="expression in s, integrated numerically")
    sp.add_argument("--N", type=int, default=256)
    sp = sub.add_parser("reproduce", help="run the reproduction table")
    sp.add_argument("--only", nargs="+")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=None)
    return p


def dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    if extra:
        parser.subcommands[args.subcommand].error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        if args.subcommand == "reproduce":
            return cmd_reproduce(args)
        inputs = Inputs(args)
        t0 = time.perf_counter()
        outputs = args.func(args, inputs)
        report = {"subcommand": args.subcommand, "version": __version__,
                  "inputs_digest": inputs.digest(), "outputs": outputs,
                  "timings": {"total_seconds": time.perf_counter() - t0}}
        print(json.dumps(report, default=_jsonable))
        return 0
    except LieperError as exc:
        print(json.dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return 1
    except (UsageError, ValueError, TypeError) as exc:
        print(f"lieper {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
