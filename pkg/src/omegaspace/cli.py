"""Command-line front end.

Exit codes: 0 success, 2 user error (bad flags, specs, points),
3 numerical failure (quadrature or fitting).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .calculus import ContourError, QuadratureConfig, laplacian_config, laplacian_omega, metric_pullback
from .expr import ExprError, parse
from .invariance import (
    ACCEPT_THRESHOLD,
    REJECT_THRESHOLD,
    OmegaAutomorphism,
    config_grid,
    config_invariance_table,
    default_config_battery,
    default_omega_battery,
    detect_mobius,
    laplace_invariance_table,
    omega_grid,
    polynomial_perturbation,
    shear_automorphism_G,
    shear_omega,
    config_pair_map,
    verdict,
)
from .models import (
    FitError,
    SpherePoint,
    from_config,
    psi_minus,
    psi_minus_inv,
    psi_plus,
    psi_plus_inv,
    stereographic_pi,
    stereographic_S,
    to_config,
)
from .riemann_core import INF, DomainError, MobiusMap, OmegaPoint, ext, ext_isclose, ext_to_json
from .schauder import CoeffArray, extract_coeffs, fourier_restrict, project_future, project_past, series_eval

EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


# -- helpers -----------------------------------------------------------------

def _cfg(args) -> QuadratureConfig:
    return QuadratureConfig(
        radius=args.radius if args.radius is not None else 0.25,
        samples=args.samples if args.samples is not None else 32,
        singular_margin=args.singular_margin,
    )


def _emit(args, payload, text: str | None = None):
    out = text if text is not None else json.dumps(payload, indent=2) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(out)
    else:
        with open(args.out, "w") as fh:
            fh.write(out)


def _read_json_arg(value: str):
    """A JSON document given inline or as a path to a file."""
    if os.path.exists(value):
        with open(value) as fh:
            return json.load(fh)
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def _load_coeffs(path: str) -> CoeffArray:
    try:
        with open(path) as fh:
            return CoeffArray.from_json(json.load(fh))
    except (OSError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read coefficient file {path}: {exc}") from exc


def parse_point(text: str) -> list:
    """``"0.5+0.1i, inf"`` or a JSON list -> list of extended complex numbers."""
    text = text.strip()
    if text.startswith("["):
        items = json.loads(text)
        items = [str(x) if not isinstance(x, dict) else complex(x["re"], x.get("im", 0)) for x in items]
    else:
        items = [s for s in text.split(",")]
    try:
        return [ext(x) if not isinstance(x, str) else ext(x.strip()) for x in items]
    except ValueError as exc:
        raise UsageError(f"cannot parse point {text!r}: {exc}") from exc


def _function(spec: str):
    try:
        return parse(spec)
    except ExprError as exc:
        raise UsageError(f"bad function spec {spec!r}: {exc}") from exc


# -- map specs ---------------------------------------------------------------

class MapSpec:
    """A map specification resolved for both models."""

    def __init__(self, omega, config, automorphism=None):
        self.omega = omega
        self.config = config
        self.automorphism = automorphism


def _compose_vec(f, g):
    def h(z, w):
        return f(*g(z, w))

    return h


def resolve_map(spec) -> MapSpec:
    """Map specs: ``"identity"``, ``"shear:g=<expr in z>"``, ``"perturb:seed=<n>[,eps=<x>]"``,
    ``{"mobius": {"a":..,"b":..,"c":..,"d":..}, "swap": bool}``, ``{"compose": [outer, ..., inner]}``."""
    if isinstance(spec, str):
        s = spec.strip()
        if s == "identity":
            ident = OmegaAutomorphism.identity()
            return MapSpec(ident, lambda z, w: (z, w), ident)
        if s.startswith("shear:"):
            body = s[len("shear:"):]
            if not body.startswith("g="):
                raise UsageError(f"shear spec must look like shear:g=<expr>, got {spec!r}")
            gsrc = body[2:]
            g = (lambda x: x) if gsrc == "id" else _univariate(gsrc)
            return MapSpec(shear_omega(g), shear_automorphism_G(g))
        if s.startswith("perturb:"):
            opts = dict(kv.split("=", 1) for kv in s[len("perturb:"):].split(",") if kv)
            try:
                rng = np.random.default_rng(int(opts.get("seed", 0)))
                T = polynomial_perturbation(rng, float(opts.get("eps", 0.1)))
            except ValueError as exc:
                raise UsageError(f"bad perturbation spec {spec!r}") from exc
            return MapSpec(T, T)
        raise UsageError(f"unknown map spec {spec!r}")
    if isinstance(spec, dict) and "mobius" in spec:
        try:
            psi = MobiusMap.from_json(spec["mobius"])
        except (KeyError, ValueError) as exc:
            raise UsageError(f"bad Moebius entries: {exc}") from exc
        swap = bool(spec.get("swap", False))
        A = OmegaAutomorphism(psi, swap)
        return MapSpec(A, config_pair_map(psi, swap), A)
    if isinstance(spec, dict) and "compose" in spec:
        parts = [resolve_map(p) for p in spec["compose"]]
        if not parts:
            raise UsageError("compose needs at least one map")
        om, cf, aut = parts[-1].omega, parts[-1].config, parts[-1].automorphism
        for p in reversed(parts[:-1]):
            om, cf = _compose_vec(p.omega, om), _compose_vec(p.config, cf)
            aut = p.automorphism @ aut if (aut is not None and p.automorphism is not None) else None
        return MapSpec(aut if aut is not None else om, cf, aut)
    raise UsageError(f"unrecognised map spec {spec!r}")


def _univariate(src: str):
    e = _function(src)
    if "w" in e.variables:
        raise UsageError("shear function g must depend on z only")
    return lambda x: e(x, np.zeros_like(x))


# -- subcommands -------------------------------------------------------------

def cmd_expand(args):
    f = _function(args.input)
    N = args.order
    M = args.samples if args.samples is not None else max(64, 2 * N + 2)
    r = args.radius if args.radius is not None else 1.0
    try:
        S = extract_coeffs(f, N, M, r)
    except ValueError as exc:
        if isinstance(exc, ExprError):
            raise
        raise UsageError(str(exc)) from exc
    _emit(args, S.to_json())


def cmd_eval(args):
    z, w = _two(parse_point(args.point))
    if args.coeffs:
        S = _load_coeffs(args.coeffs)
        val = series_eval(S, z, w)
    elif args.input:
        if z is INF or w is INF:
            raise UsageError("function specs are evaluated at finite points only")
        val = complex(_function(args.input)(np.array([z]), np.array([w]))[0])
    else:
        raise UsageError("eval needs --coeffs or --input")
    _emit(args, {"point": [ext_to_json(z), ext_to_json(w)], "value": ext_to_json(val)})


def cmd_project(args):
    S = _load_coeffs(args.coeffs)
    P = project_future(S) if args.part == "future" else project_past(S)
    _emit(args, P.to_json())


def cmd_restrict(args):
    if args.coeffs:
        S = _load_coeffs(args.coeffs)
        f = lambda z, w: series_eval(S, z, w)  # noqa: E731
    elif args.input:
        f = _function(args.input)
    else:
        raise UsageError("restrict needs --coeffs or --input")
    M = args.samples if args.samples is not None else 64
    res = fourier_restrict(f, args.diagonal, args.r, M)
    _emit(args, {"diagonal": args.diagonal, "r": args.r, **res.to_json()})


def cmd_laplacian(args):
    z, w = _two(parse_point(args.point))
    if z is INF or w is INF:
        raise UsageError("laplacian is evaluated at finite points only")
    f = _function(args.input)
    cfg = _cfg(args)
    if args.model == "config":
        val = laplacian_config(f, z, w, cfg)
    else:
        if z * w == 1:
            raise UsageError("point is not in Omega (z*w = 1)")
        val = laplacian_omega(f, z, w, cfg)
    _emit(args, {"model": args.model, "point": [ext_to_json(z), ext_to_json(w)], "value": ext_to_json(val)})


def cmd_invariance_check(args):
    spec = resolve_map(_read_json_arg(args.map))
    cfg = _cfg(args)
    accept = args.tolerance if args.tolerance is not None else ACCEPT_THRESHOLD
    if args.model == "omega":
        battery = default_omega_battery()
        table = laplace_invariance_table(spec.omega, battery, omega_grid(), cfg)
        detected = detect_mobius(spec.omega)
    else:
        battery = default_config_battery()
        table = config_invariance_table(spec.config, battery, config_grid(), cfg)
        detected = None
    per_fn = table.max(axis=1)
    resid = float(per_fn.max())
    payload = {
        "model": args.model,
        "max_residual": resid,
        "verdict": verdict(resid, accept, REJECT_THRESHOLD),
        "per_function": [{"function": f.name, "max_residual": float(r)} for f, r in zip(battery, per_fn)],
    }
    if args.model == "omega":
        payload["detected"] = detected.to_json() if detected is not None else None
    _emit(args, payload)


def cmd_metric_check(args):
    spec = resolve_map(_read_json_arg(args.map))
    cfg = _cfg(args)
    tol = args.tolerance if args.tolerance is not None else ACCEPT_THRESHOLD
    rows, worst = [], 0.0
    for z, w in omega_grid():
        c = metric_pullback(spec.omega, z, w, cfg)
        target = 1 / (1 - z * w) ** 2
        dev = max(abs(c.c_zz), abs(c.c_ww), abs(c.c_zw - target))
        worst = max(worst, dev)
        rows.append({
            "point": [ext_to_json(z), ext_to_json(w)],
            "c_zz": ext_to_json(c.c_zz),
            "c_zw": ext_to_json(c.c_zw),
            "c_ww": ext_to_json(c.c_ww),
        })
    _emit(args, {"max_deviation": worst, "verdict": "isometry" if worst < tol else "not_isometry", "points": rows})


MODELS = ("omega", "config", "sphere", "plus", "minus")


def _to_omega(model: str, coords: list) -> OmegaPoint:
    if model == "sphere":
        if len(coords) != 3 or any(c is INF for c in coords):
            raise UsageError("sphere points need three finite coordinates")
        return stereographic_pi(SpherePoint(*coords))
    z, w = _two(coords)
    if model == "omega":
        return OmegaPoint(z, w)
    if model == "config":
        return from_config(z, w)
    if z is INF or w is INF:
        raise UsageError("C^2 points must be finite")
    return psi_plus_inv(z, w) if model == "plus" else psi_minus_inv(z, w)


def _from_omega(model: str, p: OmegaPoint) -> list:
    if model == "omega":
        return [p.z, p.w]
    if model == "config":
        return list(to_config(p.z, p.w))
    if model == "sphere":
        s = stereographic_S(p.z, p.w)
        return [s.z1, s.z2, s.z3]
    if model == "plus":
        return list(psi_plus(p.z, p.w))
    return list(psi_minus(p.z, p.w))


def cmd_transform(args):
    coords = parse_point(args.point)
    p = _to_omega(args.src, coords)
    out = _from_omega(args.dst, p)
    back = _from_omega(args.src, _to_omega(args.dst, out))
    ok = len(back) == len(coords) and all(ext_isclose(a, b, 1e-12) for a, b in zip(back, coords))
    _emit(args, {"model": args.dst, "point": [ext_to_json(c) for c in out], "roundtrip_ok": ok})


CONVERGENCE_GRID = 20
CONVERGENCE_RADIUS = 0.6


def convergence_points():
    """Fixed 20 x 20 product grid in the bidisk of radius 0.6."""
    k = np.arange(CONVERGENCE_GRID)
    rho = CONVERGENCE_RADIUS * np.sqrt((k + 0.5) / CONVERGENCE_GRID)
    zs = rho * np.exp(2.399963j * k)
    ws = rho[::-1] * np.exp(2.399963j * k + 0.5j)
    return np.meshgrid(zs, ws, indexing="ij")


def convergence_table(f, orders, M=None, r=1.0):
    Z, W = convergence_points()
    exact = np.asarray(f(Z, W), dtype=complex)
    rows = []
    for N in orders:
        S = extract_coeffs(f, N, M or max(64, 2 * N + 2), r)
        err = float(np.max(np.abs(series_eval(S, Z, W) - exact)))
        rows.append((N, err))
    return rows


def cmd_convergence(args):
    f = _function(args.input)
    try:
        orders = [int(s) for s in args.orders.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --orders {args.orders!r}") from exc
    if any(n < 0 for n in orders):
        raise UsageError("orders must be nonnegative")
    rows = convergence_table(f, orders, args.samples, args.radius if args.radius is not None else 1.0)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["N", "max_error"])
    for N, err in rows:
        wr.writerow([N, f"{err:.6e}"])
    _emit(args, None, buf.getvalue())


def _two(coords):
    if len(coords) != 2:
        raise UsageError(f"expected a point with two coordinates, got {len(coords)}")
    return coords[0], coords[1]


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--samples", type=int, default=None, help="points per quadrature circle")
    common.add_argument("--radius", type=float, default=None, help="contour radius")
    common.add_argument("--singular-margin", type=float, default=0.5, dest="singular_margin")
    common.add_argument("--tolerance", type=float, default=None, help="acceptance threshold")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output path (default stdout)")

    ap = argparse.ArgumentParser(prog="omegaspace", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="Schauder coefficients of a function")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("eval", parents=[common], help="evaluate a coefficient file or function")
    p.add_argument("--coeffs")
    p.add_argument("--input")
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("project", parents=[common], help="past or future part of a coefficient file")
    p.add_argument("--coeffs", required=True)
    p.add_argument("--part", choices=("past", "future"), required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("restrict", parents=[common], help="Fourier modes on the disk or sphere diagonal")
    p.add_argument("--coeffs")
    p.add_argument("--input")
    p.add_argument("--diagonal", choices=("disk", "sphere"), default="disk")
    p.add_argument("--r", type=float, default=0.5)
    p.set_defaults(func=cmd_restrict)

    p = sub.add_parser("laplacian", parents=[common], help="invariant Laplacian at a point")
    p.add_argument("--input", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--model", choices=("omega", "config"), default="omega")
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("invariance-check", parents=[common], help="Laplacian invariance residual of a map")
    p.add_argument("--map", required=True)
    p.add_argument("--model", choices=("omega", "config"), default="omega")
    p.set_defaults(func=cmd_invariance_check)

    p = sub.add_parser("metric-check", parents=[common], help="pullback of the holomorphic metric")
    p.add_argument("--map", required=True)
    p.set_defaults(func=cmd_metric_check)

    p = sub.add_parser("transform", parents=[common], help="move a point between models")
    p.add_argument("--point", required=True)
    p.add_argument("--from", dest="src", choices=MODELS, required=True)
    p.add_argument("--to", dest="dst", choices=MODELS, required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("convergence", parents=[common], help="truncation error table (CSV)")
    p.add_argument("--input", required=True)
    p.add_argument("--orders", default="2,4,8,12,16")
    p.set_defaults(func=cmd_convergence)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        args.func(args)
    except (ContourError, FitError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ExprError, DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
