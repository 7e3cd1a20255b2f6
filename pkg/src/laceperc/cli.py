"""Command-line front end.

Every subcommand emits a machine-readable document (JSON by default, CSV for
tabular results) to stdout or --out. Stochastic commands take --samples,
--seed, and --threads; results are bit-identical for a fixed nonzero seed
regardless of the thread count, because workers only split the stream range.
Seed 0 asks for OS entropy instead of the reproducible default.

Exit codes: 0 success, 2 usage or domain error, 3 finite-size warning under
--strict, 4 resource budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from fractions import Fraction

from .enumeration import class_count, enumerate_cycles, union_occupation_probability
from .errors import DomainError, ResourceBudgetError
from .lace import oze_residual, pi_hat_estimate
from .lattice import TorusGeometry
from .percolation import (
    Estimate,
    critical_point,
    double_connection,
    triangle_diagrams,
    two_point,
)
from .series import (
    SITE_PC_IN_SIGMA,
    BOND_PC_IN_SIGMA,
    TagMismatchError,
    TruncatedSeries,
    expansion,
    substitute_2d_to_sigma,
    substitute_sigma_to_2d,
)

DEFAULT_SEED = 12345

# ---------------------------------------------------------------------------
# serialization


def _float_str(x: float) -> str:
    # 17 significant digits round-trips every double exactly
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("non-finite value in output")
    return format(float(x), ".17g")


def _json_emit(obj, out: list) -> None:
    """Deterministic JSON writer: insertion-ordered keys, .17g floats,
    Fractions as [numerator, denominator] pairs."""
    if isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(k))
            out.append(": ")
            _json_emit(v, out)
        out.append("}")
    elif isinstance(obj, Fraction):
        out.append(f"[{obj.numerator}, {obj.denominator}]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _json_emit(v, out)
        out.append("]")
    elif isinstance(obj, float):
        out.append(_float_str(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def render_json(payload: dict) -> str:
    parts: list = []
    _json_emit(payload, parts)
    return "".join(parts) + "\n"


def _cell(v) -> str:
    if isinstance(v, float):
        return _float_str(v)
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _flatten(payload: dict, prefix: str = ""):
    """Depth-first CSV columns: nested dicts joined with '_', lists skipped."""
    for k, v in payload.items():
        if k == "schema":
            continue
        if isinstance(v, dict):
            yield from _flatten(v, f"{prefix}{k}_")
        elif isinstance(v, (list, tuple)):
            continue
        else:
            yield f"{prefix}{k}", v


def scalar_csv(payload: dict) -> str:
    cols = list(_flatten(payload))
    return render_csv([c for c, _ in cols], [[v for _, v in cols]])


# ---------------------------------------------------------------------------
# shared argument handling


def _geometry(args) -> TorusGeometry:
    return TorusGeometry(d=args.d, L=args.L)


def _seed(args) -> int:
    if args.seed == 0:
        return secrets.randbits(63)
    return args.seed


def _parse_point(text: str, d: int):
    try:
        x = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise DomainError(f"cannot parse point {text!r}; expected comma-separated integers")
    if len(x) != d:
        raise DomainError(f"point {text!r} has {len(x)} coordinates; --d is {d}")
    return x


def _estimate_fields(e: Estimate) -> dict:
    """Nested estimate block; n is the reduction count (samples or blocks)."""
    return {"estimate": e.mean, "stderr": e.stderr, "n": e.n}


def _scalar_estimate(e: Estimate) -> dict:
    return {"estimate": e.mean, "stderr": e.stderr}


def _rationals(coeffs) -> list:
    return [Fraction(c) for c in coeffs]


# ---------------------------------------------------------------------------
# subcommands: exact arithmetic


def cmd_expand(args):
    res = expansion(args.order)
    payload = {
        "schema": "laceperc/expand/1",
        "order": args.order,
        "variable": "t",
        "q": _rationals(res.q_series.coeffs),
        "pc": _rationals(res.pc_series.coeffs),
        "rounds": res.rounds,
    }
    if args.format == "csv":
        rows = []
        for k, c in enumerate(res.pc_series.coeffs):
            q = res.q_series.coeffs[k - 1] if k >= 1 else ""
            rows.append([k, Fraction(c), q if q == "" else Fraction(q)])
        return payload, render_csv(["power", "pc_coefficient", "q_coefficient"], rows), 0
    return payload, None, 0


_BUILTIN_SERIES = {"site": SITE_PC_IN_SIGMA, "bond": BOND_PC_IN_SIGMA}


def _load_series(args) -> TruncatedSeries:
    if args.builtin is not None:
        return _BUILTIN_SERIES[args.builtin]
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        var = doc["variable"]
        raw = doc["coefficients"]
        coeffs = [Fraction(int(c[0]), int(c[1])) if isinstance(c, list) else Fraction(c) for c in raw]
    except (KeyError, TypeError, IndexError) as exc:
        raise DomainError(f"malformed series document: {exc}")
    return TruncatedSeries.make(var, coeffs, order=doc.get("order"))


def cmd_convert(args):
    a = _load_series(args)
    b = substitute_sigma_to_2d(a) if a.var == "s" else substitute_2d_to_sigma(a)
    payload = {
        "schema": "laceperc/convert/1",
        "input_variable": a.var,
        "variable": b.var,
        "order": b.order,
        "coefficients": _rationals(b.coeffs),
    }
    if args.format == "csv":
        rows = [[k, Fraction(c)] for k, c in enumerate(b.coeffs)]
        return payload, render_csv(["power", "coefficient"], rows), 0
    return payload, None, 0


# ---------------------------------------------------------------------------
# subcommands: enumeration


def cmd_count(args):
    value = class_count(args.d, args.l1, args.linf)
    payload = {
        "schema": "laceperc/count/1",
        "query": {"l1": args.l1, "linf": args.linf},
        "d": args.d,
        "value": value,
    }
    if args.format == "csv":
        return payload, scalar_csv({"l1": args.l1, "linf": args.linf, "d": args.d, "value": value}), 0
    return payload, None, 0


def cmd_cycles(args):
    x = _parse_point(args.x, args.d)
    fam = enumerate_cycles(args.d, x, args.length)
    poly = union_occupation_probability(fam)
    payload = {
        "schema": "laceperc/cycles/1",
        "d": args.d,
        "x": list(x),
        "length": args.length,
        "n_cycles": len(fam.cycles),
        "interiors": [sorted(list(pt) for pt in interior) for interior in fam.interiors],
        "union_probability": str(poly),
    }
    if args.format == "csv":
        rows = [
            [i, len(interior), " ".join(str(pt) for pt in sorted(interior))]
            for i, interior in enumerate(fam.interiors)
        ]
        return payload, render_csv(["cycle", "interior_size", "interior"], rows), 0
    return payload, None, 0


# ---------------------------------------------------------------------------
# subcommands: Monte Carlo


def cmd_pc(args):
    seed = _seed(args)
    e = critical_point(_geometry(args), args.samples, seed, threads=args.threads)
    payload = {
        "schema": "laceperc/pc/1",
        "d": args.d,
        "L": args.L,
        "samples": args.samples,
        "seed": seed,
        **_scalar_estimate(e),
    }
    return payload, scalar_csv(payload) if args.format == "csv" else None, 0


def cmd_tau(args):
    seed = _seed(args)
    x = _parse_point(args.x, args.d)
    e = two_point(
        _geometry(args), args.p, x, args.samples, seed,
        variant=args.variant, level=args.level, threads=args.threads,
    )
    payload = {
        "schema": "laceperc/tau/1",
        "d": args.d,
        "L": args.L,
        "p": args.p,
        "x": list(x),
        "variant": args.variant,
        "level": args.level,
        "samples": args.samples,
        "seed": seed,
        **_scalar_estimate(e),
    }
    if args.format == "csv":
        flat = dict(payload)
        flat["x"] = " ".join(str(c) for c in x)
        flat["level"] = "" if args.level is None else args.level
        return payload, scalar_csv(flat), 0
    return payload, None, 0


def cmd_double(args):
    seed = _seed(args)
    x = _parse_point(args.x, args.d)
    e = double_connection(_geometry(args), args.p, x, args.samples, seed, threads=args.threads)
    payload = {
        "schema": "laceperc/double/1",
        "d": args.d,
        "L": args.L,
        "p": args.p,
        "x": list(x),
        "samples": args.samples,
        "seed": seed,
        **_scalar_estimate(e),
    }
    if args.format == "csv":
        flat = dict(payload)
        flat["x"] = " ".join(str(c) for c in x)
        return payload, scalar_csv(flat), 0
    return payload, None, 0


def cmd_triangle(args):
    seed = _seed(args)
    t = triangle_diagrams(
        _geometry(args), args.p, args.samples, seed,
        threads=args.threads, tau_floor=args.tau_floor, blocks=args.blocks,
    )
    payload = {
        "schema": "laceperc/triangle/1",
        "d": args.d,
        "L": args.L,
        "p": args.p,
        "samples": args.samples,
        "seed": seed,
        "blocks": args.blocks,
        "sup_bullet": _estimate_fields(t.sup_bullet),
        "sup_bullet_circ": _estimate_fields(t.sup_bullet_circ),
        "sup_bullet_bullet_circ": _estimate_fields(t.sup_bullet_bullet_circ),
        "at0_bullet": _estimate_fields(t.at0_bullet),
        "at0_bullet_circ": _estimate_fields(t.at0_bullet_circ),
        "tau_far": _estimate_fields(t.tau_far),
        "tau_floor": t.tau_floor,
        "finite_size_warning": t.finite_size_warning,
    }
    code = 3 if (args.strict and t.finite_size_warning) else 0
    return payload, scalar_csv(payload) if args.format == "csv" else None, code


def cmd_pi(args):
    seed = _seed(args)
    p = args.p if args.p is not None else 1.0 / (2 * args.d)
    e = pi_hat_estimate(
        args.n, _geometry(args), p, args.samples, seed,
        radius=args.radius, threads=args.threads,
    )
    payload = {
        "schema": "laceperc/pi/1",
        "n": args.n,
        "d": args.d,
        "L": args.L,
        "p": p,
        "radius": args.radius,
        "samples": args.samples,
        "seed": seed,
        **_scalar_estimate(e),
    }
    return payload, scalar_csv(payload) if args.format == "csv" else None, 0


def cmd_oze(args):
    seed = _seed(args)
    r = oze_residual(
        _geometry(args), args.p, args.samples, seed,
        radius=args.radius, threads=args.threads,
    )
    payload = {
        "schema": "laceperc/oze/1",
        "d": args.d,
        "L": args.L,
        "p": args.p,
        "radius": args.radius,
        "samples": args.samples,
        "seed": seed,
        "residual": r.residual,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "pi_hat": r.pi_hat,
        "chi": _estimate_fields(r.chi),
        "pi0": _estimate_fields(r.pi0),
        "pi1": _estimate_fields(r.pi1),
        "pi2": _estimate_fields(r.pi2),
    }
    return payload, scalar_csv(payload) if args.format == "csv" else None, 0


# ---------------------------------------------------------------------------
# parser


def _add_output_flags(sp):
    sp.add_argument("--format", choices=("json", "csv"), default="json",
                    help="output format (default json)")
    sp.add_argument("--out", metavar="PATH", default=None,
                    help="write the document to PATH instead of stdout")
    sp.add_argument("--strict", action="store_true",
                    help="exit 3 when the result carries a finite-size warning")


def _add_mc_flags(sp, samples: int):
    sp.add_argument("--samples", type=int, default=samples,
                    help=f"independent configurations (default {samples})")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                    help=f"RNG seed; 0 draws one from OS entropy (default {DEFAULT_SEED})")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker processes; never changes the result (default 1)")


def _add_geometry_flags(sp, L: int):
    sp.add_argument("--d", type=int, required=True, help="lattice dimension")
    sp.add_argument("--L", type=int, default=L,
                    help=f"torus side length (default {L})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="laceperc",
        description="Site-percolation threshold expansion toolkit: exact series, "
        "combinatorial counts, and Monte Carlo estimators on Z^d tori.",
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("expand", help="solve the threshold fixed point as exact rational series")
    sp.add_argument("--order", type=int, required=True, help="truncation order in 1/(2d)")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("convert", help="change series variable between 1/(2d-1) and 1/(2d)")
    grp = sp.add_mutually_exclusive_group(required=True)
    grp.add_argument("--input", metavar="PATH", help="series document {variable, order, coefficients}")
    grp.add_argument("--builtin", choices=sorted(_BUILTIN_SERIES),
                     help="use a built-in reference threshold series")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("count", help="count lattice points with given l1 and linf norms")
    sp.add_argument("--d", type=int, required=True, help="lattice dimension")
    sp.add_argument("--l1", type=int, required=True, help="l1 norm of the class")
    sp.add_argument("--linf", type=int, required=True, help="linf norm of the class")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("cycles", help="enumerate self-avoiding cycles through 0 and x")
    sp.add_argument("--d", type=int, required=True, help="lattice dimension")
    sp.add_argument("--x", required=True, help="target point, comma-separated (e.g. 1,1,1)")
    sp.add_argument("--length", type=int, required=True, help="cycle length in edges")
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("pc", help="wrapping-threshold estimate of the critical density")
    _add_geometry_flags(sp, L=32)
    _add_mc_flags(sp, samples=200)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_pc)

    sp = sub.add_parser("tau", help="two-point connection probability, optionally by chemical distance")
    _add_geometry_flags(sp, L=32)
    sp.add_argument("--p", type=float, required=True, help="occupation density")
    sp.add_argument("--x", required=True, help="target point, comma-separated")
    sp.add_argument("--variant", choices=("plain", "chem_ge", "chem_le", "chem_eq"),
                    default="plain", help="restrict by chemical distance (default plain)")
    sp.add_argument("--level", type=int, default=None, help="distance level for chem_* variants")
    _add_mc_flags(sp, samples=2000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_tau)

    sp = sub.add_parser("double", help="probability of two interior-disjoint connections 0 to x")
    _add_geometry_flags(sp, L=16)
    sp.add_argument("--p", type=float, required=True, help="occupation density")
    sp.add_argument("--x", required=True, help="target point, comma-separated")
    _add_mc_flags(sp, samples=2000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_double)

    sp = sub.add_parser("triangle", help="open-triangle diagram suprema via FFT convolution")
    _add_geometry_flags(sp, L=16)
    sp.add_argument("--p", type=float, required=True, help="occupation density")
    sp.add_argument("--tau-floor", type=float, default=1e-3,
                    help="far-field mean above this flags finite-size trouble (default 1e-3)")
    sp.add_argument("--blocks", type=int, default=10,
                    help="stream blocks for the error bars (default 10)")
    _add_mc_flags(sp, samples=2000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_triangle)

    sp = sub.add_parser("pi", help="Monte Carlo expansion coefficient of order n")
    sp.add_argument("--n", type=int, required=True, choices=(0, 1, 2),
                    help="coefficient order")
    _add_geometry_flags(sp, L=12)
    sp.add_argument("--p", type=float, default=None,
                    help="occupation density (default 1/(2d))")
    sp.add_argument("--radius", type=int, default=4,
                    help="l1 truncation radius for the target sum (default 4)")
    _add_mc_flags(sp, samples=2000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_pi)

    sp = sub.add_parser("oze", help="relative residual of the two-point identity")
    _add_geometry_flags(sp, L=12)
    sp.add_argument("--p", type=float, required=True, help="occupation density")
    sp.add_argument("--radius", type=int, default=4,
                    help="l1 truncation radius for coefficient sums (default 4)")
    _add_mc_flags(sp, samples=4000)
    _add_output_flags(sp)
    sp.set_defaults(func=cmd_oze)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        payload, table, code = args.func(args)
    except ResourceBudgetError as exc:
        doc = {"schema": "laceperc/error/1", "error": "resource-budget", "message": str(exc)}
        sys.stderr.write(render_json(doc))
        return 4
    except (DomainError, TagMismatchError, ValueError, OSError) as exc:
        sys.stderr.write(f"laceperc: error: {exc}\n")
        return 2
    text = table if args.format == "csv" else render_json(payload)
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
