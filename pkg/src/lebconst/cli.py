"""Command-line interface.

Subcommands: compute (one polytope, one record), study (family scaling run
with CSV/plot-data/figure outputs and fit summaries), fm (show elimination
branches and signed forms), kernel-check (random identity suites),
triangulate, and fit (refit an existing CSV).

Usage errors exit 2; computation errors print the module error name once
and exit 1.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import InsufficientData, LebconstError, MissingInscribedBox
from .experiments import (
    FAMILY_KINDS,
    FIT_MODELS,
    FamilySpec,
    MeasurementRecord,
    bound_ratios,
    fit_log_model,
    hardy_lower_bound,
    lebesgue_constant,
    random_hrep,
    read_records,
    scale_study,
)
from .fmelim import eliminate, nested_count, to_signed_prefix_forms
from .geometry import VRep, as_hrep, lattice_points, load_polytope, triangulate, vrep_from_hrep
from .kernel import eval_direct, eval_f, eval_forms, eval_g, eval_nested, split_applicable
from .quadrature import QuadratureConfig

_CFG_KEYS = {
    "oversample": "oversample",
    "levels": "max_levels",
    "tol": "tol",
    "budget": "budget",
    "jobs": "jobs",
    "tile_cells": "tile_cells",
    "grid_offset": "grid_offset",
}


def _add_quad_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--oversample", type=int, help="grid points per degree+1 per axis (default 8)")
    sub.add_argument("--levels", type=int, help="dyadic refinement levels (default 3)")
    sub.add_argument("--tol", type=float, help="relative two-level agreement target (default 1e-5)")
    sub.add_argument("--budget", type=int, help="total grid point cap (default 1e9)")
    sub.add_argument("--jobs", type=int, help="worker threads for grid tiles (default 1)")
    sub.add_argument("--config", help="JSON file with quadrature settings; flags win")


def _build_config(args, parser: argparse.ArgumentParser) -> QuadratureConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"cannot read config file: {exc}")
        for key, val in raw.items():
            if key not in _CFG_KEYS:
                parser.error(f"unknown config key {key!r}")
            data[_CFG_KEYS[key]] = val
    for flag in ("oversample", "levels", "tol", "budget", "jobs"):
        val = getattr(args, flag, None)
        if val is not None:
            data[_CFG_KEYS[flag]] = val
    try:
        return QuadratureConfig(**data)
    except (TypeError, ValueError) as exc:
        parser.error(str(exc))


def _parse_scales(text: str) -> List[int]:
    """Either a:b:xk (geometric from a to b by factor k) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].startswith("x"):
            raise ValueError("scale syntax is a:b:xk")
        a, b, k = int(parts[0]), int(parts[1]), int(parts[2][1:])
        if a < 1 or b < a or k < 2:
            raise ValueError("scale range needs 1 <= a <= b and a factor >= 2")
        scales = []
        n = a
        while n <= b:
            scales.append(n)
            n *= k
        return scales
    scales = [int(tok) for tok in text.split(",") if tok]
    if not scales:
        raise ValueError("empty scale list")
    return scales


def _record_line(r: MeasurementRecord) -> str:
    n = ",".join(str(v) for v in r.nvec)
    return (
        f"family={r.family} params={r.params} p={r.p:g} value={r.value:.10g} "
        f"error={r.error:.3g} s={r.s} n=({n}) count={r.count} seconds={r.seconds:.3f}"
    )


def _fit_line(fit) -> str:
    names = {
        "oned": ("a", "b"),
        "skopina": ("b",),
        "kuznetsova": ("b", "c"),
        "logprod": ("b",),
        "power": ("b",),
    }[fit.model]
    coeffs = " ".join(f"{n}={c:.6g}" for n, c in zip(names, fit.coefficients))
    return (
        f"fit model={fit.model} {coeffs} residual={fit.residual:.3g} "
        f"window=n>={fit.window[0]} used={fit.window[1]}"
    )


def _affine_expr(constant, coeffs, names: Sequence[str]) -> str:
    """Bound value constant - (coeffs, k) rendered with variable names."""
    terms = []
    for c, name in zip(coeffs, names):
        if c == 0:
            continue
        mag = abs(c)
        term = name if mag == 1 else f"{mag}*{name}"
        # bound convention stores the negated coefficient
        terms.append(("- " if c > 0 else "+ ") + term)
    if constant != 0 or not terms:
        head = [str(constant)]
    else:
        head = []
    expr = " ".join(head + terms)
    if not head:
        expr = expr[2:] if expr.startswith("+ ") else "-" + expr[2:]
    return expr


def cmd_compute(args, parser) -> int:
    cfg = _build_config(args, parser)
    rec = lebesgue_constant(as_hrep(load_polytope(args.polytope)), args.p, cfg)
    if args.json:
        print(json.dumps(asdict(rec)))
    else:
        print(_record_line(rec))
    return 0


def _default_model(fam: FamilySpec, p: float) -> str:
    if p != 1:
        return "power"
    if fam.kind == "box" and fam.dim == 1:
        return "oned"
    if fam.kind in ("simplex", "polygon") and fam.dim == 2:
        return "skopina"
    if fam.kind == "rhomb":
        return "kuznetsova"
    return "logprod"


def cmd_study(args, parser) -> int:
    try:
        aspect = tuple(int(tok) for tok in args.aspect.split(",")) if args.aspect else ()
        fam = FamilySpec(kind=args.family, dim=args.dim, aspect=aspect, path=args.path)
        scales = _parse_scales(args.scales)
    except ValueError as exc:
        parser.error(str(exc))
    cfg = _build_config(args, parser)
    out = Path(args.out) if args.out else Path(f"study_{fam.kind}_p{args.p:g}.csv")
    records = scale_study(fam, scales, args.p, cfg, out_csv=out)
    for rec in records:
        print(_record_line(rec))

    models = args.fit or [_default_model(fam, args.p)]
    first_fit = None
    for model in models:
        try:
            fit = fit_log_model(records, model, args.min_scale)
        except InsufficientData as exc:
            print(f"fit model={model} skipped ({exc})")
            continue
        if first_fit is None:
            first_fit = fit
        print(_fit_line(fit))

    finite = [r for r in records if math.isfinite(r.value)]
    hardy_ratios = []
    for r in finite:
        hb = hardy_lower_bound(fam.instantiate(r.scale).hrep, args.p)
        if hb > 0:
            hardy_ratios.append(r.value / hb)
    if hardy_ratios:
        print(f"value/hardy band: [{min(hardy_ratios):.4f}, {max(hardy_ratios):.4f}]")

    table = None
    svals = [r.s for r in finite if r.s > 0]
    if svals and finite:
        try:
            table = bound_ratios(finite, max(svals))
            print(
                f"lower ratio band: [{table.lower_band[0]:.4f}, {table.lower_band[1]:.4f}] "
                f"upper ratio band: [{table.upper_band[0]:.4f}, {table.upper_band[1]:.4f}]"
            )
        except MissingInscribedBox:
            pass

    from . import report

    written = [str(out), str(out.with_suffix(".json"))]
    dat = out.with_suffix(".dat")
    report.write_study_data(dat, records)
    written.append(str(dat))
    png = out.with_suffix(".png")
    report.render_study_figure(png, records, f"{fam.label()} p={args.p:g}", first_fit)
    written.append(str(png))
    if table is not None:
        rdat = out.with_name(out.stem + "_ratio.dat")
        report.write_ratio_data(rdat, table)
        rpng = out.with_name(out.stem + "_ratio.png")
        report.render_ratio_figure(rpng, table, fam.label())
        written += [str(rdat), str(rpng)]
    print("wrote " + " ".join(written))
    return 0


def cmd_fm(args, parser) -> int:
    h = as_hrep(load_polytope(args.polytope))
    order = None
    if args.order:
        try:
            order = tuple(int(tok) - 1 for tok in args.order.split(","))
        except ValueError as exc:
            parser.error(str(exc))
    branches = eliminate(h, order)
    total_forms = 0
    total_count = 0
    for i, ns in enumerate(branches, 1):
        names = [f"k{a + 1}" for a in ns.axes]
        count = nested_count(ns)
        total_count += count
        print(f"branch {i}/{len(branches)}: nesting {' -> '.join(names)}, count {count}")
        for s in range(ns.dim):
            low, up = ns.lowers[s], ns.uppers[s]
            lo_op = "<" if low.strict else "<="
            up_op = "<" if up.strict else "<="
            print(
                f"  {_affine_expr(low.constant, low.coeffs, names)} {lo_op} "
                f"{names[s]} {up_op} {_affine_expr(up.constant, up.coeffs, names)}"
            )
        forms = to_signed_prefix_forms(ns)
        total_forms += len(forms)
        for form in forms:
            sign = "+" if form.sign > 0 else "-"
            shifts = ",".join(str(v) for v in form.shifts)
            print(f"  form {sign}1 shifts=({shifts})")
            for s in range(form.dim):
                expr = _affine_expr(form.constants[s], form.coeffs[s], names)
                print(f"    {names[s]}: 0 .. {expr} [{form.conventions[s]}]")
    print(f"branches={len(branches)} forms={total_forms} count={total_count}")
    return 0


def cmd_kernel_check(args, parser) -> int:
    if args.dim < 1 or args.trials < 1:
        parser.error("dim and trials must be positive")
    rng = np.random.default_rng(args.seed)
    max_split = 0.0
    max_direct = 0.0
    checked_split = 0
    for _ in range(args.trials):
        h = random_hrep(rng, args.dim, max_degree=args.degree)
        forms = [f for ns in eliminate(h) for f in to_signed_prefix_forms(ns)]
        pts = lattice_points(h)

        def sample_point() -> List[float]:
            while True:
                x = rng.uniform(-math.pi, math.pi, size=args.dim)
                if abs(math.remainder(x[-1], math.tau)) > 1e-6:
                    return [float(c) for c in x]

        for _ in range(3):
            x = sample_point()
            direct = eval_direct(pts, x)
            nested = eval_forms(forms, x)
            max_direct = max(max_direct, abs(nested - direct) / max(1.0, abs(direct)))
        if args.dim >= 2:
            for form in forms:
                if not split_applicable(form):
                    continue
                x = sample_point()
                # the split works in nested order; resample against the
                # innermost nested axis rather than the last original one
                while abs(math.remainder(x[form.axes[-1]], math.tau)) <= 1e-6:
                    x = sample_point()
                whole = eval_nested(form, x)
                split = eval_g(form, x) + eval_f(form, x)
                max_split = max(max_split, abs(split - whole) / max(1.0, abs(whole)))
                checked_split += 1
    if args.dim >= 2:
        print(f"max |G+F-D| deviation: {max_split:.3e} ({checked_split} forms)")
    print(f"max forms-vs-direct deviation: {max_direct:.3e} ({args.trials} polytopes)")
    return 0


def cmd_triangulate(args, parser) -> int:
    poly = load_polytope(args.polytope)
    v = poly if isinstance(poly, VRep) else vrep_from_hrep(as_hrep(poly))
    simplices = triangulate(v)
    for simplex in simplices:
        verts = " ".join("(" + ",".join(str(c) for c in p) + ")" for p in simplex.vertices)
        print(f"simplex {verts}")
    print(f"s = {len(simplices)}")
    return 0


def cmd_fit(args, parser) -> int:
    records = read_records(args.csv)
    fit = fit_log_model(records, args.model, args.min_scale)
    print(_fit_line(fit))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lebconst",
        description="L_p Lebesgue constants of convex lattice polytopes on the torus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="one polytope, one measurement record")
    c.add_argument("--polytope", required=True, help="polytope file (H or V block)")
    c.add_argument("--p", type=float, default=1.0)
    c.add_argument("--json", action="store_true", help="print the record as JSON")
    _add_quad_flags(c)
    c.set_defaults(func=cmd_compute)

    st = sub.add_parser("study", help="family scaling study with CSV and figures")
    st.add_argument("--family", required=True, choices=FAMILY_KINDS)
    st.add_argument("--dim", type=int, default=2)
    st.add_argument("--aspect", help="comma list of per-axis multipliers")
    st.add_argument("--path", help="polytope file for file-based families")
    st.add_argument("--scales", required=True, help="a:b:xk geometric range or comma list")
    st.add_argument("--p", type=float, default=1.0)
    st.add_argument("--out", help="CSV output path (default study_<family>_p<p>.csv)")
    st.add_argument("--fit", action="append", choices=FIT_MODELS,
                    help="fit model(s); default picked by family")
    st.add_argument("--min-scale", type=int, default=32, help="fit window lower end")
    _add_quad_flags(st)
    st.set_defaults(func=cmd_study)

    fm = sub.add_parser("fm", help="print elimination branches and signed forms")
    fm.add_argument("--polytope", required=True)
    fm.add_argument("--order", help="comma list, 1-based axes outermost first")
    fm.set_defaults(func=cmd_fm)

    kc = sub.add_parser("kernel-check", help="random identity suites")
    kc.add_argument("--dim", type=int, default=2)
    kc.add_argument("--trials", type=int, default=50)
    kc.add_argument("--degree", type=int, default=12, help="per-axis degree cap")
    kc.add_argument("--seed", type=int, default=0)
    kc.set_defaults(func=cmd_kernel_check)

    tr = sub.add_parser("triangulate", help="fan triangulation and its size")
    tr.add_argument("--polytope", required=True)
    tr.set_defaults(func=cmd_triangulate)

    ft = sub.add_parser("fit", help="refit an existing study CSV")
    ft.add_argument("--csv", required=True)
    ft.add_argument("--model", required=True, choices=FIT_MODELS)
    ft.add_argument("--min-scale", type=int, default=32)
    ft.set_defaults(func=cmd_fit)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except (LebconstError, OSError, ValueError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
