"""Command-line interface: ``pertrk <command> ...``.

Exit status is 0 on success, 1 when a computation fails or a reference value
is not reproduced, and 2 on usage errors (bad arguments, unknown methods,
unreadable method files).
"""

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import catalog, linear
from . import numeric as nm
from . import optimize as opt
from .errors import PertRKError, UnknownMethod
from .integrator import advection_demo
from .shu_osher import radius_am, radius_am_perturbed
from .tableau import Perturbation, has_property_c, load, to_dict

AGREEMENT_TOL = 1e-6
DIGITS = 6


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# formatting helpers


def truncate(x, digits):
    """Truncate toward zero to ``digits`` decimals, tolerating float fuzz below the last digit."""
    if not math.isfinite(x):
        return x
    scale = 10 ** digits
    return math.copysign(math.floor(abs(x) * scale + 1e-6) / scale, x)


def fmt_value(x, digits=DIGITS):
    if isinstance(x, bool) or x is None:
        return str(x)
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.{digits}f}"


def fmt_truncated(x, digits):
    return fmt_value(truncate(float(x), digits), digits) if math.isfinite(float(x)) else fmt_value(x)


def matches_reference(value, ref):
    """A truncated reference ``ref`` (string) matches ``value`` if truncation could produce it."""
    g = float(ref)
    digits = len(ref.split(".")[1]) if "." in ref else 0
    return g - 1e-6 <= value <= g + 10.0 ** -digits + 1e-9


def _json_float(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return x


def _matrix(M):
    return [[_json_float(v) for v in row] for row in nm.to_float(M)]


def emit(args, data, text_lines):
    if args.json:
        print(json.dumps(data, indent=2))
    else:
        for line in text_lines:
            print(line)


# ---------------------------------------------------------------------------
# method sources


def load_source(src):
    """``(method, perturbation or None)`` from a catalog label or a method file path."""
    if os.path.exists(src):
        try:
            return load(src)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read method file {src!r}: {exc}") from None
    try:
        return catalog.get(src).method, None
    except UnknownMethod as exc:
        raise UsageError(f"{src!r} is neither a file nor a catalog method ({exc.args[0]})") from None


def _require_pert(method, pert):
    return pert if pert is not None else Perturbation.zero(method)


# ---------------------------------------------------------------------------
# commands


def cmd_radius(args):
    method, _ = load_source(args.method)
    r = radius_am(method)
    emit(args, {"method": method.name, "R": _json_float(r)}, [fmt_value(r)])
    return 0


def cmd_radius_perturbed(args):
    method, pert = load_source(args.method)
    pert = _require_pert(method, pert)
    r = radius_am_perturbed(method, pert)
    emit(args, {"method": method.name, "R_perturbed": _json_float(r)}, [fmt_value(r)])
    return 0


def cmd_bounds(args):
    method, _ = load_source(args.method)
    b = opt.bounds(method)
    emit(args, {k: _json_float(v) for k, v in b.items()},
         [f"{k:20s} {fmt_value(v)}" for k, v in b.items()])
    return 0


def _report_json(method, rep):
    d = to_dict(method, rep.perturbation)
    d.update({
        "algorithm": rep.algorithm,
        "r_opt": _json_float(rep.r_opt),
        "iterations": rep.iterations,
        "bounds": {k: _json_float(v) for k, v in rep.bounds.items()},
        "canonical": {
            "r": _json_float(rep.canonical.r),
            "gamma": [_json_float(v) for v in nm.to_float(rep.canonical.gamma)],
            "alpha_up": _matrix(rep.canonical.alpha_up),
            "alpha_down": _matrix(rep.canonical.alpha_down),
        },
    })
    return d


def _report_text(rep):
    np.set_printoptions(precision=DIGITS, suppress=True, linewidth=120)
    pert = rep.perturbation

    def show(M):
        # adding 0.0 turns negative zeros into plain zeros
        return str(np.round(nm.to_float(M), DIGITS) + 0.0)

    return [
        f"algorithm  {rep.algorithm}",
        f"r_opt      {fmt_value(rep.r_opt)}",
        "A_tilde", show(pert.A_tilde),
        "b_tilde", show(pert.b_tilde),
        f"canonical form at r = {fmt_value(rep.canonical.r)}",
        "gamma", show(rep.canonical.gamma),
        "alpha_up", show(rep.canonical.alpha_up),
        "alpha_down", show(rep.canonical.alpha_down),
    ]


def cmd_optimize(args):
    method, _ = load_source(args.method)
    algos = ["lp", "splitting"] if args.algorithm == "both" else [args.algorithm]
    runs = {}
    for a in algos:
        fn = opt.optimize_lp if a == "lp" else opt.optimize_splitting
        runs[a] = fn(method, tol=args.tol)
    first = runs[algos[0]]
    data = _report_json(method, first)
    lines = _report_text(first)
    status = 0
    if len(runs) == 2:
        other = runs["splitting"]
        diff = abs(first.r_opt - other.r_opt)
        agree = diff <= AGREEMENT_TOL
        data["splitting"] = _report_json(method, other)
        data["agreement"] = {"difference": diff, "agree": agree}
        lines += [""] + _report_text(other)
        lines.append(f"agreement  |lp - splitting| = {diff:.3e} ({'agree' if agree else 'DISAGREE'})")
        status = 0 if agree else 1
    emit(args, data, lines)
    return status


def cmd_linear_radius(args):
    method, pert = load_source(args.method)
    r = linear.linear_radius(method, _require_pert(method, pert))
    emit(args, {"method": method.name, "R_lin": _json_float(r)}, [fmt_value(r)])
    return 0


def cmd_threshold_table(args):
    if args.smax < 1 or args.pmax < 1:
        raise UsageError("--smax and --pmax must be positive")
    cells = {}
    for s in range(1, args.smax + 1):
        for p in range(1, min(s, args.pmax) + 1):
            cells[(s, p)] = linear.threshold_bound(s, p, args.tol)
    status = 0
    mismatches = []
    if args.verify:
        for (s, p), v in cells.items():
            if s in catalog.THRESHOLD_REFERENCE and abs(v - catalog.threshold_reference(s, p)) > 0.01:
                mismatches.append((s, p))
        status = 1 if mismatches else 0
    header = "s\\p " + "".join(f"{p:>8d}" for p in range(1, args.pmax + 1))
    lines = [header]
    for s in range(1, args.smax + 1):
        row = "".join(f"{fmt_value(cells[(s, p)], args.digits):>8s}"
                      for p in range(1, min(s, args.pmax) + 1))
        lines.append(f"{s:<4d}{row}")
    if args.verify:
        lines.append("all cells within 0.01 of the reference" if not mismatches
                     else f"MISMATCH in cells {mismatches}")
    data = {"cells": [{"s": s, "p": p, "value": v} for (s, p), v in cells.items()],
            "mismatches": [list(c) for c in mismatches]}
    emit(args, data, lines)
    return status


def _table_row(entry, tol):
    method = entry.method
    rep = opt.optimize_lp(method, tol=tol)
    b = opt.bounds(method)
    return {
        "R_K": radius_am(method),
        "R_opt": rep.r_opt,
        "bound_max_abs": b["inv_max_abs"],
        "bound_linear_order": b["linear_order_bound"],
        "property_c": has_property_c(method, rep.perturbation),
    }


def _compare(entry, row):
    """Per-column match flags; Property C is reported but never judged."""
    out = {}
    for key, ref in entry.reference.items():
        if key == "property_c" or ref is None:
            continue
        out[key] = matches_reference(row[key], ref)
    return out


def _table2(names, tol, args, title):
    keys = ["R_K", "R_opt", "bound_max_abs", "bound_linear_order"]
    lines = [f"{'method':18s}" + "".join(f"{k:>20s}" for k in keys) + "  property_c"]
    data, failed = [], []
    for name in names:
        entry = catalog.get(name)
        row = _table_row(entry, tol)
        ok = _compare(entry, row)
        cells = []
        for k in keys:
            mark = "" if ok.get(k, True) else " !"
            cells.append(f"{fmt_truncated(row[k], 3) + mark:>20s}")
        pc = row["property_c"]
        ref_pc = entry.reference.get("property_c")
        pc_txt = str(pc) + ("" if ref_pc is None or ref_pc == pc else f" (ref {ref_pc})")
        lines.append(f"{name:18s}" + "".join(cells) + f"  {pc_txt}")
        if not all(ok.values()):
            failed.append(name)
        data.append({"method": name, **{k: _json_float(row[k]) for k in keys},
                     "property_c": pc, "reference": entry.reference, "match": ok})
    lines.append("")
    lines.append(f"{title}: " + ("all reference values reproduced" if not failed
                                 else f"MISMATCH for {', '.join(failed)}"))
    emit(args, {"rows": data, "failed": failed}, lines)
    return 1 if failed else 0


def cmd_table2(args):
    return _table2(catalog.names(), args.tol, args, "table2")


def cmd_catalog(args):
    if args.action == "list":
        rows = [(n, catalog.get(n)) for n in catalog.names()]
        emit(args, [{"name": n, "stages": e.method.s, "order": e.method.order,
                     "class": e.method.structural_class, "source": e.source} for n, e in rows],
             [f"{n:18s} s={e.method.s:<3d} p={e.method.order:<2d} {e.source}" for n, e in rows])
        return 0
    if not args.name:
        raise UsageError("catalog show needs a method name")
    try:
        entry = catalog.get(args.name)
    except UnknownMethod as exc:
        raise UsageError(exc.args[0]) from None
    if args.verify:
        return _table2([entry.name], args.tol, args, "verify")
    d = to_dict(entry.method)
    d.update({"reference": entry.reference, "source": entry.source, "note": entry.note})
    print(json.dumps(d, indent=2))
    return 0


def cmd_demo(args):
    if args.problem != "advection":
        raise UsageError(f"unknown demo {args.problem!r}; only 'advection' is available")
    try:
        res = advection_demo(args.method, args.perturbed, args.n, args.cfl, args.steps, args.norm)
    except UnknownMethod as exc:
        raise UsageError(exc.args[0]) from None
    if args.json:
        print(json.dumps({
            "method": res.method, "perturbed": res.perturbed, "r": res.r, "h": res.h,
            "monotone": res.monotone, "stage_violations": res.stage_violations,
            "records": [{"step": x.step, "t": x.t, "tv": x.tv, "max_norm": x.max_norm,
                         "flag": x.flag} for x in res.records],
        }, indent=2))
    else:
        print(res.to_csv())
    print(f"# r = {res.r:.6f}, h = {res.h:.6g}, monotone = {res.monotone}, "
          f"stage violations = {res.stage_violations}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="structured output with full-precision values")

    p = argparse.ArgumentParser(prog="pertrk", parents=[common],
                                description="Absolute monotonicity of (downwind-perturbed) Runge-Kutta methods.")
    p.add_argument("--numeric", choices=nm.POLICIES, default=None,
                   help="numeric policy (default: $PERTRK_NUMERIC or auto)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    for name, fn, help_ in (("radius", cmd_radius, "radius of absolute monotonicity R(K)"),
                            ("radius-perturbed", cmd_radius_perturbed, "R(K, Kt) of a perturbed pair"),
                            ("bounds", cmd_bounds, "upper bounds on the optimal perturbed radius"),
                            ("linear-radius", cmd_linear_radius, "threshold factor R_Lin(K, Kt)")):
        add(name, fn, help_).add_argument("method", help="catalog name or method file")

    sp = add("optimize", cmd_optimize, "optimal downwind perturbation")
    sp.add_argument("method")
    sp.add_argument("--algorithm", choices=("lp", "splitting", "both"), default="lp")
    sp.add_argument("--tol", type=float, default=opt.DEFAULT_TOL)

    sp = add("threshold-table", cmd_threshold_table, "upper bounds on threshold factors")
    sp.add_argument("--smax", type=int, default=10)
    sp.add_argument("--pmax", type=int, default=10)
    sp.add_argument("--tol", type=float, default=linear.LINEAR_TOL)
    sp.add_argument("--digits", type=int, default=2)
    sp.add_argument("--verify", action="store_true", help="compare with the published table (0.01)")

    sp = add("catalog", cmd_catalog, "list or show built-in methods")
    sp.add_argument("action", choices=("list", "show"))
    sp.add_argument("name", nargs="?")
    sp.add_argument("--verify", action="store_true", help="recompute and compare reference values")
    sp.add_argument("--tol", type=float, default=opt.DEFAULT_TOL)

    sp = add("table2", cmd_table2, "recompute the reference table for all catalog methods")
    sp.add_argument("--tol", type=float, default=opt.DEFAULT_TOL)

    sp = add("demo", cmd_demo, "monotonicity demonstrations (CSV output)")
    sp.add_argument("problem", choices=("advection",))
    sp.add_argument("method")
    sp.add_argument("--perturbed", action="store_true", help="use the optimal perturbation")
    sp.add_argument("--cfl", type=float, default=0.9, help="h = cfl * r * dx")
    sp.add_argument("--n", type=int, default=200, help="grid cells")
    sp.add_argument("--steps", type=int, default=200)
    sp.add_argument("--norm", choices=("total-variation", "max-norm", "l1"), default="total-variation")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    args.json = getattr(args, "json", False)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    old = nm.set_policy(args.numeric) if args.numeric else None
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pertrk: error: {exc}", file=sys.stderr)
        return 2
    except (PertRKError, ValueError, ArithmeticError) as exc:
        print(f"pertrk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    finally:
        if old is not None:
            nm.set_policy(old)


if __name__ == "__main__":
    sys.exit(main())
