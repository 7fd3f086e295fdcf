"""Command-line front end emitting CSV or JSON."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import barriers, freeboundary, reference
from .errors import CapconeError, InvalidParams
from .pair import ConePair
from .profile_ode import Blowup, ZeroCrossing
from .shooting import SweepMode, family_sweep, solve_cone, solve_near_half_pi

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
PROFILE_POINTS = 201
# containment intervals checked by `fb indicial`
INDICIAL_WINDOWS = {7: (-2.9, -2.1)}
INDICIAL_WINDOW_LARGE = (-4.4, -1.6)


@dataclass
class Result:
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    code: int = EXIT_OK
    sidecar: Optional[dict] = None


# --------------------------------------------------------------------------
# formatting

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in value)
    return str(value)


def to_csv(columns: list, rows: list) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def to_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _emit(result: Result, fmt: str, out: Optional[str]) -> None:
    if fmt == "csv":
        text = to_csv(result.columns, result.rows)
    else:
        body = {"rows": result.rows, "summary": result.summary}
        if result.sidecar is not None:
            body["sidecar"] = result.sidecar
        text = to_json(body)
    extra = result.sidecar if result.sidecar is not None else (result.summary or None)
    if out is None:
        sys.stdout.write(text)
        if fmt == "csv" and extra:
            sys.stderr.write(to_json(extra))
        return
    path = Path(out)
    path.write_text(text, newline="\n")
    if fmt == "csv" and extra:
        side = path.with_name(path.name + ".json") if path.suffix == ".json" else path.with_suffix(".json")
        side.write_text(to_json(extra), newline="\n")


def _map(fun, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fun(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fun, items))


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InvalidParams(f"could not parse number list {text!r}") from exc


def _beta_grid(args) -> list:
    if args.betas:
        return _floats(args.betas)
    if args.beta_range:
        try:
            lo, hi, step = (float(x) for x in args.beta_range.split(":"))
        except ValueError as exc:
            raise InvalidParams("--beta-range expects lo:hi:step") from exc
        if step <= 0 or hi < lo:
            raise InvalidParams("--beta-range needs lo <= hi and step > 0")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(count)]
    raise InvalidParams("give --betas or --beta-range")


def _pair(args) -> ConePair:
    if args.n is None or args.k is None:
        raise InvalidParams("--n and --k are required")
    return ConePair(args.n, args.k)


# --------------------------------------------------------------------------
# cone / family

def _terminal_record(traj) -> dict:
    term = traj.terminal
    if isinstance(term, ZeroCrossing):
        return {"kind": "zero", "t": term.t_a, "value": 0.0}
    if isinstance(term, Blowup):
        return {"kind": "blowup", "t": term.b_a, "value": term.f_b}
    return {"kind": "lawson", "t": traj.t_end, "value": 0.0}


def cmd_solve(args) -> Result:
    pair = _pair(args)
    if (args.theta is None) == (args.eps is None):
        raise InvalidParams("give exactly one of --theta and --eps")
    if args.theta is not None:
        theta = math.radians(args.theta) if args.degrees else args.theta
        sol = solve_cone(pair, theta)
    else:
        sol = solve_near_half_pi(pair, args.eps)
    ts = np.linspace(0.0, sol.t_a, PROFILE_POINTS)
    f, fp = sol.trajectory.evaluate(ts)
    rows = [{"t": t, "f": a, "fprime": b} for t, a, b in zip(ts, f, fp)]
    side = {"n": pair.n, "k": pair.k, "a": sol.a, "t_a": sol.t_a, "theta": sol.theta,
            "terminal": _terminal_record(sol.trajectory)}
    if sol.eps is not None:
        side.update(eps=sol.eps, t_hat=sol.t_hat)
    return Result(["t", "f", "fprime"], rows, sidecar=side)


def cmd_sweep(args) -> Result:
    pair = _pair(args)
    mode = SweepMode(args.mode)
    if args.values:
        values = _floats(args.values)
    elif mode is SweepMode.VaryHeight:
        values = [pair.a_star * c for c in (0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.25)]
    else:
        values = [0.5, 1.0, 2.0, 4.0]
    fixed = args.fixed if args.fixed is not None else 0.5 * pair.a_star
    sweep = family_sweep(pair, mode, values, fixed)
    rows = []
    for m in sweep.members:
        end = m.positive_end
        ts = np.linspace(0.0, end, PROFILE_POINTS)
        if m.terminal_kind == "blowup":
            ts = ts[:-1]
        f, _ = m.trajectory.evaluate(ts)
        rows += [{"param": m.param, "t": t, "f": v, "terminal": m.terminal_kind, "lawson": m.lawson}
                 for t, v in zip(ts, f)]
    summary = {"n": pair.n, "k": pair.k, "mode": mode.value, "fixed": fixed,
               "members": [{"param": m.param, "terminal": m.terminal_kind, "lawson": m.lawson,
                            "positive_end": m.positive_end} for m in sweep.members]}
    if mode is SweepMode.VaryHeight:
        summary["max_crossings"] = sweep.max_crossings
    else:
        summary.update(ordered=sweep.ordered, ordering_margin=sweep.ordering_margin)
    return Result(["param", "t", "f", "terminal", "lawson"], rows, summary)


# --------------------------------------------------------------------------
# barriers

SUB_COLUMNS = ["n", "k", "alpha", "margin", "verdict", "t0", "g_at_t0", "g_min", "argmin",
               "critical_points"]


def _sub_record(pair: ConePair, alpha: float) -> dict:
    chk = barriers.check_subsolution(pair, alpha)
    return {"n": pair.n, "k": pair.k, "alpha": chk.alpha, "margin": chk.margin, "verdict": chk.verdict,
            "t0": chk.t0, "g_at_t0": chk.g_at_t0, "g_min": chk.g_min, "argmin": chk.argmin,
            "critical_points": list(chk.critical_points)}


def cmd_sub(args) -> Result:
    pair = _pair(args)
    alpha = args.alpha if args.alpha is not None else barriers.alpha_values(pair.n, pair.k)
    rec = _sub_record(pair, alpha)
    ok = rec["verdict"] and rec["margin"] > 0
    return Result(SUB_COLUMNS, [rec], code=EXIT_OK if ok else EXIT_MISMATCH)


def _super_record(task) -> dict:
    n, k, beta, tol_abs, tol_rel = task
    rec = {"n": n, "k": k, "beta": beta}
    try:
        report = barriers.verify_supersolution(ConePair(n, k), beta)
        table = barriers.table_convention_values(report.params)
    except InvalidParams:
        raise
    except CapconeError as exc:
        rec.update(status=type(exc).__name__, all_ok=False, matched=False)
        return rec
    rec.update(status="ok")
    rec.update({f"table_{c}": table[c] for c in reference.TABLE_COLUMNS})
    rec.update({c: getattr(report, c) for c in reference.TABLE_COLUMNS})
    rec.update(w_prime_tau=report.w_prime_tau, max_K_square=report.max_K_square, s3_route=report.s3_route,
               s1_ok=report.s1_ok, s2_ok=report.s2_ok, s3_ok=report.s3_ok, all_ok=report.all_ok,
               tau=report.params.tau, A=report.params.A, rbar=report.params.rbar)
    ref = reference.find_row(n, k, beta)
    if ref is not None:
        rec.update({f"ref_{c}": ref[c] for c in reference.TABLE_COLUMNS})
        rec["matched"] = reference.row_matches(table, ref, tol_abs, tol_rel)
    else:
        rec["matched"] = None
    return rec


SUPER_COLUMNS = (["n", "k", "beta", "status"] + [f"table_{c}" for c in reference.TABLE_COLUMNS]
                 + [f"ref_{c}" for c in reference.TABLE_COLUMNS] + ["matched"]
                 + list(reference.TABLE_COLUMNS)
                 + ["w_prime_tau", "max_K_square", "s3_route", "s1_ok", "s2_ok", "s3_ok", "all_ok",
                    "tau", "A", "rbar"])


def cmd_super(args) -> Result:
    pair = _pair(args)
    if args.beta is None:
        raise InvalidParams("--beta is required")
    if not 2 - pair.n < args.beta < -1:
        raise InvalidParams(f"beta must lie in ({2 - pair.n}, -1)")
    rec = _super_record((pair.n, pair.k, args.beta, args.tol_abs, args.tol_rel))
    if rec["status"] in ("ConditionFailed", "NoTau"):
        return Result(SUPER_COLUMNS, [rec], code=EXIT_MISMATCH)
    if rec["status"] != "ok":
        return Result(SUPER_COLUMNS, [rec], code=EXIT_NUMERICAL)
    ok = rec["all_ok"] and rec["matched"] is not False
    return Result(SUPER_COLUMNS, [rec], code=EXIT_OK if ok else EXIT_MISMATCH)


def _scan_one(task) -> dict:
    n, k, beta = task
    try:
        ok = barriers.verify_supersolution(ConePair(n, k), beta).all_ok
        return {"beta": beta, "all_ok": ok, "failure": None}
    except CapconeError as exc:
        return {"beta": beta, "all_ok": False, "failure": type(exc).__name__}


def cmd_scan(args) -> Result:
    pair = _pair(args)
    grid = sorted(_beta_grid(args))
    for b in grid:
        if not 2 - pair.n < b < -1:
            raise InvalidParams(f"grid value {b} outside ({2 - pair.n}, -1)")
    rows = _map(_scan_one, [(pair.n, pair.k, b) for b in grid], args.jobs)
    runs = barriers.admissible_runs(grid, [r["all_ok"] for r in rows])
    admissible = [r["beta"] for r in rows if r["all_ok"]]
    summary = {"n": pair.n, "k": pair.k, "runs": runs,
               "inf_estimate": min(admissible) if admissible else None}
    return Result(["beta", "all_ok", "failure"], rows, summary,
                  code=EXIT_OK if admissible else EXIT_MISMATCH)


# --------------------------------------------------------------------------
# tables

def _parse_rows(text: Optional[str]) -> Optional[set]:
    if not text:
        return None
    out = set()
    for item in text.split(","):
        try:
            n, k, b = item.split(":")
            out.add((int(n), int(k), float(b)))
        except ValueError as exc:
            raise InvalidParams("--rows expects n:k:beta items separated by commas") from exc
    return out


def _alpha_record(task) -> dict:
    n, k = task
    alpha = barriers.alpha_values(n, k)
    try:
        rec = _sub_record(ConePair(n, k), alpha)
    except CapconeError as exc:
        return {"n": n, "k": k, "alpha": alpha, "matched": False, "status": type(exc).__name__}
    floor = {8: 1e-2, 9: 1e-1}.get(n, 0.0)
    rec.update(status="ok", margin_floor=floor,
               matched=bool(rec["verdict"] and rec["margin"] > floor))
    return rec


def cmd_table(args) -> Result:
    which = args.which
    if which == "appendix":
        wanted = _parse_rows(args.rows)
        tasks = [(r["n"], r["k"], r["beta"], args.tol_abs, args.tol_rel) for r in reference.supersolution_rows()
                 if wanted is None or (r["n"], r["k"], r["beta"]) in wanted]
        if args.n is not None:
            tasks = [t for t in tasks if t[0] == args.n]
        if not tasks:
            raise InvalidParams("no reference rows selected")
        rows = sorted(_map(_super_record, tasks, args.jobs), key=lambda r: (r["n"], r["k"], r["beta"]))
        columns = SUPER_COLUMNS
    elif which == "quadratics":
        tasks = [(r["n"], r["k"], r["beta"], args.tol_abs, args.tol_rel) for r in reference.quadratic_examples()]
        if args.n is not None:
            tasks = [t for t in tasks if t[0] == args.n]
        rows = sorted(_map(_super_record, tasks, args.jobs), key=lambda r: (r["n"], r["k"], r["beta"]))
        for r in rows:
            r["matched"] = bool(r.get("all_ok"))
        columns = SUPER_COLUMNS
    else:
        ns = [args.n] if args.n is not None else list(range(7, 13))
        tasks = [(n, k) for n in ns for k in range(1, n - 1)]
        rows = _map(_alpha_record, tasks, args.jobs)
        columns = SUB_COLUMNS + ["margin_floor", "status", "matched"]
    matched = all(r.get("matched") is not False for r in rows)
    summary = {"table": which, "rows": len(rows), "all_matched": matched}
    return Result(columns, rows, summary, code=EXIT_OK if matched else EXIT_MISMATCH)


# --------------------------------------------------------------------------
# free boundary kernels

def cmd_indicial(args) -> Result:
    if args.n is None:
        raise InvalidParams("--n is required")
    data = freeboundary.indicial_roots(args.n)
    window = INDICIAL_WINDOWS.get(args.n, INDICIAL_WINDOW_LARGE)
    lo, hi = data.interval
    rec = {"n": data.n, "gamma_low": data.gamma_low, "gamma_high": data.gamma_high,
           "complex_roots": data.complex_roots, "imag_part": data.imag_part,
           "interval_low": lo, "interval_high": hi, "window_low": window[0], "window_high": window[1],
           "contains_window": data.contains(*window)}
    return Result(list(rec), [rec], code=EXIT_OK if rec["contains_window"] else EXIT_MISMATCH)


def cmd_caps(args) -> Result:
    pair = _pair(args)
    pot = freeboundary.cap_potential(pair, args.side, args.shift)
    chk = freeboundary.cap_divergence_check(pot)
    rec = {"n": pair.n, "k": pair.k, "side": pot.side.value, "case": pot.case.value, "degree": pot.degree,
           "shift": pot.shift, "constant": pot.constant, "printed_constant": pot.printed_constant,
           "constant_matches_printed": pot.constant_matches_printed, "points": chk.points,
           "min_scaled_divergence": chk.min_scaled, "min_distance_ratio": chk.min_ratio,
           "all_positive": chk.all_positive, "cubic_min": None}
    if pair.n == 7 and pair.k in (1, 5):
        rec["cubic_min"] = freeboundary.lawlor_cubic_min()[0]
    return Result(list(rec), [rec], code=EXIT_OK if chk.all_positive else EXIT_MISMATCH)


def cmd_eps(args) -> Result:
    pair = _pair(args)
    if args.eps is None:
        raise InvalidParams("--eps is required")
    d = freeboundary.near_half_pi_relations(pair, args.eps)
    rec = {"n": pair.n, "k": pair.k, "eps": d.eps, "theta": d.theta, "t_eps": d.t_eps, "t_hat": d.t_hat,
           "aperture_slope": d.aperture_slope, "height": d.height, "tan_defect": d.tan_defect,
           "angle_defect": d.angle_defect, "gap_defect": d.gap_defect, "zero_shift": d.zero_shift}
    return Result(list(rec), [rec])


# --------------------------------------------------------------------------
# parser

def _common(p, fmt: str) -> None:
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--tol-abs", type=float, default=reference.DEFAULT_TOL_ABS)
    p.add_argument("--tol-rel", type=float, default=reference.DEFAULT_TOL_REL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capcone", description="Capillary cone computations.")
    groups = parser.add_subparsers(dest="group", required=True)

    cone = groups.add_parser("cone").add_subparsers(dest="action", required=True)
    p = cone.add_parser("solve")
    _common(p, "csv")
    p.add_argument("--theta", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--degrees", action="store_true")
    p.set_defaults(handler=cmd_solve)

    fam = groups.add_parser("family").add_subparsers(dest="action", required=True)
    p = fam.add_parser("sweep")
    _common(p, "csv")
    p.add_argument("--mode", choices=[m.value for m in SweepMode], default="heights")
    p.add_argument("--values")
    p.add_argument("--fixed", type=float)
    p.set_defaults(handler=cmd_sweep)

    def barrier_commands(sub, fmt):
        p = sub.add_parser("sub")
        _common(p, fmt)
        p.add_argument("--alpha", type=float)
        p.set_defaults(handler=cmd_sub)
        p = sub.add_parser("super")
        _common(p, fmt)
        p.add_argument("--beta", type=float)
        p.set_defaults(handler=cmd_super)

    def fb_commands(sub, fmt):
        p = sub.add_parser("indicial")
        _common(p, fmt)
        p.set_defaults(handler=cmd_indicial)
        p = sub.add_parser("caps")
        _common(p, fmt)
        p.add_argument("--side", choices=("plus", "minus"), default="plus")
        p.add_argument("--shift", type=float, default=0.0)
        p.set_defaults(handler=cmd_caps)

    bar = groups.add_parser("barriers").add_subparsers(dest="action", required=True)
    barrier_commands(bar, "json")
    p = bar.add_parser("scan-beta")
    _common(p, "csv")
    p.add_argument("--betas")
    p.add_argument("--beta-range")
    p.set_defaults(handler=cmd_scan)

    tab = groups.add_parser("table").add_subparsers(dest="action", required=True)
    p = tab.add_parser("reproduce")
    p.add_argument("which", choices=("appendix", "alpha", "quadratics"))
    _common(p, "csv")
    p.add_argument("--rows")
    p.set_defaults(handler=cmd_table)

    fb = groups.add_parser("fb").add_subparsers(dest="action", required=True)
    fb_commands(fb, "json")
    p = fb.add_parser("eps")
    _common(p, "json")
    p.add_argument("--eps", type=float)
    p.set_defaults(handler=cmd_eps)

    ver = groups.add_parser("verify").add_subparsers(dest="action", required=True)
    barrier_commands(ver, "json")
    fb_commands(ver, "json")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        result = args.handler(args)
    except (InvalidParams, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (CapconeError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(result, args.format, args.out)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
