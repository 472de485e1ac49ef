"""Command-line front end: ``lgcanard <subcommand> [options]``.

Every command produces a table (list of rows) plus metadata. Tables are
written as CSV with '#'-prefixed metadata lines or as JSON, atomically, to
--out or to stdout. Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import blowup, criticality, dynamics, equilibria, geometry, loci, stability
from .errors import InputError, LGError, NumericalError
from .model import ModelParams

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2
BOOL_KEYS = {"degenerate"}


class UsageError(InputError):
    pass


def _pair(s):
    try:
        a, b = (float(x) for x in str(s).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {s!r}")
    return a, b


def _floats(s):
    try:
        return [float(x) for x in str(s).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {s!r}")


def read_config(path) -> dict:
    """key = value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            key, val = (x.strip() for x in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key in BOOL_KEYS:
                out[key] = val.lower() in ("1", "true", "yes", "on")
            else:
                out[key] = val
    return out


# ---------------------------------------------------------------- params


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + m for m in missing))


def params_from(args) -> ModelParams:
    if args.degenerate:
        _need(args, "A", "M", "Q", "eps")
        return ModelParams.degenerate(args.A, args.M, args.Q, args.eps)
    _need(args, "A", "M", "C", "Q", "eps")
    return ModelParams(args.A, args.M, args.C, args.Q, args.eps)


# ---------------------------------------------------------------- commands


def cmd_equilibria(args):
    p = params_from(args)
    case = equilibria.classify_case(p)
    try:
        qh = stability.hopf_threshold(p.A, p.M, p.eps, None if p.is_degenerate else p.C)[0]
    except NumericalError:
        qh = float("nan")
    rows = []
    for i, e in enumerate(reversed(equilibria.solve_positive_equilibria(p)), 1):
        rep = stability.classify_equilibrium(p, e, with_qh=False)
        rows.append({"name": f"U{i}", "u": e.u, "v": e.v, "kind": e.kind,
                     "classification": rep.classification, "trace": rep.trace,
                     "det": rep.det, "residual": e.residual})
    meta = {"case": f"{case.sign_c0}:{case.subcase}", "max_count": case.max_count, "Q_H": qh}
    return rows, meta, ["name", "u", "v", "kind", "classification", "trace", "det", "residual"]


def cmd_stability(args):
    p = params_from(args)
    rows = []
    for e in equilibria.solve_positive_equilibria(p):
        rep = stability.classify_equilibrium(p, e, with_qh=False)
        lam = stability.eigenvalues_at(p, e)
        rows.append({"kind": e.kind, "u": e.u, "v": e.v, "trace": rep.trace, "det": rep.det,
                     "classification": rep.classification,
                     "lambda1_re": float(lam[0].real), "lambda1_im": float(lam[0].imag),
                     "lambda2_re": float(lam[1].real), "lambda2_im": float(lam[1].imag)})
    meta = {}
    for br in ("main", "small"):
        try:
            q, u = stability.hopf_threshold(p.A, p.M, p.eps, None if p.is_degenerate else p.C, which=br)
            meta[f"Q_H_{br}"], meta[f"u_H_{br}"] = q, u
        except NumericalError:
            meta[f"Q_H_{br}"] = float("nan")
    return rows, meta, None


def cmd_sigma_grid(args):
    _need(args, "fixed", "value", "range1", "range2")
    rows = criticality.sigma_grid(args.fixed, args.value, args.range1, args.range2,
                                  args.n1, args.n2, args.eps if args.eps is not None else 1e-3,
                                  args.threads)
    key1 = "A" if args.fixed == "M" else "M"
    S, n_neg, n_pos = criticality.sign_regions(rows, key1)
    return rows, {"negative_regions": n_neg, "positive_regions": n_pos}, \
        ["A", "M", "C", "Q", "sigma", "criticality"]


def cmd_sweep(args):
    _need(args, "A", "M", "eps")
    if args.deltas:
        deltas = args.deltas
    else:
        deltas = list(np.geomspace(args.delta_min, args.delta_max, args.n))
    qh = stability.hopf_threshold(args.A, args.M, args.eps)[0]
    base = ModelParams.degenerate(args.A, args.M, qh, args.eps)
    rows = dynamics.canard_sweep(base, deltas, workers=args.threads, tol=args.tol)
    lo, hi = dynamics.explosion_window(rows)
    return rows, {"Q_H": qh, "window_low": lo, "window_high": hi}, \
        ["delta", "Q", "amplitude_u", "period", "passes_through_TC", "dist_TC", "stability", "status"]


def cmd_simulate(args):
    p = params_from(args)
    _need(args, "u0", "v0", "t_end")
    tr = dynamics.integrate(p, (args.u0, args.v0), args.t_end, tol=args.tol)
    rows = [{"t": t, "u": s[0], "v": s[1]} for t, s in zip(tr.times, tr.states)]
    return rows, {"steps": len(rows)}, ["t", "u", "v"]


def cmd_cycle(args):
    p = params_from(args)
    x0 = None if args.u0 is None or args.v0 is None else (args.u0, args.v0)
    cyc = dynamics.find_limit_cycle(p, section=args.section, x0=x0,
                                    max_returns=args.max_returns, tol=args.tol)
    stride = max(1, len(cyc.points) // args.samples)
    pts = cyc.points[::stride]
    if not np.array_equal(pts[-1], cyc.points[-1]):
        pts = np.vstack([pts, cyc.points[-1:]])
    rows = [{"u": a, "v": b} for a, b in pts]
    meta = {"period": cyc.period, "amplitude_u": cyc.amplitude_u, "stability": cyc.stability,
            "floquet_proxy": cyc.floquet_proxy, "section_u": cyc.section_u,
            "closure": cyc.closure, "returns": cyc.returns}
    return rows, meta, ["u", "v"]


def cmd_entry_exit(args):
    p = params_from(args)
    r = geometry.solve_exit_point(p, args.vp)
    return [{"v_p": r.v_p, "v0": r.v0, "offset": r.offset, "I_residual": r.I_residual}], {}, None


def cmd_blowup_verify(args):
    if not args.degenerate:
        raise UsageError("blowup-verify needs --degenerate")
    p = params_from(args)
    rows = [{"check": r["check"], "result": "PASS" if r["passed"] else "FAIL",
             "measured": r["measured"], "expected": r["expected"]}
            for r in blowup.verify_propositions(p)]
    return rows, {"all_pass": all(r["result"] == "PASS" for r in rows)}, None


def cmd_loci(args):
    _need(args, "A", "M")
    if args.kind == "cusp":
        u, Q, C, v = loci.cusp_point(args.A, args.M)
        return [{"u": u, "v": v, "C": C, "Q": Q}], {}, None
    if args.kind == "bt":
        _need(args, "eps")
        u, v, C, Q = loci.bt_point(args.A, args.M, args.eps)
        return [{"u": u, "v": v, "C": C, "Q": Q}], {}, None
    _need(args, "C_range")
    if args.kind == "hopf":
        _need(args, "eps")
        rows = loci.hopf_curve(args.A, args.M, args.eps, args.C_range, args.n, args.branch)
        return rows, {}, ["C", "Q", "u", "v", "det_sign", "branch", "status"]
    rows = loci.fold_curve(args.A, args.M, args.C_range, args.n)
    return rows, {}, ["C", "Q", "u", "v", "branch", "status"]


def cmd_tb_check(args):
    _need(args, "C", "Q", "eps", "U1")
    r = loci.tb_point(args.C, args.Q, args.eps, args.U1)
    rows = [
        {"check": "A_star", "value": r.A_star},
        {"check": "M_star", "value": r.M_star},
        {"check": "trace", "value": r.trace},
        {"check": "det", "value": r.det},
        {"check": "eq_residual", "value": r.eq_residual},
    ]
    meta = {"backsubstitution": "PASS" if r.backsubstitution_ok else "FAIL"}
    if args.expect_A is not None and args.expect_M is not None:
        ok = abs(r.A_star - args.expect_A) <= args.expect_tol and abs(r.M_star - args.expect_M) <= args.expect_tol
        meta["agreement"] = "PASS" if ok else "FAIL"
    s = loci.tb_solve(args.C, args.Q, args.eps, args.U1)
    rows += [{"check": "A_consistent", "value": s.A_star}, {"check": "M_consistent", "value": s.M_star}]
    return rows, meta, ["check", "value"]


COMMANDS = {
    "equilibria": cmd_equilibria,
    "stability": cmd_stability,
    "sigma-grid": cmd_sigma_grid,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "cycle": cmd_cycle,
    "entry-exit": cmd_entry_exit,
    "blowup-verify": cmd_blowup_verify,
    "loci": cmd_loci,
    "tb-check": cmd_tb_check,
}


# ---------------------------------------------------------------- output


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return str(x)


def _jsonable(x):
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def render(rows, meta, config, fmt, columns=None) -> str:
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    if fmt == "json":
        doc = {"config": {k: _jsonable(v) for k, v in config.items()},
               "meta": {k: _jsonable(v) for k, v in meta.items()},
               "rows": [{c: _jsonable(r.get(c)) for c in columns} for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in config.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    for k, v in meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path, text):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".lgcanard-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model parameters")
    g.add_argument("--A", type=float, help="Allee-shifted prey offset, 0 < A < 1")
    g.add_argument("--M", type=float, help="Allee parameter, -1 < M < 0 (weak Allee)")
    g.add_argument("--C", type=float, help="predator alternative food")
    g.add_argument("--Q", type=float, help="predator conversion parameter")
    g.add_argument("--eps", type=float, help="time-scale ratio")
    g.add_argument("--degenerate", action="store_true", help="slave C = -A*M*Q")
    o = common.add_argument_group("run options")
    o.add_argument("--out", help="output path (default stdout)")
    o.add_argument("--format", choices=["csv", "json"], default="csv")
    o.add_argument("--tol", type=float, default=dynamics.DEFAULT_TOL)
    o.add_argument("--threads", type=int, default=1)
    o.add_argument("--config", help="key = value file; flags override its values")

    ap = argparse.ArgumentParser(prog="lgcanard", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    sp = {name: sub.add_parser(name, parents=[common]) for name in COMMANDS}

    s = sp["sigma-grid"]
    s.add_argument("--fixed", choices=["M", "A"])
    s.add_argument("--value", type=float)
    s.add_argument("--range1", type=_pair, help="lo,hi for the free one of A, M")
    s.add_argument("--range2", type=_pair, help="lo,hi for C")
    s.add_argument("--n1", type=int, default=10)
    s.add_argument("--n2", type=int, default=11)

    s = sp["sweep"]
    s.add_argument("--deltas", type=_floats)
    s.add_argument("--delta-min", type=float, default=1e-4)
    s.add_argument("--delta-max", type=float, default=0.08)
    s.add_argument("--n", type=int, default=14)

    for name in ("simulate", "cycle"):
        sp[name].add_argument("--u0", type=float)
        sp[name].add_argument("--v0", type=float)
    sp["simulate"].add_argument("--t-end", type=float)
    sp["cycle"].add_argument("--section", type=float)
    sp["cycle"].add_argument("--max-returns", type=int, default=60)
    sp["cycle"].add_argument("--samples", type=int, default=2000)

    sp["entry-exit"].add_argument("--vp", type=float, help="entry height (default v_p)")

    s = sp["loci"]
    s.add_argument("--kind", choices=["hopf", "fold", "cusp", "bt"], default="hopf")
    s.add_argument("--C-range", type=_pair)
    s.add_argument("--n", type=int, default=101)
    s.add_argument("--branch", choices=["both", "main", "small"], default="both")

    s = sp["tb-check"]
    s.add_argument("--U1", type=float)
    s.add_argument("--expect-A", type=float)
    s.add_argument("--expect-M", type=float)
    s.add_argument("--expect-tol", type=float, default=1e-5)
    return ap, sp


def parse(argv):
    ap, sp = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = sp[args.command]
        known = {a.dest for a in sub._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = ap.parse_args(argv)
    if not 1e-12 <= args.tol <= 1e-4:
        raise UsageError(f"--tol {args.tol} outside [1e-12, 1e-4]")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return args


def _config_record(args) -> dict:
    skip = {"config", "out", "format"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in vars(args).items()
            if k not in skip and v is not None}


def main(argv=None) -> int:
    try:
        args = parse(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse already printed usage
        return EXIT_INPUT if exc.code else EXIT_OK
    except (InputError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        rows, meta, cols = COMMANDS[args.command](args)
        text = render(rows, meta, _config_record(args), args.format, cols)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, LGError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
