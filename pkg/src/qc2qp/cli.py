"""Command line entry point.

Subcommands::

    qc2qp gap-test FILE        verdict for one instance
    qc2qp trials               batch run on random instances
    qc2qp oracle FILE          grid-search global minimum (n = 2)
    qc2qp contour FILE         objective and feasibility grids as CSV (n = 2)

Exit codes: 0 no gap, 2 gap, 3 an assumption fails, 1 any other error
(including bad arguments). ``QC2QP_LOG`` set to ``error``, ``info`` or
``debug`` picks the diagnostics level on stderr; the default shows warnings.
"""
import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import AssumptionViolated, QC2QPError
from .gaptest import EPS2
from .instance_io import parse_instance
from .model import evaluate_q
from .recovery import brute_force_oracle, run_gap_test
from .sdp import SolverConfig
from .trials import run_trials

EXIT_NOGAP, EXIT_ERROR, EXIT_GAP, EXIT_ASSUMPTION = 0, 1, 2, 3

log = logging.getLogger("qc2qp")

VERDICT_SCHEMA = {
    "type": "object",
    "required": ["kind", "relaxation_value", "dual", "flags", "property_I", "property_I_plus",
                 "measured", "eps1", "eps2", "solution", "certificate", "slater"],
    "properties": {
        "kind": {"enum": ["NoGap", "Gap"]},
        "relaxation_value": {"type": "number"},
        "dual": {
            "type": "object",
            "required": ["y0", "y1", "y2"],
            "properties": {k: {"type": "number"} for k in ("y0", "y1", "y2")},
        },
        "flags": {
            "type": "object",
            "required": ["I1", "I2", "I3", "I4_equalities", "I4_product", "I4_cross"],
            "additionalProperties": {"type": "boolean"},
        },
        "property_I": {"type": "boolean"},
        "property_I_plus": {"type": "boolean"},
        "measured": {"type": "object"},
        "eps1": {"type": "number"},
        "eps2": {"type": "number"},
        "solution": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["z", "objective", "q1_value", "q2_value", "case", "t"],
                    "properties": {
                        "z": {"type": "array", "items": {"type": "number"}},
                        "objective": {"type": "number"},
                        "q1_value": {"type": "number"},
                        "q2_value": {"type": "number"},
                        "case": {"enum": ["Rank1Direct", "Case1", "Case2", "Case3", "Case4", "Case5"]},
                        "t": {"type": "number"},
                    },
                },
            ]
        },
        "certificate": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["gamma", "determinant", "formula_determinant", "nullspace_dim"],
                },
            ]
        },
        "slater": {"type": "object"},
    },
}


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "gap"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _setup_logging():
    level = os.environ.get("QC2QP_LOG", "").strip().lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if level and level not in levels:
        log.warning("QC2QP_LOG=%s not understood; use error, info or debug", level)


def _floats(x):
    return [float(v) for v in np.ravel(x)]


def verdict_document(v, cfg, eps2):
    """JSON-ready dictionary of a :class:`GapVerdict`."""
    r = v.report
    flags = dict(zip(("I1", "I2", "I3", "I4_equalities", "I4_product", "I4_cross"),
                     (r.cond_I1, r.cond_I2, r.cond_I3, r.cond_4_equalities,
                      r.cond_4_product, r.cond_4_cross)))
    measured = {k: (list(map(float, val)) if isinstance(val, list) else val)
                for k, val in r.measured.items()}
    doc = {
        "kind": v.kind,
        "relaxation_value": float(v.relaxation_value),
        "dual": {"y0": v.pair.y0, "y1": v.pair.y1, "y2": v.pair.y2},
        "flags": flags,
        "property_I": r.property_I,
        "property_I_plus": r.property_I_plus,
        "measured": measured,
        "eps1": cfg.eps1,
        "eps2": eps2,
        "solution": None,
        "certificate": None,
        "slater": {},
    }
    if r.decomposition is not None:
        doc["decomposition"] = [_floats(x) for x in r.decomposition.vectors]
    if v.solution is not None:
        s = v.solution
        doc["solution"] = {
            "z": _floats(s.z),
            "objective": s.objective,
            "q1_value": s.q1_value,
            "q2_value": s.q2_value,
            "case": s.case_label,
            "t": s.witness_vector.t,
        }
    if v.certificate is not None:
        c = v.certificate
        doc["certificate"] = {
            "gamma": [_floats(row) for row in c.gamma],
            "determinant": c.determinant,
            "formula_determinant": c.formula_determinant,
            "nullspace_dim": c.nullspace_dim_of_AV,
        }
    for name, chk in zip(("primal", "dual"), v.slater):
        doc["slater"][name] = {"holds": chk.holds, "margin": chk.margin}
    return doc


def _fmt(x):
    return "[" + ", ".join(f"{v:.7f}" for v in np.ravel(x)) + "]"


def _print_verdict(v):
    print(f"verdict            {v.kind}")
    print(f"relaxation value   {v.relaxation_value:.7f}")
    print(f"multipliers        y0 {v.pair.y0:.7f}  y1 {v.pair.y1:.7f}  y2 {v.pair.y2:.7f}")
    m = v.report.measured
    print(f"ranks              X {m['rank_X']}  Z {m['rank_Z']}")
    if v.solution is not None:
        s = v.solution
        print(f"recovered by       {s.case_label}")
        print(f"z                  {_fmt(s.z)}")
        print(f"objective          {s.objective:.7f}")
        print(f"q1(z), q2(z)       {s.q1_value:.3e}  {s.q2_value:.3e}")
        return
    e = v.report.eps2
    m1, m2 = m["m1_values"], m["m2_values"]
    print(f"|M1 . x1 x1'|      {abs(m1[0]):.3e} < {e:g}")
    print(f"|M1 . x2 x2'|      {abs(m1[1]):.3e} < {e:g}")
    print(f"M2 . x1 x1'        {m2[0]:+.7f}")
    print(f"M2 . x2 x2'        {m2[1]:+.7f}")
    print(f"|M1 . x1 x2'|      {abs(m['m1_cross']):.7f} > {e:g}")
    for i, x in enumerate(v.report.decomposition.vectors, 1):
        print(f"x{i}                 {_fmt(x)}")
    c = v.certificate
    print(f"certificate det    {c.determinant:.7g} (null space dim {c.nullspace_dim_of_AV})")


def _config(args):
    return SolverConfig(eps1=args.eps1)


def cmd_gap_test(args):
    inst = parse_instance(args.path)
    cfg = _config(args)
    try:
        v = run_gap_test(inst, cfg, args.eps2)
    except AssumptionViolated as exc:
        if args.json:
            json.dump({"kind": "AssumptionViolated", "which": exc.which,
                       "diagnostics": str(exc.diagnostics)}, sys.stdout, indent=1)
            print()
        elif not args.quiet:
            print(f"verdict            AssumptionViolated ({exc.which} Slater)")
            print(f"diagnostics        {exc.diagnostics}")
        return EXIT_ASSUMPTION
    if args.json:
        json.dump(verdict_document(v, cfg, args.eps2), sys.stdout, indent=1)
        print()
    elif not args.quiet:
        _print_verdict(v)
    return EXIT_NOGAP if v.no_gap else EXIT_GAP


def cmd_trials(args):
    if args.count < 1:
        raise _ArgError("--count must be at least 1")
    if args.dim < 1:
        raise _ArgError("--dim must be at least 1")
    if not args.range > 0:
        raise _ArgError("--range must be positive")
    rep = run_trials(args.count, args.dim, args.seed, args.range, _config(args), args.eps2,
                     workers=args.workers, max_attempts=args.max_attempts)
    if args.json:
        text = json.dumps({
            "total": rep.total, "no_gap_count": rep.no_gap_count, "gap_count": rep.gap_count,
            "assumption_violations": rep.assumption_violations, "error_count": rep.error_count,
            "seed": rep.seed, "n": rep.n,
            "lines": [{"index": ln.index, "attempts": ln.attempts, "kind": ln.kind,
                       "relaxation_value": None if math.isnan(ln.relaxation_value) else ln.relaxation_value,
                       "detail": ln.detail} for ln in rep.lines],
        }, indent=1) + "\n"
    else:
        text = rep.format()
    if args.out:
        Path(args.out).write_text(text)
    elif not args.quiet:
        sys.stdout.write(text)
    return EXIT_NOGAP


def _box(values, what):
    lo_x, hi_x, lo_y, hi_y = values
    if not (lo_x < hi_x and lo_y < hi_y):
        raise _ArgError(f"{what} must have min < max on both axes")
    return np.array([[lo_x, hi_x], [lo_y, hi_y]])


def cmd_oracle(args):
    inst = parse_instance(args.path)
    if inst.n != 2:
        raise _ArgError("the oracle needs n == 2")
    z, val = brute_force_oracle(inst, _box(args.box, "--box"), args.grid, args.refine)
    if args.json:
        json.dump({"z": _floats(z), "value": val}, sys.stdout, indent=1)
        print()
    elif not args.quiet:
        print(f"z      {_fmt(z)}")
        print(f"value  {val:.7f}")
    return EXIT_NOGAP


def _write_grid(path, xs, ys, vals, header, fmt):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                w.writerow([repr(float(x)), repr(float(y)), fmt(vals[i, j])])


def cmd_contour(args):
    inst = parse_instance(args.path)
    if inst.n != 2:
        raise _ArgError("contour data needs n == 2")
    box = _box(args.box, "--box")
    if args.grid < 2:
        raise _ArgError("--grid must be at least 2")
    xs = np.linspace(box[0, 0], box[0, 1], args.grid)
    ys = np.linspace(box[1, 0], box[1, 1], args.grid)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X, Y], axis=-1)

    def q(i):
        Q, b, c = inst.quadratic(i)
        return np.einsum("...i,ij,...j->...", pts, Q, pts) + 2.0 * pts @ b + c

    q0, q1, q2 = q(0), q(1), q(2)
    tol = args.slack
    feas = (q1 <= tol) & (q2 <= tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_grid(out / "objective.csv", xs, ys, q0, ["x", "y", "value"], lambda v: repr(float(v)))
    _write_grid(out / "feasible.csv", xs, ys, feas, ["x", "y", "feasible"], lambda v: str(int(v)))

    points = []
    cfg = _config(args)
    try:
        v = run_gap_test(inst, cfg, args.eps2)
    except AssumptionViolated as exc:
        log.warning("no verdict: %s", exc)
        v = None
    if v is not None and v.solution is not None:
        points.append(("recovered", v.solution.z))
    elif v is not None:
        for k, x in enumerate(v.report.decomposition.vectors, 1):
            if abs(x[0]) > 1e-8:
                points.append((f"zhat{k}", x[1:] / x[0]))
    if not args.no_oracle:
        try:
            z, _ = brute_force_oracle(inst, box, args.oracle_grid)
            points.append(("oracle", z))
        except QC2QPError as exc:
            log.warning("oracle: %s", exc)
    with open(out / "points.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "x", "y", "value", "feasible"])
        for label, z in points:
            z = np.asarray(z, dtype=float)
            ok = evaluate_q(inst, 1, z) <= tol and evaluate_q(inst, 2, z) <= tol
            w.writerow([label, repr(float(z[0])), repr(float(z[1])),
                        repr(evaluate_q(inst, 0, z)), int(ok)])
    if not args.quiet:
        print(f"wrote {out / 'objective.csv'}, {out / 'feasible.csv'}, {out / 'points.csv'}")
    return EXIT_NOGAP


class _ArgError(Exception):
    pass


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--eps1", type=float, default=1.49e-8, help="solver accuracy")
    common.add_argument("--eps2", type=float, default=EPS2, help="purification and rank threshold")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--quiet", action="store_true", help="no output; exit code only")

    p = _Parser(prog="qc2qp", description="Optimality gap test for two-constraint quadratic programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gap-test", parents=[common], help="run the gap test on an instance file")
    g.add_argument("path")
    g.set_defaults(func=cmd_gap_test)

    t = sub.add_parser("trials", parents=[common], help="gap test on random feasible nonconvex instances")
    t.add_argument("--count", type=int, default=100)
    t.add_argument("--dim", type=int, default=2)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--range", type=float, default=5.0, help="entries uniform on [-range, range]")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--max-attempts", type=int, default=1000, help="draws allowed per accepted instance")
    t.add_argument("--out", help="write the report here instead of stdout")
    t.set_defaults(func=cmd_trials)

    o = sub.add_parser("oracle", parents=[common], help="grid-search global minimum (n = 2)")
    o.add_argument("path")
    o.add_argument("--box", type=float, nargs=4, default=[-10, 10, -10, 10],
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    o.add_argument("--grid", type=int, default=2001)
    o.add_argument("--refine", type=int, default=60)
    o.set_defaults(func=cmd_oracle)

    c = sub.add_parser("contour", parents=[common], help="objective and feasibility grids as CSV (n = 2)")
    c.add_argument("path")
    c.add_argument("--box", type=float, nargs=4, default=[-10, 10, -10, 10],
                   metavar=("XMIN", "XMAX", "YMIN", "YMAX"))
    c.add_argument("--grid", type=int, default=201)
    c.add_argument("--out", default="contour")
    c.add_argument("--slack", type=float, default=1e-6, help="feasibility tolerance")
    c.add_argument("--oracle-grid", type=int, default=801)
    c.add_argument("--no-oracle", action="store_true")
    c.set_defaults(func=cmd_contour)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _ArgError as exc:
        parser.print_usage(sys.stderr)
        print(f"qc2qp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, QC2QPError, ValueError) as exc:
        print(f"qc2qp: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
