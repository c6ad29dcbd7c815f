"""qlattice command line: eval, coeffs, verify.

Exit codes: 0 success (verify: every check passed), 1 a check failed or a
value could not be computed, 2 bad arguments or configuration.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .config import DEFAULT_CONFIG, load_config
from .errors import ConfigError, QLatticeError
from .families import DEFAULT_PARAMS, FAMILIES, make_family
from .lattice import GridWindow
from .reports import complex_json
from .verifier import compare_closed, extract_ttrr, run_suite, solve_structure

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
REAL_CUTOFF = 1e-13


class UsageError(Exception):
    pass


def parse_params(text):
    """'a=0.1,b=0.2+0.1j' -> {'a': 0.1, 'b': (0.2+0.1j)}."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not of the form key=value")
        key, value = item.split("=", 1)
        try:
            z = complex(value.strip().replace(" ", ""))
        except ValueError as exc:
            raise UsageError(f"parameter {key}={value!r} is not a number") from exc
        out[key.strip()] = z.real if z.imag == 0 else z
    return out


def parse_grid(text):
    """'s0:count' -> GridWindow."""
    try:
        s0, count = text.split(":")
        return GridWindow(complex(s0), int(count))
    except (ValueError, QLatticeError) as exc:
        raise UsageError(f"--grid expects s0:count, got {text!r}") from exc


def parse_numbers(text):
    try:
        return [complex(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def parse_range(text):
    """'3' -> [3], '0..5' -> [0, ..., 5]."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"--n expects an integer or lo..hi, got {text!r}") from exc


# -- output ----------------------------------------------------------------------


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, complex):
        if abs(v.imag) < REAL_CUTOFF * abs(v.real) or v.imag == 0:
            return repr(v.real)
        return repr(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_value(v):
    if isinstance(v, complex):
        return complex_json(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(rows, columns, fmt):
    """Rows of dicts as CSV text or a JSON array (complex values as {re, im})."""
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------------


def _family(args):
    params = parse_params(args.params) if args.params else dict(DEFAULT_PARAMS[args.family])
    return make_family(args.family, params, args.q)


def cmd_eval(args):
    spec = _family(args)
    if args.s and args.x:
        raise UsageError("give either --s or --x, not both")
    if args.x:
        points = [spec.lattice.s_of_x(x) for x in parse_numbers(args.x)]
    elif args.s:
        points = parse_numbers(args.s)
    else:
        points = (parse_grid(args.grid) if args.grid else spec.default_grid).points()
    rows = []
    status = EXIT_OK
    for s in points:
        row = {"n": args.n, "s": complex(s), "x": complex(spec.lattice.x(s))}
        try:
            p = complex(spec.poly(args.n, s))
            if not (math.isfinite(p.real) and math.isfinite(p.imag)):
                raise ArithmeticError("non-finite value")
            row["p"] = p
        except (QLatticeError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            status = EXIT_FAIL
        rows.append(row)
    emit(render(rows, ["n", "s", "x", "p", "error"], args.format), args.out)
    return status


def cmd_coeffs(args):
    spec = _family(args)
    grid = parse_grid(args.grid) if args.grid else spec.recurrence_grid
    degrees = parse_range(args.n) if args.n is not None else list(range(args.n_max + 1))
    rows = []
    status = EXIT_OK
    for n in degrees:
        row = {"n": n}
        try:
            if args.kind == "ttrr":
                triple, res = extract_ttrr(spec, n, grid, tol=args.tol, full_output=True)
                row.update(alpha=triple.first, beta=triple.middle, gamma=triple.last)
            else:
                triple, res = solve_structure(spec, n, grid, tol=args.tol)
                row.update(e=triple.first, f=triple.middle, g=triple.last)
                checks = compare_closed(spec, n, triple)
                closed = spec.structure_closed(n) if spec.structure_closed and n >= 1 else None
                if closed is not None:
                    row.update(closed_e=closed.first, closed_f=closed.middle, closed_g=closed.last)
                flags = [ok for _, ok, _ in checks if ok is not None]
                row["match"] = all(flags) if flags else None
            row["residual"] = res.residual
        except (QLatticeError, ArithmeticError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
            status = EXIT_FAIL
        rows.append(row)
    if args.kind == "ttrr":
        columns = ["n", "alpha", "beta", "gamma", "residual", "error"]
    else:
        columns = ["n", "e", "f", "g", "residual", "closed_e", "closed_f", "closed_g", "match", "error"]
    emit(render(rows, columns, args.format), args.out)
    return status


def report_text(reports, fmt):
    dicts = [r.to_dict() for r in reports]
    if fmt == "json":
        return json.dumps(dicts, indent=2, sort_keys=True, allow_nan=False) + "\n"
    columns = ["check_id", "family", "params", "n", "m", "max_residual", "tolerance", "passed", "notes"]
    rows = []
    for d in dicts:
        d = dict(d)
        d["params"] = json.dumps(d["params"], sort_keys=True)
        d["notes"] = "; ".join(d["notes"])
        rows.append(d)
    return render(rows, columns, "csv")


def cmd_verify(args):
    overrides = {"seed": args.seed, "n_max": args.n_max, "tol": args.tol}
    if args.grid:
        s0, count = args.grid.split(":") if ":" in args.grid else (None, None)
        if count is None:
            raise ConfigError(f"--grid expects s0:count, got {args.grid!r}")
        overrides["grid"] = {"s0": float(s0), "count": int(count)}
    config = load_config(args.config or DEFAULT_CONFIG, overrides)
    fmt = args.format or config.output.format
    reports = run_suite(config)
    emit(report_text(reports, fmt), args.out or config.output.path)
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"FAIL {r.check_id} {r.family} n={r.n} m={r.m} residual={r.max_residual:.3e}", file=sys.stderr)
    print(f"{len(reports)} checks, {len(failed)} failed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="qlattice", description="q-classical polynomials on q-quadratic lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    def family_args(p):
        p.add_argument("--family", required=True, choices=sorted(FAMILIES))
        p.add_argument("--params", help="k=v,... (defaults to the family's standard parameters)")
        p.add_argument("--q", type=float, default=0.5)
        p.add_argument("--grid", help="s0:count window")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", help="write to PATH instead of stdout")

    p_eval = sub.add_parser("eval", help="evaluate p_n on points")
    family_args(p_eval)
    p_eval.add_argument("--n", type=int, required=True)
    p_eval.add_argument("--s", help="comma-separated s values")
    p_eval.add_argument("--x", help="comma-separated x values")
    p_eval.set_defaults(func=cmd_eval)

    p_coeffs = sub.add_parser("coeffs", help="extract recurrence or structure coefficients")
    family_args(p_coeffs)
    p_coeffs.add_argument("--kind", choices=["ttrr", "structure"], default="ttrr")
    p_coeffs.add_argument("--n", help="degree or lo..hi")
    p_coeffs.add_argument("--n-max", type=int, default=5)
    p_coeffs.add_argument("--tol", type=float, default=1e-7)
    p_coeffs.set_defaults(func=cmd_coeffs)

    p_verify = sub.add_parser("verify", help="run a verification suite")
    p_verify.add_argument("config", nargs="?", help="YAML suite (default: the shipped suite)")
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--n-max", type=int)
    p_verify.add_argument("--tol", type=float)
    p_verify.add_argument("--grid", help="s0:count window for every check")
    p_verify.add_argument("--format", choices=["csv", "json"])
    p_verify.add_argument("--out", help="report path (default: config output.path, else stdout)")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QLatticeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
