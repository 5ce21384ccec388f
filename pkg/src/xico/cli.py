"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical precision
not reached.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import List, Optional

from .asymptotics import sigma_sq
from .data import load_csv
from .errors import DataError, DomainError, PrecisionNotReached
from .estimator import xi as compute_xi
from .estimator import xi_with_graph
from .inference import independence_test
from .nng import graph_functionals
from .sim import SimConfig, functional_convergence_study, null_variance_study, table_study

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v).lower() if isinstance(v, bool) else "NA"
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


def _csv_cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return repr(v) if isinstance(v, float) else v


def _emit(records: List[dict], fmt: str, out) -> None:
    if fmt == "json":
        payload = records[0] if len(records) == 1 else records
        out.write(json.dumps(payload) + "\n")
    elif fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        keys = list(records[0])
        w.writerow(keys)
        for r in records:
            w.writerow([_csv_cell(r[k]) for k in keys])
    else:
        for r in records:
            out.write(" ".join(f"{k}={_fmt(v)}" for k, v in r.items()) + "\n")


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("XICO_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"XICO_THREADS must be an integer, got {env!r}")
    return 1


def cmd_xi(args, out) -> int:
    ds = load_csv(args.input, args.y_col)
    variants = {"rank": ["rank_ac"], "ac": ["ac"], "both": ["rank_ac", "ac"]}[args.variant]
    records = [compute_xi(ds, args.seed, v).as_dict() for v in variants]
    _emit(records, args.format, out)
    return EXIT_OK


def cmd_test(args, out) -> int:
    ds = load_csv(args.input, args.y_col)
    res = independence_test(ds, args.level, args.seed)
    rec = res.as_dict()
    if args.format != "json":
        rec["warnings"] = "; ".join(rec["warnings"]) or "none"
    _emit([rec], args.format, out)
    return EXIT_OK


def cmd_sigma(args, out) -> int:
    records = [sigma_sq(d, args.precision).as_dict() for d in args.d]
    _emit(records, args.format, out)
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    reports = []
    for d in args.d:
        for n in args.n:
            cfg = SimConfig(
                d=d, n=n, rho=args.rho, alpha=tuple(args.alpha), replications=args.reps,
                seed=args.seed, levels=tuple(args.levels), strict_psd=args.strict_psd,
                reference_n=args.reference_n,
            )
            reports.append(table_study(cfg, n_jobs=_threads(args)))
    if args.format == "json":
        out.write(json.dumps([r.as_dict() for r in reports]) + "\n")
    elif args.format == "csv":
        for i, r in enumerate(reports):
            text = r.to_csv()
            out.write(text if i == 0 else text.split("\n", 1)[1])
    else:
        out.write("\n".join(r.to_text() for r in reports) + "\n")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            for i, r in enumerate(reports):
                text = r.to_csv()
                fh.write(text if i == 0 else text.split("\n", 1)[1])
    return EXIT_OK


def cmd_nullvar(args, out) -> int:
    records = []
    for d in args.d:
        var, se = null_variance_study(d, args.n, args.reps, args.seed, n_jobs=_threads(args))
        records.append({
            "d": d, "n": args.n, "reps": args.reps, "seed": args.seed,
            "empirical_var": var, "se": se, "sigma_sq": sigma_sq(d).sigma_sq,
        })
    _emit(records, args.format, out)
    return EXIT_OK


def cmd_graphstats(args, out) -> int:
    if args.input:
        ds = load_csv(args.input, args.y_col)
        _, g = xi_with_graph(ds, args.seed, "rank_ac")
        f = graph_functionals(g)
        rec = {"n": f.n, "d": ds.d, "t_sum": f.t_sum, "c_sum": f.c_sum,
               "t_mean": f.t_mean, "c_mean": f.c_mean, "seed": args.seed}
    else:
        if args.d is None or args.n is None:
            raise UsageError("graphstats needs --input or both --d and --n")
        rep = functional_convergence_study(args.d, args.n, args.reps, args.seed, n_jobs=_threads(args))
        rec = dict(rep.as_dict(), seed=args.seed)
    _emit([rec], args.format, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="xico", description="Nearest-neighbor rank correlation tools")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap for simulations (default: $XICO_THREADS or 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = dict(choices=["text", "json", "csv"], default="text")

    s = sub.add_parser("xi", help="compute the coefficient for a CSV file")
    s.add_argument("--input", required=True)
    s.add_argument("--y-col", default="y")
    s.add_argument("--variant", choices=["rank", "ac", "both"], default="rank")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_xi)

    s = sub.add_parser("test", help="asymptotic independence test")
    s.add_argument("--input", required=True)
    s.add_argument("--y-col", default="y")
    s.add_argument("--level", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("sigma", help="asymptotic null variance constants")
    s.add_argument("--d", type=_int_list, required=True)
    s.add_argument("--precision", type=float, default=1e-8)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_sigma)

    s = sub.add_parser("simulate", help="mean / RMSE / rejection frequency tables")
    s.add_argument("--d", type=_int_list, required=True)
    s.add_argument("--n", type=_int_list, required=True)
    s.add_argument("--rho", type=float, default=0.0)
    s.add_argument("--alpha", type=_float_list, default=[1.0, 10.0, 500.0])
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--levels", type=_float_list, default=[0.05, 0.1])
    s.add_argument("--strict-psd", type=_bool, default=True)
    s.add_argument("--reference-n", type=int, default=50_000)
    s.add_argument("--out")
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("nullvar", help="empirical null variance of sqrt(n) * xi_n")
    s.add_argument("--d", type=_int_list, required=True)
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--reps", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_nullvar)

    s = sub.add_parser("graphstats", help="nearest-neighbor graph functionals")
    s.add_argument("--input")
    s.add_argument("--y-col", default="y")
    s.add_argument("--d", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", **fmt)
    s.set_defaults(func=cmd_graphstats)
    return p


def main(argv: Optional[List[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except (UsageError, DomainError) as exc:
        print(f"xico: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"xico: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PrecisionNotReached as exc:
        print(f"xico: precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except ValueError as exc:
        print(f"xico: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
