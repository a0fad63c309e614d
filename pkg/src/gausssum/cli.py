"""Command-line front end.

Examples:
    gausssum sum --a 0.31830988618 --b 0.1 --N 100000000
    gausssum trace --a 1/7 --b 0 --N 1000 --format csv
    gausssum special-fn --fn F --xi 0.3 --a 0.01
    gausssum growth --a 0.3183 --b 0.1 --L 1:4 --format csv
    gausssum dynamics norms --phi pow:1/6 --L 1000 --samples 10000 --seed 1
    gausssum dynamics invariance --samples 100000 --seed 1
    gausssum dynamics ba-orbit --a 0.61803398875 --m 3 --n 2
    gausssum curlicue --a 0.3183 --b 0.1 --N 10000 --out path.csv
    gausssum bench --N 10000 100000000 --reps 5

Exit codes: 0 ok, 2 domain error, 3 precision or tolerance failure, 4 io.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time
from dataclasses import asdict
from fractions import Fraction

import numpy as np

from .errors import DomainError, GaussSumError
from .numeric import Params, PrecisionConfig

EXIT_IO = 4


def rational(s: str) -> Fraction:
    """'0.3', '1/7', '-2e-3' -> exact Fraction."""
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}")


def level_range(s: str) -> list:
    if ":" in s:
        lo, hi = s.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(s)]


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--tol", type=float, default=1e-10, help="quadrature tolerance (default 1e-10)")
    p.add_argument("--bits", type=int, default=64, help="fixed-point phase bits (default 64)")
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _params(p: argparse.ArgumentParser):
    p.add_argument("--a", type=rational, required=True, help="a in (0, 1); decimal or p/q")
    p.add_argument("--b", type=rational, default=Fraction(0), help="b in (-1/2, 1/2] (default 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gausssum", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sum", help="evaluate S(N, a, b)")
    _params(p)
    p.add_argument("--N", "--n", dest="N", type=int, required=True)
    p.add_argument("--method", choices=("renorm", "naive", "both", "asymptotic"), default="renorm")
    _common(p)

    p = sub.add_parser("trace", help="the renormalization cascade level by level")
    _params(p)
    p.add_argument("--N", "--n", dest="N", type=int, required=True)
    _common(p)

    p = sub.add_parser("special-fn", help="F, G, the Fresnel integral or the small-a limit of F")
    p.add_argument("--fn", choices=("F", "G", "fresnel", "asymptotic"), default="F")
    p.add_argument("--xi", type=rational, required=True, help="argument (t for fresnel)")
    p.add_argument("--a", type=rational, default=None)
    _common(p)

    p = sub.add_parser("growth", help="M(L) = max |S(N)|/sqrt(N) over level blocks")
    _params(p)
    lv = p.add_mutually_exclusive_group(required=True)
    lv.add_argument("--L", type=level_range, help="level or range lo:hi")
    lv.add_argument("--lmax", type=int, help="levels 1..lmax")
    p.add_argument("--scan-budget", type=int, default=1 << 20)
    _common(p)

    p = sub.add_parser("dynamics", help="skew-product dynamics")
    dsub = p.add_subparsers(dest="dyn", required=True)
    q = dsub.add_parser("norms", help="Monte Carlo norms of the counting function")
    q.add_argument("--phi", action="append", required=True, help="threshold, e.g. pow:1/6 (repeatable)")
    q.add_argument("--L", type=int, required=True)
    q.add_argument("--samples", type=int, default=10000)
    q.add_argument("--checkpoints", type=int, nargs="*", default=None)
    _common(q)
    q = dsub.add_parser("invariance", help="checks of the invariant density on [0, 3]")
    q.add_argument("--samples", type=int, default=100000)
    _common(q)
    q = dsub.add_parser("ba-orbit", help="orbit of b = {(ma + n)/2}_0")
    q.add_argument("--a", type=rational, required=True)
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--jmax", type=int, default=200)
    _common(q)

    p = sub.add_parser("curlicue", help="export the partial-sum path as CSV")
    _params(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--annotate", action="store_true", help="add L(n) and a_L(n) columns")
    _common(p)

    p = sub.add_parser("bench", help="naive vs cascade wall time")
    _params(p)
    p.add_argument("--N", type=int, nargs="+", required=True)
    p.add_argument("--reps", type=int, default=5)
    _common(p)
    # bench has a sensible default point
    p.set_defaults(a=Fraction(3183098861837907, 10 ** 16), b=Fraction(1, 10))
    for act in p._actions:
        if act.dest == "a":
            act.required = False
    return ap


# ---------------------------------------------------------------------------

def _rows_csv(rows) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def _c(z: complex) -> dict:
    return {"re": z.real, "im": z.imag, "abs": abs(z)}


def run(args) -> tuple:
    """Execute a parsed command. Returns (outputs, csv_rows or None)."""
    from . import asymptotics, renorm, special
    cfg = PrecisionConfig(working_bits=args.bits, quad_tolerance=args.tol)
    cmd = args.command

    if cmd == "sum":
        p = Params(args.a, args.b)
        if args.method in ("renorm", "naive", "both"):
            out = {}
            if args.method != "naive":
                t0 = time.perf_counter()
                tr = renorm.build_trace(args.N, p, cfg, direct_below=32, tiny_a=1e-6)
                out["renorm"] = {"value": _c(tr.value), "err_estimate": tr.err_estimate,
                                 "L": tr.L, "seconds": time.perf_counter() - t0}
            if args.method != "renorm":
                t0 = time.perf_counter()
                v = renorm.naive_sum(args.N, p, cfg)
                out["naive"] = {"value": _c(v), "seconds": time.perf_counter() - t0}
            if args.method == "both":
                out["residual"] = abs(tr.value - v)
            return out, None
        av = asymptotics.asymptotic_sum(args.N, p, cfg)
        return {"value": _c(av.value), "regime": av.regime, "err_order": av.err_order,
                "L": av.L}, None

    if cmd == "trace":
        tr = renorm.build_trace(args.N, Params(args.a, args.b), cfg)
        rows = []
        for st, t, e in zip(tr.steps, tr.terms, tr.errors):
            r = st.as_row()
            r.update(term_re=t.real, term_im=t.imag, err=e)
            rows.append(r)
        return {"value": _c(tr.value), "err_estimate": tr.err_estimate, "levels": rows}, rows

    if cmd == "special-fn":
        if args.fn == "fresnel":
            v = special.fresnel_F(float(args.xi))
            return {"value": _c(v.value), "err_estimate": v.err_estimate}, None
        if args.a is None:
            raise DomainError(f"--a is required for {args.fn}")
        if args.fn == "asymptotic":
            return {"value": _c(special.asymptotic_calF(args.xi, args.a))}, None
        fn = special.calF if args.fn == "F" else special.calG
        v = fn(args.xi, args.a, cfg)
        return {"value": _c(v.value), "err_estimate": v.err_estimate}, None

    if cmd == "growth":
        p = Params(args.a, args.b)
        rows = []
        for L in args.L or range(1, args.lmax + 1):
            g = asymptotics.M_of_L(L, p, cfg, scan_budget=args.scan_budget)
            rows.append({"L": g.L, "M": g.M, "key": g.key, "M_times_key": g.M * g.key,
                         "N_argmax": g.N_argmax, "N_minus": g.N_minus, "N_plus": g.N_plus,
                         "a_L": g.a_L, "b_L": g.b_L, "structured_scan": g.exhausted})
        return {"levels": rows}, rows

    if cmd == "dynamics":
        rng = np.random.default_rng(args.seed)
        if args.dyn == "norms":
            from .dynamics.counting import counting_norms, parse_phi
            phis = {}
            for spec in args.phi:
                f, _ = parse_phi(spec)
                phis[spec] = f
            res = counting_norms(args.L, phis, args.samples, rng, args.checkpoints)
            rows = [asdict(s) for v in res.values() for s in v]
            return {"norms": rows}, rows
        if args.dyn == "invariance":
            from .dynamics.tilde import tilde_invariance_check
            rep = tilde_invariance_check(args.samples, rng)
            rows = [{"lag": l, "correlation": c} for l, c in zip(rep.lags, rep.correlation)]
            return asdict(rep), rows
        from .dynamics.tilde import ba_orbit
        o = ba_orbit(args.a, args.m, args.n, args.jmax)
        rows = [{"j": j, "n_j": int(n), "eps_j": int(e), "b_j": str(b), "b_j_float": float(b)}
                for j, (n, e, b) in enumerate(zip(o.n_seq, o.eps_seq, o.b_exact))]
        out = {"j0": o.j0, "settled": o.settled, "table_ok": o.table_ok,
               "max_float_gap": float(o.max_float_gap), "reason": o.reason, "orbit": rows}
        return out, rows

    if cmd == "curlicue":
        from .curlicue import export_curlicue
        p = Params(args.a, args.b)
        if args.out is None:
            path = export_curlicue(args.N, p, sys.stdout, cfg, args.annotate)
        else:
            path = export_curlicue(args.N, p, args.out, cfg, args.annotate)
        return {"N": args.N, "final": _c(complex(path.points[-1]))}, None

    if cmd == "bench":
        from .bench import bench
        rows = []
        for r in bench(args.N, Params(args.a, args.b), cfg, args.reps):
            d = r.as_dict()
            d["value_re"], d["value_im"] = d.pop("value")
            rows.append(d)
        return {"records": rows}, rows

    raise DomainError(f"unknown command {cmd}")


def _write(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def main(argv=None) -> int:
    from .report import build_report, emit
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        outputs, rows = run(args)
        if args.command == "curlicue":
            # the CSV went to --out (or stdout); the summary goes to stderr
            sys.stderr.write(emit(build_report("curlicue", vars(args), _cfg(args), args.seed, outputs)))
            return 0
        if args.format == "csv" and rows is not None:
            text = _rows_csv(rows)
        else:
            name = args.command + (" " + args.dyn if args.command == "dynamics" else "")
            text = emit(build_report(name, vars(args), _cfg(args), args.seed, outputs))
        _write(text, args.out)
    except OSError as e:
        print(f"gausssum: io error: {e}", file=sys.stderr)
        return EXIT_IO
    except GaussSumError as e:
        print(f"gausssum: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    return 0


def _cfg(args) -> PrecisionConfig:
    return PrecisionConfig(working_bits=args.bits, quad_tolerance=args.tol)


if __name__ == "__main__":
    sys.exit(main())
