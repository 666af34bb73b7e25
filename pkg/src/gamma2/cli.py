"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 curvature symmetry violation in an input file, 4 identity residual above
tolerance under ``--check``.
"""

from __future__ import annotations

import argparse
import sys
import time

from .invariants import TOL_RELATIVE, TOL_STRUCTURAL
from .io import (
    StructureParseError,
    SymmetryError,
    dumps_csv,
    dumps_json,
    load_structure,
    provenance,
    write_output,
)
from .reports import (
    cone_concavity,
    cone_h4_witness,
    cone_sample,
    invariants_document,
    sweep_h2r,
    sweep_k_bound,
    sweep_product_signs,
    sweep_surgery_sigma2,
)
from .verification import CHECKS, run_checks

EXIT_FAIL, EXIT_USAGE, EXIT_SYMMETRY, EXIT_RESIDUAL = 1, 2, 3, 4

SWEEP_HELP = """\
sweep kinds and parameters (KEY=RANGE, ranges like 6..11, 3,5,7 or 4):
  product-signs   p=2..5 q=4 r=0.1 base=sphere|flat
                  columns: p q base r scal sigma2 scal_sign sigma2_sign
                           expected largest_r
  surgery-sigma2  n=5..12 c=3..n
                  columns: n c closed_form direct rel_err sign
  h2r             n=5..8 c=3..n r=1..(c-1)/2
                  columns: n c r closed_form direct rel_err
  k-bound         n=4..12
                  columns: n bound max_k unrestricted_k open_k finite_required_k
"""

CONE_HELP = """\
cone actions and parameters (KEY=VALUE):
  sample      n=4 k=2 trials=1000   Gamma_k membership counts of random W + gA
  concavity   n=5 k=2 trials=10000  minimum concavity residual inside Gamma_k
  h4-witness  n=5                   search (up to --budget trials) for R, Rbar
                                    with h_4 > 0 at both and < 0 at the midpoint;
                                    reports "found": false and exits 0 if none
"""


class UsageError(ValueError):
    pass


def parse_int_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise UsageError(f"empty range {text!r}")
            return list(range(lo, hi + 1))
        return sorted({int(x) for x in text.split(",")})
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad integer range {text!r}") from exc


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad number list {text!r}") from exc
    if not all(v > 0 for v in vals):
        raise UsageError("values must be positive")
    return vals


def parse_params(items, allowed) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in allowed:
            raise UsageError(f"unexpected parameter {item!r}; expected one of "
                             + ", ".join(f"{k}=..." for k in allowed))
        out[key] = value
    return out


def _render(data, fmt: str) -> str:
    if fmt == "csv":
        if isinstance(data, dict):
            data = [{"field": k, "value": v} for k, v in data.items()
                    if isinstance(v, (int, float, str, bool))]
        return dumps_csv(data)
    return dumps_json(data)


# ---------------------------------------------------------------------------
# subcommands

def cmd_invariants(args) -> int:
    try:
        R, digest = load_structure(args.input)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StructureParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SymmetryError as exc:
        print(f"symmetry violation: {exc}", file=sys.stderr)
        return EXIT_SYMMETRY
    doc, ok = invariants_document(R, digest, check=args.check,
                                  tol_structural=args.tol_structural,
                                  tol_relative=args.tol_relative)
    if args.format == "csv":
        rep = doc["report"]
        flat = {k: v for k, v in rep.items() if isinstance(v, (int, float))}
        flat.update({f"sigma_{i + 1}": v for i, v in enumerate(rep["sigma"])})
        flat.update({f"h_{2 * i}": v for i, v in enumerate(rep["gauss_bonnet"])})
        flat.update({f"gamma_{i + 1}": v for i, v in enumerate(rep["gamma"])})
        write_output(_render(flat, "csv"), args.out)
    else:
        write_output(dumps_json(doc), args.out)
    if not ok:
        bad = [k for k, v in doc["checks"].items() if not v["pass"]]
        print("residual above tolerance: " + ", ".join(bad), file=sys.stderr)
        return EXIT_RESIDUAL
    return 0


def _sweep_rows(kind: str, params: dict[str, str]) -> list[dict]:
    if kind == "product-signs":
        p = parse_int_range(params.get("p", "2..5"))
        q = parse_int_range(params.get("q", "4"))
        if len(q) != 1 or q[0] < 1 or min(p) < 2:
            raise UsageError("need p >= 2 and a single q >= 1")
        base = params.get("base", "sphere")
        if base not in ("sphere", "flat"):
            raise UsageError("base must be sphere or flat")
        return sweep_product_signs(p, q[0], parse_float_list(params.get("r", "0.1")), base)
    if kind == "surgery-sigma2":
        ns = parse_int_range(params.get("n", "5..12"))
        pairs = []
        for n in ns:
            cs = parse_int_range(params.get("c", f"3..{n}"))
            pairs += [(n, c) for c in cs if 3 <= c <= n]
        if not pairs or min(ns) < 3 or max(ns) > 12:
            raise UsageError("need 3 <= c <= n <= 12")
        return sweep_surgery_sigma2(pairs)
    if kind == "h2r":
        ns = parse_int_range(params.get("n", "5..8"))
        triples = []
        for n in ns:
            for c in parse_int_range(params.get("c", f"3..{n}")):
                if not 3 <= c <= n:
                    continue
                rs = parse_int_range(params.get("r", f"1..{max(1, (c - 1) // 2)}"))
                triples += [(n, c, r) for r in rs if r >= 1 and 2 * r <= c - 1]
        if not triples or max(ns) > 12:
            raise UsageError("need 3 <= c <= n <= 12 and 1 <= r <= (c-1)/2")
        return sweep_h2r(triples)
    ns = parse_int_range(params.get("n", "4..12"))
    if min(ns) < 4:
        raise UsageError("k-bound needs n >= 4")
    return sweep_k_bound(ns)


SWEEP_KEYS = {"product-signs": ("p", "q", "r", "base"), "surgery-sigma2": ("n", "c"),
              "h2r": ("n", "c", "r"), "k-bound": ("n",)}


def cmd_sweep(args) -> int:
    try:
        rows = _sweep_rows(args.kind, parse_params(args.params, SWEEP_KEYS[args.kind]))
    except UsageError as exc:
        print(f"invalid range: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.format == "json":
        text = dumps_json({"sweep": args.kind, "rows": rows, "provenance": provenance()})
    else:
        text = dumps_csv(rows)
    write_output(text, args.out)
    return 0


def cmd_cone(args) -> int:
    try:
        params = parse_params(args.params, ("n", "k", "trials"))
        n = int(params.get("n", "4" if args.action == "sample" else "5"))
        k = int(params.get("k", "2"))
        trials = int(params.get("trials", "1000" if args.action == "sample" else "10000"))
        lo = 4 if args.action == "h4-witness" else 3
        if not lo <= n <= 12:
            raise UsageError(f"n={n} outside {lo}..12")
        if not 1 <= k <= n or trials < 1 or args.budget < 1:
            raise UsageError("need 1 <= k <= n, trials >= 1 and budget >= 1")
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.action == "sample":
        doc = cone_sample(n, k, trials, args.seed)
    elif args.action == "concavity":
        doc = cone_concavity(n, k, trials, args.seed)
    else:
        doc = cone_h4_witness(n, args.seed, args.budget)
    doc["provenance"] = provenance(seed=args.seed)
    write_output(_render(doc, args.format), args.out)
    return 0


def cmd_verify(args) -> int:
    start = time.perf_counter()
    results = run_checks(seed=args.seed, quick=args.quick, names=args.only or None,
                         report=lambda r: print(r.line(), flush=True))
    failed = [r.name for r in results if not r.passed]
    total = time.perf_counter() - start
    mode = "quick" if args.quick else "full"
    if failed:
        print(f"FAILED ({mode}, {total:.1f}s): {', '.join(failed)}")
        return EXIT_FAIL
    print(f"all {len(results)} checks passed ({mode}, {total:.1f}s)")
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(
        prog="gamma2",
        description="Curvature invariants, sweeps and cone experiments for "
                    "algebraic curvature structures.",
        epilog="Set GAMMA2_THREADS to cap the worker pool.  Exit codes: 1 verify "
               "failure, 2 usage/parse error, 3 symmetry violation, 4 residual "
               "breach under --check.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", parents=[common], help="full invariant report of a structure file")
    p.add_argument("input", help="structure file (JSON)")
    p.add_argument("--check", action="store_true", help="also run all identity cross-checks")
    p.add_argument("--tol-structural", type=float, default=TOL_STRUCTURAL)
    p.add_argument("--tol-relative", type=float, default=TOL_RELATIVE)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("sweep", parents=[common], help="closed-form tables as CSV",
                       epilog=SWEEP_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("kind", choices=tuple(SWEEP_KEYS))
    p.add_argument("params", nargs="*", metavar="KEY=RANGE")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("cone", parents=[common], help="cone membership and convexity experiments",
                       epilog=CONE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("action", choices=("sample", "concavity", "h4-witness"))
    p.add_argument("params", nargs="*", metavar="KEY=VALUE")
    p.add_argument("--budget", type=int, default=100_000, help="h4-witness trial budget")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("verify", help="run the full identity and property suite")
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--only", nargs="+", choices=tuple(CHECKS), metavar="CHECK",
                   help="run only these checks: " + ", ".join(CHECKS))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
