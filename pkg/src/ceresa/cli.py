"""Command-line interface.

Exit codes: 0 proven / all passed, 1 bad input, 2 internal error,
3 inconclusive, 4 golden-table mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .cache import ResultCache
from .curve import is_prime, period, valid_primes
from .errors import CeresaError, DomainError, IndexSetError, InconsistencyError
from .rows import TableRow, write_csv
from .sweep import Job, Outcome, run_jobs
from .table import GOLDEN, GOLDEN_TOLERANCE, golden_by_n, load_golden
from .volume import READINGS, Verdict

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2
EXIT_INCONCLUSIVE = 3
EXIT_MISMATCH = 4

log = logging.getLogger("ceresa")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not internal ones
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", help="one JSON object per row instead of CSV")
    p.add_argument("--cache-dir", default=None,
                   help="cache directory (default: $CERESA_CACHE_DIR, then ~/.cache/ceresa)")
    p.add_argument("--no-cache", action="store_true", help="neither read nor write the result cache")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _numeric() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--digits", type=int, default=10, help="target correct digits of f(N,k) mod 1")
    p.add_argument("--method", choices=["series", "quadrature", "both"], default="both")
    p.add_argument("--param-reading", choices=READINGS, default="alternate")
    p.add_argument("--m-choice", choices=["small", "large"], default="small")
    p.add_argument("--prec-bits", type=int, default=None, help="override the automatic precision budget")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ceresa", description="Certified trace values f(N,k) for quotient Fermat curves.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common, numeric = _common(), _numeric()

    p = sub.add_parser("compute", parents=[common, numeric], help="compute one f(N,k)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("sweep", parents=[common, numeric], help="all valid primes up to --max-n")
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", required=True, help="output CSV path ('-' for stdout)")
    p.add_argument("--no-timing", action="store_true", help="write elapsed_ms as 0")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common, numeric], help="compare against the reference table")
    p.add_argument("--row", type=int, action="append", help="only this N (repeatable)")
    p.add_argument("--golden", default=None, help="alternative golden CSV (columns N,m,f)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("periods", parents=[common], help="exact period (1-z^a)(1-z^b)z^(ai+bj)")
    for name in ("n", "a", "b", "i", "j"):
        p.add_argument(f"--{name}", type=int, required=True)
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("cache", parents=[common], help="inspect or clear the result cache")
    p.add_argument("action", choices=["path", "clear", "stats", "compact"])
    p.set_defaults(func=cmd_cache)
    return parser


def _cache(args) -> ResultCache | None:
    return None if args.no_cache else ResultCache(args.cache_dir)


def _job(args, N: int, k: int, m: int | None = None) -> Job:
    return Job(N=N, k=k, m=m, m_choice=args.m_choice, digits=args.digits, method=args.method,
               reading=args.param_reading, prec_bits=args.prec_bits)


def _emit_rows(rows, as_json: bool, out) -> None:
    if as_json:
        for r in rows:
            out.write(r.to_json() + "\n")
    else:
        write_csv(rows, out)


def _raise_job_error(outcome: Outcome) -> None:
    name = (outcome.error or "").split(":", 1)[0]
    if name in ("InconsistencyError", "PrecisionError"):
        raise InconsistencyError(outcome.error)
    raise DomainError(outcome.error)


def cmd_compute(args) -> int:
    [outcome] = run_jobs([_job(args, args.n, args.k)], 1, _cache(args))
    if outcome.error:
        _raise_job_error(outcome)
    row = TableRow.from_result(outcome.result)
    _emit_rows([row], args.json, sys.stdout)
    return EXIT_OK if outcome.result.verdict == Verdict.NON_INTEGER_PROVEN else EXIT_INCONCLUSIVE


def _progress(args):
    if not args.verbose:
        return None

    def report(o: Outcome) -> None:
        state = "cached" if o.cached else ("error" if o.error else "done")
        print(f"N={o.job.N} k={o.job.k} {state}", file=sys.stderr, flush=True)

    return report


def cmd_sweep(args) -> int:
    if args.max_n < 7:
        raise DomainError("--max-n must be at least 7")
    jobs = [_job(args, N, args.k) for N in valid_primes(args.max_n) if args.k <= (N - 3) // 2]
    outcomes = run_jobs(jobs, args.jobs, _cache(args), _progress(args))
    rows = [
        TableRow.from_result(o.result, timing=not args.no_timing) if o.result
        else TableRow.failed(o.job.N, o.job.k, o.job.method, o.job.m)
        for o in sorted(outcomes, key=lambda o: o.job.N)
    ]
    if args.out == "-":
        _emit_rows(rows, args.json, sys.stdout)
    else:
        with Path(args.out).open("w", newline="") as fh:
            _emit_rows(rows, args.json, fh)
    proven = sum(r.verdict == Verdict.NON_INTEGER_PROVEN.value for r in rows)
    inconclusive = sum(r.verdict == Verdict.INCONCLUSIVE.value for r in rows)
    failed = len(rows) - proven - inconclusive
    print(f"rows={len(rows)} proven={proven} inconclusive={inconclusive} errors={failed}", file=sys.stderr)
    for o in outcomes:
        if o.error:
            print(f"  N={o.job.N}: {o.error}", file=sys.stderr)
    if failed:
        return EXIT_INTERNAL
    return EXIT_INCONCLUSIVE if inconclusive else EXIT_OK


def cmd_verify(args) -> int:
    golden = load_golden(args.golden) if args.golden else GOLDEN
    if args.row:
        by_n = golden_by_n(golden)
        missing = [n for n in args.row if n not in by_n]
        if missing:
            raise DomainError(f"no golden row for N in {missing}")
        golden = tuple(by_n[n] for n in args.row)
    cache = _cache(args)

    def compare(reading: str):
        jobs = [Job(N=g.N, k=1, m=g.m, digits=args.digits, method=args.method, reading=reading,
                    prec_bits=args.prec_bits) for g in golden]
        report = []
        for g, o in zip(golden, run_jobs(jobs, args.jobs, cache, _progress(args))):
            if o.error:
                report.append((g, None, False, o.error))
                continue
            got = o.result.value_mod1.mid_fraction()
            ok = abs(float(got) - g.f) <= GOLDEN_TOLERANCE
            report.append((g, o.result, ok, None))
        return report

    report = compare(args.param_reading)
    bad = [g.N for g, _, ok, _ in report if not ok]
    if args.json:
        for g, r, ok, err in report:
            print(json.dumps({"N": g.N, "m": g.m, "golden": g.value,
                              "computed": None if r is None else round(r.value, 9),
                              "status": "pass" if ok else "FAIL", "error": err}))
    else:
        for g, r, ok, err in report:
            got = err if r is None else f"{r.value:.9f}"
            print(f"N={g.N:<4d} m={g.m:<4d} golden={g.value:<9s} computed={got}  {'pass' if ok else 'FAIL'}")
    print(f"{len(report) - len(bad)}/{len(report)} rows pass ({args.param_reading} reading)")
    if not bad:
        return EXIT_OK
    print("mismatched rows: " + ", ".join(map(str, bad)))
    other = [x for x in READINGS if x != args.param_reading][0]
    golden = tuple(g for g in golden if g.N in bad)
    for g, r, ok, err in compare(other):
        print(f"  N={g.N}: {args.param_reading}-reading FAIL; {other}-reading "
              f"{err if r is None else f'{r.value:.9f}'} {'pass' if ok else 'FAIL'}")
    return EXIT_MISMATCH


def cmd_periods(args) -> int:
    if not is_prime(args.n):
        raise DomainError(f"N={args.n} is not prime")
    z = period(args.a, args.b, args.i, args.j, args.n)
    value = z.evaluate()
    if args.json:
        print(json.dumps({"N": args.n, "a": args.a, "b": args.b, "i": args.i, "j": args.j,
                          "coeffs": list(z.coeffs), "re": value.real, "im": value.imag}))
    else:
        print("coeffs: " + " ".join(map(str, z.coeffs)))
        print(f"value: {value.real:.15g} {value.imag:+.15g}i")
    return EXIT_OK


def cmd_cache(args) -> int:
    cache = ResultCache(args.cache_dir)
    if args.action == "path":
        print(cache.path)
    elif args.action == "clear":
        print(f"removed {cache.clear()} entries")
    elif args.action == "compact":
        print(f"dropped {cache.compact()} lines")
    else:
        s = cache.stats()
        if args.json:
            print(json.dumps(asdict(s)))
        else:
            for k, v in asdict(s).items():
                print(f"{k}: {v}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except IndexSetError as exc:
        print(f"error: IndexSetError: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InconsistencyError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}" if ":" not in str(exc) else f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CeresaError, OSError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:
        log.exception("unexpected failure")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
