"""Command-line entry point.

Exit codes: 0 success, 1 a check failed, 2 usage or parameter error,
3 the two exact routes disagreed.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

from altbinom import exact, floateval, mc, scan, selftest
from altbinom.exact import IdentityInstance, InvalidInstanceError, format_rational
from altbinom.floateval import EvalStrategy
from altbinom.scan import OracleMismatchError, ScanGrid

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ORACLE = 0, 1, 2, 3

_SEED_RE = re.compile(r"(0[xX][0-9a-fA-F]+|\d+)$")


class UsageError(Exception):
    pass


def rational_arg(text: str) -> Fraction:
    try:
        return exact.parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def seed_arg(text: str) -> int:
    if not _SEED_RE.match(text.strip()):
        raise argparse.ArgumentTypeError(f"seed must be decimal or 0x-hex, got {text!r}")
    value = int(text.strip(), 0)
    if value >= 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def int_list_arg(text: str) -> List[int]:
    """'0..5', '1,2,5' or a mix such as '0..3,10'."""
    out: List[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None
    return out


def rational_list_arg(text: str) -> List[Fraction]:
    return [rational_arg(p) for p in text.split(",")]


def strategy_list_arg(text: str) -> List[EvalStrategy]:
    try:
        return [EvalStrategy.parse(p) for p in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _load_grid(path: str) -> ScanGrid:
    try:
        data = json.loads(Path(path).read_text())
        return ScanGrid.from_dict(data)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"cannot read grid file {path}: {exc}") from None


def _instance(args) -> IdentityInstance:
    if args.n is None or args.theta is None:
        raise UsageError("both -n and --theta are required")
    return IdentityInstance(args.n, args.m, args.theta)


def cmd_verify(args) -> int:
    if args.grid:
        instances = _load_grid(args.grid).instances()
    else:
        instances = [_instance(args)]
    ok = True
    for inst in instances:
        lhs = exact.lhs_alternating_sum(inst)
        rhs = exact.rhs_general(inst)
        verdict = "VERIFIED" if lhs == rhs else "FAILED"
        ok &= lhs == rhs
        print(f"{inst}: {format_rational(lhs)} = {format_rational(rhs)}  {verdict}")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_eval(args) -> int:
    inst = _instance(args)
    strategies = None if args.all or not args.strategy else args.strategy
    rows = floateval.error_report(inst, strategies)
    if not rows:
        raise UsageError(f"none of the requested strategies apply to {inst}")
    print("strategy,value,abs_error,rel_error,cancellation_index")
    for r in rows:
        print(",".join(r.csv_fields()))
    return EXIT_OK


def cmd_bench(args) -> int:
    inst = _instance(args)
    exact_start = time.perf_counter()
    for _ in range(args.repeat):
        exact.rhs_general(inst)
    exact_t = (time.perf_counter() - exact_start) / args.repeat
    print("strategy,seconds_per_eval,rel_error")
    print(f"Exact,{exact_t:.6e},0")
    for s in floateval.applicable_strategies(inst):
        start = time.perf_counter()
        for _ in range(args.repeat):
            floateval._raw_value(inst, s)
        elapsed = (time.perf_counter() - start) / args.repeat
        rel = floateval.eval_float(inst, s).rel_error
        print(f"{s.label},{elapsed:.6e},{rel:.5e}")
    return EXIT_OK


def cmd_mc(args) -> int:
    inst = _instance(args)
    if inst.n < 1 or inst.theta <= 0:
        raise UsageError("Monte Carlo needs n >= 1 and theta > 0")
    try:
        cfg = mc.StreamConfig.for_samples(args.samples, args.seed, args.chunks)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    est = mc.estimate_p_less(inst, cfg, threads=args.threads)
    record = est.to_dict()
    status = EXIT_OK
    if args.check:
        target = exact.rhs_general(inst)
        passed = est.within(target, 4.0)
        record.update(exact=format_rational(target), exact_decimal=float(target),
                      check="PASS" if passed else "FAIL")
        status = EXIT_OK if passed else EXIT_CHECK
    if args.json:
        print(json.dumps(record))
    else:
        for key, value in record.items():
            print(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")
    return status


def cmd_scan(args) -> int:
    if args.grid_file:
        grid = _load_grid(args.grid_file)
    else:
        if not (args.n_values and args.m_values and args.theta_values):
            raise UsageError("give --grid-file or all of -n, -m, --theta")
        cfg = None
        if args.mc_samples:
            try:
                cfg = mc.StreamConfig.for_samples(args.mc_samples, args.seed, args.chunks)
            except ValueError as exc:
                raise UsageError(str(exc)) from None
        grid = ScanGrid(
            args.n_values,
            args.m_values,
            args.theta_values,
            args.strategies or list(EvalStrategy),
            cfg,
        )
    rows = scan.run_scan(grid, threads=args.threads)
    payload = scan.emit(rows, args.format)
    if args.out:
        Path(args.out).write_bytes(payload)
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest.run_selftest(full=args.full, seed=args.seed, threads=args.threads,
                                    out=sys.stdout)
    failed = [r.name for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} suites passed")
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _add_instance_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("-n", type=int, required=required, help="number of Exp(1) variables")
    p.add_argument("-m", type=int, default=1, help="gamma shape (default 1)")
    p.add_argument("--theta", type=rational_arg, required=required,
                   help="integer or p/q; decimals are rejected")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="altbinom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="exact check of both sides")
    _add_instance_args(p, required=False)
    p.add_argument("--grid", metavar="PATH", help="grid file (JSON) instead of one instance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("eval", help="floating-point evaluation with error report")
    _add_instance_args(p)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--strategy", type=EvalStrategy.parse, action="append",
                       help="naive, compensated, pairwise, product or symdp (repeatable)")
    group.add_argument("--all", action="store_true", help="every applicable strategy (default)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="wall-clock time per strategy")
    _add_instance_args(p)
    p.add_argument("--repeat", type=int, default=100)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mc", help="Monte Carlo estimate of P(X < T_m)")
    _add_instance_args(p)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=seed_arg, default=42)
    p.add_argument("--chunks", type=int, default=16)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--check", action="store_true", help="compare with the exact value (4 sigma)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("scan", help="sweep a grid and emit CSV or JSON")
    p.add_argument("--grid-file", metavar="PATH")
    p.add_argument("-n", dest="n_values", type=int_list_arg, help="e.g. 0..5 or 1,2,5")
    p.add_argument("-m", dest="m_values", type=int_list_arg)
    p.add_argument("--theta", dest="theta_values", type=rational_list_arg, help="e.g. 1/2,1,2")
    p.add_argument("--strategies", type=strategy_list_arg)
    p.add_argument("--mc-samples", type=int, default=0)
    p.add_argument("--seed", type=seed_arg, default=42)
    p.add_argument("--chunks", type=int, default=16)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("selftest", help="run the built-in check suites")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--fast", action="store_true", help="exact and float suites (default)")
    group.add_argument("--full", action="store_true", help="also the Monte Carlo suites")
    p.add_argument("--seed", type=seed_arg, default=42)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleMismatchError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ORACLE
    except (UsageError, InvalidInstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
