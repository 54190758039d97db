"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 node cap exceeded.  JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from .errors import CapacityExceeded, MahlerError
from .factorization import format_factorization, format_measure
from .forest import build_canonical_optimal, build_maximal_primitive, default_node_cap, export_tree
from .quotient import export_quotient, quotient
from .rational import parse_rational, prime_ladder
from .search import (
    ALL_ORACLE_CAP,
    DEFAULT_T_CAP,
    STRATEGIES,
    VerifyReport,
    mt_upper,
    optimal_factorizations,
    random_alpha,
    verify_theorems,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


@dataclass
class CliConfig:
    node_cap: int = 10**6
    oracle_prime_cap: int = ALL_ORACLE_CAP
    t_cap: float = DEFAULT_T_CAP
    output_format: str = "text"

    def __post_init__(self) -> None:
        if self.node_cap < 1 or self.oracle_prime_cap < 1 or self.t_cap <= 0:
            raise MahlerError("caps must be positive")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return value


def _build_tree(alpha, kind: str, cfg: CliConfig):
    if kind == "primitive":
        return build_maximal_primitive(alpha, cfg.node_cap)
    return build_canonical_optimal(alpha, cfg.node_cap)


def _write(data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode()
    sys.stdout.buffer.write(data)
    sys.stdout.flush()


def cmd_factor(args, cfg: CliConfig) -> int:
    ladder = prime_ladder(parse_rational(args.rational))
    if cfg.output_format == "json":
        _write(json.dumps({
            "alpha": str(ladder.alpha),
            "ladder": [{"prime": str(e.prime), "sign": e.sign} for e in ladder.entries],
            "partials": [str(p) for p in ladder.partials],
        }, indent=2) + "\n")
    elif ladder.N == 0:
        _write("empty ladder (alpha = 1, N = 0)\n")
    else:
        _write(ladder.describe() + "\n")
    return EXIT_OK


def cmd_tree(args, cfg: CliConfig) -> int:
    T = _build_tree(parse_rational(args.rational), args.kind, cfg)
    _write(export_tree(T, cfg.output_format))
    return EXIT_OK


def cmd_quotient(args, cfg: CliConfig) -> int:
    G = quotient(_build_tree(parse_rational(args.rational), args.kind, cfg))
    _write(export_quotient(G, cfg.output_format))
    return EXIT_OK


def cmd_optimal(args, cfg: CliConfig) -> int:
    result = optimal_factorizations(parse_rational(args.rational), args.strategy, cfg.node_cap)
    if cfg.output_format == "json":
        data = {
            "alpha": str(result.alpha),
            "strategy": result.strategy,
            "optimal": [[[str(e.num), str(e.den)] for e in F.entries] for F in result.optimal_set],
            "measure": [str(x) for x in result.measure],
            "candidates_examined": result.candidates_examined,
        }
        if args.trace:
            data["trace"] = [
                {"level": s.level, "before": s.before, "after": s.after,
                 "survivors": [format_factorization(F) for F in s.survivors]}
                for s in result.pruning_trace
            ]
        _write(json.dumps(data, indent=2) + "\n")
        return EXIT_OK
    lines = [format_factorization(F) for F in result.optimal_set]
    lines.append(f"measure: {format_measure(result.measure)}")
    if args.trace:
        lines.append(f"candidates examined: {result.candidates_examined}")
        for s in result.pruning_trace:
            survivors = ", ".join(format_factorization(F) for F in s.survivors)
            lines.append(f"level {s.level}: {s.before} -> {s.after}  [{survivors}]")
    _write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_mt(args, cfg: CliConfig) -> int:
    value = mt_upper(parse_rational(args.rational), args.t, cfg.node_cap)
    if cfg.output_format == "json":
        _write(json.dumps({"alpha": args.rational, "t": args.t, "mt_upper": value}) + "\n")
    else:
        _write(f"{value:.12g}\n")
    return EXIT_OK


def _report_lines(report: VerifyReport, verbose: bool) -> list[str]:
    head = f"{report.alpha}: {'pass' if report.passed else 'FAIL'}"
    lines = [head]
    for c in report.checks:
        if verbose or c.status == "fail":
            detail = "" if c.witness is None else f"  {json.dumps(c.witness, default=str)}"
            lines.append(f"  {c.status:4}  {c.theorem}{detail}")
    return lines


def cmd_verify(args, cfg: CliConfig) -> int:
    if (args.rational is None) == (args.random is None):
        print("verify: give either a rational or --random COUNT", file=sys.stderr)
        return EXIT_USAGE
    if args.rational is not None:
        targets = [(parse_rational(args.rational), args.seed)]
    else:
        rng = random.Random(args.seed)
        targets = [(random_alpha(rng, args.max_primes), args.seed + i) for i in range(args.random)]
    reports = [verify_theorems(alpha, cfg.node_cap, all_cap=cfg.oracle_prime_cap,
                               t_cap=cfg.t_cap, seed=seed) for alpha, seed in targets]
    if cfg.output_format == "json":
        _write(json.dumps([{"alpha": str(r.alpha), "passed": r.passed,
                            "checks": [c.as_dict() for c in r.checks]} for r in reports],
                          indent=2, default=str) + "\n")
    else:
        lines = []
        for r in reports:
            lines += _report_lines(r, verbose=len(reports) == 1)
        passed = sum(r.passed for r in reports)
        lines.append(f"{passed}/{len(reports)} rationals passed")
        _write("\n".join(lines) + "\n")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mahler-trees",
        description="Optimal factorizations of positive rationals under the t-metric Mahler measure.")
    parser.add_argument("--node-cap", type=_positive_int, default=None,
                        help="maximum tree size (default 10^6, or $MAHLER_NODE_CAP)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, formats=("text", "json")):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--format", choices=formats, default="text")
        return p

    p = add("factor", cmd_factor, "print the prime ladder")
    p.add_argument("rational")

    for name, func, help in (("tree", cmd_tree, "build and export a factorization tree"),
                             ("quotient", cmd_quotient, "build and export a measure class graph")):
        p = add(name, func, help, formats=("text", "json", "dot"))
        p.add_argument("rational")
        p.add_argument("--kind", choices=("primitive", "optimal"), default="optimal")

    p = add("optimal", cmd_optimal, "find all optimal factorizations")
    p.add_argument("rational")
    p.add_argument("--strategy", choices=STRATEGIES, default="canonical")
    p.add_argument("--trace", action="store_true", help="print the pruning trace")

    p = add("mt", cmd_mt, "upper bound on the t-metric Mahler measure")
    p.add_argument("rational")
    p.add_argument("--t", type=float, required=True)

    p = add("verify", cmd_verify, "check the structural theorems against brute force")
    p.add_argument("rational", nargs="?")
    p.add_argument("--random", type=_positive_int, metavar="COUNT")
    p.add_argument("--max-primes", type=_positive_int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-prime-cap", type=_positive_int, default=ALL_ORACLE_CAP)
    p.add_argument("--t-cap", type=float, default=DEFAULT_T_CAP)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        node_cap = args.node_cap if args.node_cap is not None else default_node_cap()
        cfg = CliConfig(node_cap=node_cap,
                        oracle_prime_cap=getattr(args, "oracle_prime_cap", ALL_ORACLE_CAP),
                        t_cap=getattr(args, "t_cap", DEFAULT_T_CAP),
                        output_format=args.format)
        return args.func(args, cfg)
    except CapacityExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except MahlerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
