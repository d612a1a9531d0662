"""Scenario-driven command line.

Subcommands: simulate, verify, partition, norm, sigma, iterate.
Exit codes: 0 success, 1 verification failure, 2 usage or config
error, 3 construction infeasible.  Identical scenario + seed gives
byte-identical output regardless of --threads.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .base import ConstructionError, partition_to_lines
from .cesaro import series_csv_lines
from .norms import best_split, norm_L1, norm_L1_plus_Linf, norm_Linf
from .numeric import format_real, parse_scalar, to_cplx, to_exact
from .scenario import Scenario, ScenarioError, load_scenario
from .shift import iterate_value, sigma, sign_flip_count
from .verify import SUITE_NAMES, run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


def _load(args) -> Scenario:
    sc = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ScenarioError("--seed must fit in 64 bits")
        sc = replace(sc, seed=args.seed)
    if getattr(args, "exact", False):
        sc = replace(sc, exact=True)
    return sc


def run_simulate(sc: Scenario, out_dir, threads: int = 1) -> list:
    """One checkpoint-series CSV per requested start cell.

    Returns the combined report lines (also the stdout payload); when
    out_dir is given each start cell additionally gets its own file.
    """
    space, v, z0, _ = sc.resolve()
    cells = sorted(sc.start_cells)

    def one(cell):
        j, n = cell
        return series_csv_lines(
            v, j, n, sc.t_min, sc.t_max, z0=z0, exact=sc.exact
        )

    if threads <= 1:
        results = [one(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, cells))
    combined = [results[0][0]] if results else []
    for (j, n), lines in zip(cells, results):
        combined.extend(lines[1:])
        if out_dir is not None:
            path = Path(out_dir) / f"series_c{j}_n{n}.csv"
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return combined


def run_verify(sc: Scenario, suite: str, threads: int = 1):
    """(report lines, exit code); the machine row is the last line."""
    lines, failed = run_suite(sc, suite, threads=threads)
    return lines, (EXIT_OK if failed == 0 else EXIT_VERIFY_FAILED)


def run_partition(sc: Scenario, out_dir) -> list:
    """Construct and serialise the partition plus the chosen direction."""
    part = sc.build_scan_and_partition()
    lines = [f"epsilon,{sc.epsilon}", "captured_measure,inf"]
    lines.extend(partition_to_lines(part))
    if out_dir is not None:
        path = Path(out_dir) / "partition.txt"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return lines


def _cmd_simulate(args) -> int:
    sc = _load(args)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
    lines = run_simulate(sc, args.out, threads=args.threads)
    print("\n".join(lines))
    return EXIT_OK


def _cmd_verify(args) -> int:
    sc = _load(args)
    lines, code = run_verify(sc, args.suite, threads=args.threads)
    print("\n".join(lines))
    return code


def _cmd_partition(args) -> int:
    sc = _load(args)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
    lines = run_partition(sc, args.out)
    print("\n".join(lines))
    return EXIT_OK


def _cmd_norm(args) -> int:
    sc = _load(args)
    space, v, _, _ = sc.resolve()
    l1 = norm_L1(space, v)
    linf = norm_Linf(space, v)
    mixed = norm_L1_plus_Linf(space, v)
    tau = best_split(space, v).tau
    print("l1,linf,l1_plus_linf,split_tau")
    fields = []
    for x in (l1, linf, mixed, tau):
        if isinstance(x, float) and x == float("inf"):
            fields.append("inf")
        else:
            fields.append(format_real(x, sc.exact))
    print(",".join(fields))
    return EXIT_OK


def _cmd_sigma(args) -> int:
    s = sigma(args.n, args.m)
    flips = sign_flip_count(args.n, args.m)
    print("n,m,sigma,flips")
    print(f"{args.n},{args.m},{s:+d},{flips}")
    return EXIT_OK


def _cmd_iterate(args) -> int:
    sc = _load(args)
    _, v, _, _ = sc.resolve()
    val = iterate_value(v, (args.chain, args.n), args.k)
    print("chain,n,k,re,im")
    if sc.exact:
        x = to_exact(val)
        print(
            f"{args.chain},{args.n},{args.k},"
            f"{format_real(x.re, True)},{format_real(x.im, True)}"
        )
    else:
        z = to_cplx(val)
        print(
            f"{args.chain},{args.n},{args.k},"
            f"{format_real(z.real, False)},{format_real(z.imag, False)}"
        )
    return EXIT_OK


def _add_common(p, scenario_required: bool = True):
    p.add_argument("--scenario", required=scenario_required, help="scenario file")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--exact", action="store_true", help="exact rational arithmetic")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--seed", type=int, default=None, help="override scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signedshift",
        description=(
            "Signed-shift averages on chain spaces: simulate checkpoint "
            "series, verify the oscillation and perturbation claims, and "
            "construct partitions of sigma-finite base spaces."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="emit checkpoint-average CSV series")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="run a named verification suite")
    _add_common(p)
    p.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("partition", help="construct and print the partition")
    _add_common(p)
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("norm", help="print the three norms and split threshold")
    _add_common(p)
    p.set_defaults(func=_cmd_norm)

    p = sub.add_parser("sigma", help="cumulative sign over a step window")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=_cmd_sigma)

    p = sub.add_parser("iterate", help="closed-form iterate value at a cell")
    _add_common(p)
    p.add_argument("--chain", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=_cmd_iterate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConstructionError as exc:
        print(f"construction infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
