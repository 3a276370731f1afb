"""Command-line experiment runner.

Subcommands: ``solve`` (one configuration), ``table`` (a benchmark parameter
sweep), ``beaked`` (the non-circular domain suite), ``oracles`` (analytic
self-checks; nonzero exit on failure).  Flags can be preloaded from a JSON
config file mirroring their names.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (
    CASES,
    ExperimentConfig,
    run_beaked_suite,
    run_case,
    run_oracles,
    run_table,
)

_MODE_ALIASES = {"c1": "limiting_c1", "strip": "strip_c2", "ystrip": "ystrip_c2"}


def _add_solve_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", choices=sorted(CASES), help="conductivity case")
    p.add_argument("--alpha", type=float, default=1.0, help="case parameter")
    p.add_argument("--bc-alpha", type=float, default=None,
                   help="boundary-condition parameter when it differs from --alpha")
    p.add_argument("--domain", default=None,
                   help="unit_disk, beaked, or a JSON knot-table path")
    p.add_argument("--sigma-csv", default=None,
                   help="sampled conductivity CSV (x, y, sigma) overriding the case field")
    p.add_argument("-N", type=int, default=30, help="maximum formal-power degree")
    p.add_argument("-P", type=int, default=1000, help="points per radius")
    p.add_argument("-Q", type=int, default=1000, help="number of radii")
    p.add_argument("--mode", default="c1", choices=sorted(_MODE_ALIASES),
                   help="generating sequence: c1 (limiting), strip, ystrip")
    p.add_argument("--delta", type=float, default=1.0, help="quadrature scale knob")
    p.add_argument("--rule", default="trapezoid", choices=["trapezoid", "corrected"])
    p.add_argument("--K", type=int, default=1000, help="strips (strip mode)")
    p.add_argument("--J", type=int, default=1000, help="midline samples (strip mode)")
    p.add_argument("--A", type=float, default=60.0, help="strip offset (strip mode)")
    p.add_argument("--pin-corners", action="store_true",
                   help="pin collocation angles at the domain corners")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    p.add_argument("--config", default=None, help="JSON file preloading these flags")


def _merge_config(args: argparse.Namespace, argv) -> argparse.Namespace:
    if getattr(args, "config", None):
        with open(args.config) as fh:
            loaded = json.load(fh)
        for key, value in loaded.items():
            key = key.replace("-", "_")
            if not hasattr(args, key):
                raise SystemExit(f"unknown config key {key!r}")
            # explicit command-line flags win over the file
            if f"--{key.replace('_', '-')}" not in argv and f"-{key}" not in argv:
                setattr(args, key, value)
    return args


def _solve(args: argparse.Namespace) -> int:
    args = _merge_config(args, args._argv)
    if not args.case:
        raise SystemExit("--case is required (directly or via --config)")
    from .geometry import make_domain

    pins = ()
    if args.pin_corners:
        domain_name = args.domain or CASES[args.case].domain
        pins = make_domain(domain_name).corner_angles
    config = ExperimentConfig(
        case=args.case, alpha=args.alpha, bc_alpha=args.bc_alpha,
        domain=args.domain, N=args.N, P=args.P, Q=args.Q,
        mode=_MODE_ALIASES[args.mode], delta=args.delta, rule=args.rule,
        K=args.K, J=args.J, A=args.A, collocation_pins=tuple(pins),
        sigma_csv=args.sigma_csv, out_dir=args.out, plot=not args.no_plot)
    report, row = run_case(config)
    print(f"{row.case}: N={row.N} Q={row.Q} P={row.P}  "
          f"E = {row.total_error:.6e}  ({row.runtime:.1f}s)")
    if args.out:
        print(f"outputs written to {Path(args.out).resolve()}")
    return 0


def _table(args: argparse.Namespace) -> int:
    rows = None
    if args.rows:
        rows = [tuple(int(v) for v in spec.split(",")) for spec in args.rows]
    out = run_table(args.id, rows=rows, out_dir=args.out,
                    progress=lambda r: print(
                        f"  N={r.N} radii={r.Q} points={r.P}  "
                        f"E = {r.total_error:.6e}" + (f"  [{r.error}]" if r.error else "")))
    failures = [r for r in out if r.error]
    if args.out:
        print(f"table written to {Path(args.out).resolve()}")
    return 1 if failures else 0


def _beaked(args: argparse.Namespace) -> int:
    run_beaked_suite(out_dir=args.out, progress=lambda r: print(
        f"  {r.case} N={r.N}: E = {r.total_error:.6e}"))
    if args.out:
        print(f"suite written to {Path(args.out).resolve()}")
    return 0


def _oracles(args: argparse.Namespace) -> int:
    results = run_oracles(progress=lambda r: print(
        f"  [{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}"))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} oracles passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="vekua",
        description="Forward Dirichlet solver for the 2-D electrical impedance "
                    "equation via Bers formal powers")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run one configuration")
    _add_solve_args(p_solve)
    p_solve.set_defaults(func=_solve)

    p_table = sub.add_parser("table", help="run a benchmark parameter sweep")
    p_table.add_argument("--id", type=int, required=True, choices=range(1, 12),
                         metavar="1..11")
    p_table.add_argument("--rows", nargs="*", metavar="N,Q,P",
                         help="restrict to specific rows, e.g. 30,1000,1000")
    p_table.add_argument("--out", default=None)
    p_table.set_defaults(func=_table)

    p_beaked = sub.add_parser("beaked", help="run the non-circular domain suite")
    p_beaked.add_argument("--out", default=None)
    p_beaked.set_defaults(func=_beaked)

    p_oracles = sub.add_parser("oracles", help="run the analytic self-checks")
    p_oracles.set_defaults(func=_oracles)

    args = parser.parse_args(argv)
    args._argv = list(sys.argv[1:] if argv is None else argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
