"""Command-line driver.

Exit codes: 0 on success, 1 on usage errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import explore, linalg
from .config import ExplorerConfig
from .criteria import classify, mub_witness
from .mubs import build_complete_mub, build_mubs, build_partial_mub_6, verify_mub
from .states import FamilyParams, family_coefficients, family_rho, multipartite_family

EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _dump(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, default=_json_default) + "\n"
    if out:
        path = Path(out)
        if not path.parent.exists():
            raise UsageError(f"directory {path.parent} does not exist")
        path.write_text(text)
    else:
        sys.stdout.write(text)


def _params(args) -> FamilyParams:
    return FamilyParams(args.d, args.q1, args.q2, args.q3, args.q)


def cmd_mub(args, config: ExplorerConfig):
    if args.d == 6:
        mubs = build_partial_mub_6()
    else:
        try:
            mubs = build_complete_mub(args.d)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    data = mubs.to_json()
    if args.verify:
        report = verify_mub(mubs, args.tol if args.tol is not None else config.mub_tol)
        print(json.dumps(report.to_json()), file=sys.stderr if not args.out else sys.stdout)
        if not report.passed:
            raise ArithmeticError("MUB verification failed")
    if args.out:
        _dump(data, args.out)
    elif not args.verify:
        _dump(data, None)


def cmd_state(args, config):
    p = _params(args)
    coeffs = family_coefficients(p)
    rho = family_rho(p) if args.pairs == 1 else multipartite_family(p, args.pairs)
    _dump({
        "d": args.d,
        "n": args.pairs,
        "params": p.to_json(),
        "coefficients": coeffs.c.tolist(),
        "matrix": [[[z.real, z.imag] for z in row] for row in rho],
    }, args.out)


def cmd_classify(args, config):
    c = classify(_params(args), tol=config.psd_tol, maximize_labels=args.labels == "max")
    _dump(c.to_json(), args.out)


def cmd_witness(args, config):
    mubs = build_mubs(args.d)
    if args.m is not None:
        mubs = mubs.subset(args.m)
    report = mub_witness(family_rho(_params(args)), mubs, conjugate_bob=not args.no_conjugate,
                         maximize_labels=args.labels == "max")
    _dump(report.to_json(), args.out)


def cmd_scan(args, config):
    grid = args.grid or config.scan_grid
    recs = explore.scan_slice(args.d, args.q3, args.q, grid, bounds=args.bounds,
                              labels=args.labels, tol=config.psd_tol)
    fmt = args.format or ("json" if args.out and args.out.endswith(".json") else "csv")
    text = explore.emit(recs, fmt, args.out)
    if not args.out:
        sys.stdout.write(text)


def cmd_optimize(args, config):
    modes = explore.LABEL_MODES if args.labels == "both" else (args.labels,)
    results = [explore.optimize_extreme(args.d, m, config).to_json() for m in modes]
    _dump(results[0] if len(results) == 1 else results, args.out)


def cmd_incomplete(args, config):
    r = explore.incomplete_mub_scan(args.d, args.m, args.grid or config.scan_grid,
                                    tol=config.psd_tol)
    _dump(r.to_json(), args.out)


def cmd_multi(args, config):
    r = explore.multi_compare(args.d, args.pairs, args.samples, args.all_cuts,
                              seed=config.seed, tol=config.psd_tol, site=args.site)
    out = r.to_json()
    if args.d == 2 and args.pairs == 2:
        out["smolin_cut_min_pt_eigenvalues"] = explore.smolin_cut_spectra()
    _dump(out, args.out)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magicsimplex", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with tolerances, grids, search box, seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def family_args(p):
        p.add_argument("--d", type=int, required=True)
        for name in ("q1", "q2", "q3", "q"):
            p.add_argument(f"--{name}", type=float, default=0.0)

    mub = sub.add_parser("mub", help="generate and verify MUB sets")
    mub_sub = mub.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = mub_sub.add_parser("gen")
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--verify", action="store_true")
    gen.add_argument("--tol", type=float)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_mub)

    p = sub.add_parser("state", help="export a family state as JSON")
    family_args(p)
    p.add_argument("--pairs", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("classify", help="positivity, PPT and witness verdicts")
    family_args(p)
    p.add_argument("--labels", choices=explore.LABEL_MODES, default="max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("witness", help="MUB witness report")
    family_args(p)
    p.add_argument("--m", type=int)
    p.add_argument("--labels", choices=explore.LABEL_MODES, default="max")
    p.add_argument("--no-conjugate", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("scan", help="classify a (q1, q2) slice")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q3", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--bounds", type=float, nargs=4, metavar=("Q1MIN", "Q1MAX", "Q2MIN", "Q2MAX"))
    p.add_argument("--labels", choices=explore.LABEL_MODES, default="max")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("optimize", help="extremize the witness over positive PPT states")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--labels", choices=explore.LABEL_MODES + ("both",), default="max")
    p.add_argument("--out")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("incomplete", help="witness excess with fewer than d + 1 bases")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--grid", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_incomplete)

    p = sub.add_parser("multi", help="compare rho[d] with its n-pair lift")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pairs", type=int, default=2)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--site", type=int, default=1)
    p.add_argument("--all-cuts", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_multi)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = ExplorerConfig.load(args.config) if args.config else ExplorerConfig()
        args.func(args, config)
    except (linalg.EigenSolverError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
