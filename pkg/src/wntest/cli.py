"""Command-line front end.

Subcommands::

    test         apply one test to a series file, emit a JSON outcome
    tabulate-cv  (re)generate a critical-value table as JSON
    simulate     run a declarative experiment file, write CSV + JSON
    calibrate    print a calibrated lacunary alternative coefficient

Exit codes: 0 success, 1 usage error, 2 data or degeneracy error.  Input
series files are single-column CSV with an optional header.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys

import numpy as np

from . import critical_values as cvs
from . import montecarlo as mc
from .dgp import calibrate_lacunary
from .errors import DataError, KernelError
from .kernels import kernel_by_name
from .selection import PenaltyConfig
from .testing import (
    MethodSpec,
    SeriesContext,
    cvm_test,
    el_test,
    ggl_test,
    imse_test,
    max_test,
)

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit with code 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def read_series_csv(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            token = line.strip().split(",")[0].strip()
            if not token:
                continue
            try:
                values.append(float(token))
            except ValueError:
                if values:
                    raise DataError(f"non-numeric value {token!r} in {path}")
                continue  # header line
    if not values:
        raise DataError(f"no numeric data in {path}")
    arr = np.asarray(values)
    if not np.all(np.isfinite(arr)):
        raise DataError(f"non-finite values in {path}")
    return arr


def _build_store(table_dir) -> cvs.TableStore:
    store = cvs.TableStore(cvs.default_store().tables())
    if table_dir:
        store.load_dir(table_dir)
    return store


def _cmd_test(args) -> int:
    series = read_series_csv(args.input)
    store = _build_store(args.cv_table)
    residual_model = {"none": None, "ar1": "ar1_ols", "identity": "identity"}[
        args.residual_model
    ]
    ctx = SeriesContext(series, residual_model)
    cfg = PenaltyConfig(gamma_coef=args.gamma, pbar=args.pbar)

    if args.method in ("ggl-bp", "ggl-par"):
        kernel = kernel_by_name(
            args.kernel or ("uniform" if args.method == "ggl-bp" else "parzen")
        )
        outcome = ggl_test(
            ctx,
            kernel=kernel,
            cfg=cfg,
            alpha=args.alpha,
            standardized=args.standardized,
            store=store,
            cv_source=args.cv,
        )
    elif args.method == "el":
        outcome = el_test(ctx, alpha=args.alpha, J=args.el_max_order, store=store)
    elif args.method == "cvm":
        outcome = cvm_test(ctx, alpha=args.alpha, J=args.max_lag, store=store)
    elif args.method == "imse":
        outcome = imse_test(ctx, alpha=args.alpha)
    else:  # max
        outcome = max_test(ctx, alpha=args.alpha, J=args.max_lag, store=store)

    text = json.dumps(outcome.to_dict(), indent=2, sort_keys=True)
    print(text)
    if args.out:
        pathlib.Path(args.out).write_text(text + "\n")
    return 0


def _cmd_tabulate(args) -> int:
    alphas = tuple(args.alphas)
    if args.dist == "lobato":
        table = cvs.tabulate_lobato(
            alphas, reps=args.reps, grid=args.grid, seed=args.seed, workers=args.threads
        )
    elif args.dist == "cvm":
        table = cvs.tabulate_cvm(
            alphas,
            truncation=args.truncation,
            reps=args.reps,
            seed=args.seed,
            workers=args.threads,
        )
    else:  # maxtest
        if args.n is None or args.max_lag is None:
            raise DataError("maxtest tabulation needs --n and --max-lag")
        table = cvs.tabulate_maxtest(
            args.n,
            args.max_lag,
            alphas,
            reps=args.reps,
            seed=args.seed,
            workers=args.threads,
        )
    text = table.to_json()
    if args.out:
        pathlib.Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def _cmd_simulate(args) -> int:
    specs = mc.load_experiment_file(args.spec)
    store = _build_store(args.cv_table)
    reports, csv_text = mc.run_suite(specs, store=store, threads=args.threads)
    outdir = pathlib.Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = pathlib.Path(args.spec).stem
    (outdir / f"{stem}.csv").write_text(csv_text)
    (outdir / f"{stem}.json").write_text(mc.reports_to_json(reports))
    for rep in reports:
        for m in rep.methods:
            rates = "  ".join(
                f"{a:g}:{m.rejections[a] / rep.replications:.4f}" for a in rep.alphas
            )
            print(f"{rep.name:30s} {m.label:18s} {rates}")
    print(f"wrote {outdir / (stem + '.csv')} and {outdir / (stem + '.json')}")
    return 0


def _cmd_calibrate(args) -> int:
    coef = calibrate_lacunary(args.family, args.P, args.n)
    print(f"{coef:.6f}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="wntest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run one test on a series file")
    p_test.add_argument("--method", required=True,
                        choices=["ggl-bp", "ggl-par", "el", "imse", "cvm", "max"])
    p_test.add_argument("--input", required=True, help="single-column CSV series")
    p_test.add_argument("--alpha", type=float, default=0.05)
    p_test.add_argument("--standardized", action="store_true",
                        help="use the standardized statistic and starred critical values")
    p_test.add_argument("--kernel", default=None,
                        help="uniform | parzen | path to a two-column CSV table")
    p_test.add_argument("--gamma", type=float, default=3.4,
                        help="penalty proportionality coefficient")
    p_test.add_argument("--pbar", type=int, default=None, help="maximum order")
    p_test.add_argument("--el-max-order", type=int, default=None)
    p_test.add_argument("--max-lag", type=int, default=None,
                        help="J for the cvm/max methods")
    p_test.add_argument("--cv", default="lobato", choices=["lobato", "chi2"])
    p_test.add_argument("--cv-table", default=None,
                        help="directory of extra critical-value tables")
    p_test.add_argument("--residual-model", default="none",
                        choices=["none", "ar1", "identity"])
    p_test.add_argument("--out", default=None, help="write the JSON outcome here")
    p_test.set_defaults(func=_cmd_test)

    p_tab = sub.add_parser("tabulate-cv", help="simulate a critical-value table")
    p_tab.add_argument("--dist", required=True, choices=["lobato", "cvm", "maxtest"])
    p_tab.add_argument("--alphas", type=float, nargs="+", default=[0.10, 0.05, 0.01])
    p_tab.add_argument("--reps", type=int, default=1_000_000)
    p_tab.add_argument("--grid", type=int, default=10_000,
                       help="random-walk grid (lobato)")
    p_tab.add_argument("--truncation", type=int, default=10_000,
                       help="series truncation (cvm)")
    p_tab.add_argument("--n", type=int, default=None, help="sample size (maxtest)")
    p_tab.add_argument("--max-lag", type=int, default=None, help="J (maxtest)")
    p_tab.add_argument("--seed", type=int, default=0)
    p_tab.add_argument("--threads", type=int, default=1)
    p_tab.add_argument("--out", default=None)
    p_tab.set_defaults(func=_cmd_tabulate)

    p_sim = sub.add_parser("simulate", help="run a declarative experiment file")
    p_sim.add_argument("--spec", required=True, help="TOML experiment file")
    p_sim.add_argument("--out", required=True, help="output directory")
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--cv-table", default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cal = sub.add_parser("calibrate", help="calibrate a lacunary alternative")
    p_cal.add_argument("--family", required=True, choices=["ma", "ar"])
    p_cal.add_argument("--P", required=True, type=int)
    p_cal.add_argument("--n", required=True, type=int)
    p_cal.set_defaults(func=_cmd_calibrate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, KernelError) as exc:
        print(f"wntest: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"wntest: {exc}", file=sys.stderr)
        return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
