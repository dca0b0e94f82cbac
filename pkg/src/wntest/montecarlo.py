"""Replication harness for size and power experiments.

An ``ExperimentSpec`` names a data generating process, a sample size, the
methods to apply and the levels to report.  Each replication derives its
own stream from (seed, replication index) through the splittable
``SeedSequence`` hash, so results are bit-identical for any worker count
and replications can run in parallel.  Rejections are aggregated as integer
counts; frequencies are exact count/replications ratios.

Reports carry, per method and level, the rejection frequency with its
binomial standard error, and per method the share of replications with a
selected order above one plus the mean, standard deviation and median of
the selected order (the selection diagnostics of the design being
reproduced).  Desk-scale defaults (5000 replications) are recorded in every
report.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import critical_values as cvs
from .dgp import DgpSpec, generate
from .errors import DataError
from .testing import MethodSpec, SeriesContext, default_max_test_lag, evaluate_method

DEFAULT_REPLICATIONS = 5000


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    dgp: DgpSpec
    n: int
    methods: tuple[MethodSpec, ...]
    alphas: tuple[float, ...] = (0.10, 0.05, 0.01)
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    residual_model: str | None = None

    def working_length(self) -> int:
        # an AR(1) fit consumes one observation
        return self.n - 1 if self.residual_model == "ar1_ols" else self.n


@dataclass
class MethodAggregate:
    label: str
    rejections: dict  # alpha -> integer count
    order_ne1: int | None  # replications with selected order != 1
    order_mean: float | None
    order_sd: float | None
    order_median: float | None
    branch2: int | None  # EL replications on the low-penalty branch

    def rate(self, alpha: float, reps: int) -> float:
        return self.rejections[alpha] / reps


@dataclass
class SimulationReport:
    name: str
    dgp_label: str
    n: int
    replications: int
    seed: int
    alphas: tuple
    residual_model: str | None
    methods: list
    runtime_seconds: float

    def method(self, label: str) -> MethodAggregate:
        for m in self.methods:
            if m.label == label:
                return m
        raise KeyError(label)

    def rejection_rate(self, label: str, alpha: float) -> float:
        return self.method(label).rate(alpha, self.replications)

    def binomial_se(self, label: str, alpha: float) -> float:
        f = self.rejection_rate(label, alpha)
        return math.sqrt(f * (1.0 - f) / self.replications)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dgp": self.dgp_label,
            "n": self.n,
            "replications": self.replications,
            "seed": self.seed,
            "alphas": list(self.alphas),
            "residual_model": self.residual_model,
            "runtime_seconds": self.runtime_seconds,
            "methods": [
                {
                    "label": m.label,
                    "rejections": {repr(a): c for a, c in sorted(m.rejections.items())},
                    "rejection_rates": {
                        repr(a): m.rejections[a] / self.replications
                        for a in sorted(m.rejections)
                    },
                    "order_ne1": m.order_ne1,
                    "order_ne1_rate": (
                        None if m.order_ne1 is None else m.order_ne1 / self.replications
                    ),
                    "order_mean": m.order_mean,
                    "order_sd": m.order_sd,
                    "order_median": m.order_median,
                    "branch2": m.branch2,
                }
                for m in self.methods
            ],
        }


def _rep_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, index))))


def _one_replication(spec: ExperimentSpec, index: int, store: cvs.TableStore) -> dict:
    rng = _rep_rng(spec.seed, index)
    values = generate(spec.dgp, spec.n, rng)
    try:
        ctx = SeriesContext(values, spec.residual_model)
        record = {}
        for mspec in spec.methods:
            outcomes = evaluate_method(ctx, mspec, spec.alphas, store)
            record[mspec.label()] = {
                "rejects": tuple(o.reject for o in outcomes),
                "order": outcomes[0].selected_order,
                "branch2": outcomes[0].diagnostics.get("penalty_branch") == "2",
            }
        return record
    except Exception as exc:
        raise DataError(f"replication {index} failed: {exc}") from exc


def _run_block(args) -> list:
    spec, start, stop, store = args
    return [_one_replication(spec, r, store) for r in range(start, stop)]


def _check_tables(spec: ExperimentSpec, store: cvs.TableStore) -> None:
    m = spec.working_length()
    for ms in spec.methods:
        if ms.name in ("ggl-bp", "ggl-par") and ms.cv_source == "lobato":
            store.get(cvs.LOBATO_SN)
        elif ms.name == "el":
            store.get(cvs.LOBATO_SN)
        elif ms.name == "cvm":
            store.get(cvs.CVM_LIMIT)
        elif ms.name == "max":
            J = ms.J if ms.J is not None else default_max_test_lag(m)
            store.get(cvs.MAX_TEST, n=m, max_lag=J)


def run_experiment(
    spec: ExperimentSpec,
    store: cvs.TableStore | None = None,
    threads: int = 1,
) -> SimulationReport:
    """Run one experiment; aborts on the first failing replication."""
    store = store or cvs.default_store()
    if spec.replications < 1:
        raise DataError("replications must be >= 1")
    _check_tables(spec, store)

    start_time = time.perf_counter()
    reps = spec.replications
    if threads <= 1:
        records = [_one_replication(spec, r, store) for r in range(reps)]
    else:
        block = max(1, reps // (threads * 4))
        blocks = [
            (spec, i, min(i + block, reps), store) for i in range(0, reps, block)
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_run_block, blocks))
        records = [rec for part in parts for rec in part]

    methods = []
    for mspec in spec.methods:
        label = mspec.label()
        rows = [rec[label] for rec in records]
        rejections = {
            a: sum(r["rejects"][i] for r in rows) for i, a in enumerate(spec.alphas)
        }
        orders = [r["order"] for r in rows]
        if orders[0] is None:
            agg = MethodAggregate(label, rejections, None, None, None, None, None)
        else:
            arr = np.array(orders, dtype=float)
            agg = MethodAggregate(
                label,
                rejections,
                order_ne1=int(np.sum(arr != 1)),
                order_mean=float(arr.mean()),
                order_sd=float(arr.std(ddof=1)) if reps > 1 else 0.0,
                order_median=float(np.median(arr)),
                branch2=sum(r["branch2"] for r in rows) if mspec.name == "el" else None,
            )
        methods.append(agg)

    return SimulationReport(
        name=spec.name,
        dgp_label=spec.dgp.label(),
        n=spec.n,
        replications=reps,
        seed=spec.seed,
        alphas=spec.alphas,
        residual_model=spec.residual_model,
        methods=methods,
        runtime_seconds=time.perf_counter() - start_time,
    )


CSV_HEADER = (
    "experiment",
    "dgp",
    "n",
    "replications",
    "seed",
    "method",
    "alpha",
    "rejections",
    "rejection_rate",
    "binomial_se",
    "order_ne1_rate",
    "order_mean",
    "order_sd",
    "order_median",
)


def reports_to_csv(reports) -> str:
    """One CSV row per (experiment, method, alpha); byte-deterministic."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in reports:
        for m in rep.methods:
            for a in rep.alphas:
                rate = m.rejections[a] / rep.replications
                se = math.sqrt(rate * (1.0 - rate) / rep.replications)
                writer.writerow(
                    [
                        rep.name,
                        rep.dgp_label,
                        rep.n,
                        rep.replications,
                        rep.seed,
                        m.label,
                        repr(a),
                        m.rejections[a],
                        repr(rate),
                        repr(se),
                        "" if m.order_ne1 is None else repr(m.order_ne1 / rep.replications),
                        "" if m.order_mean is None else repr(m.order_mean),
                        "" if m.order_sd is None else repr(m.order_sd),
                        "" if m.order_median is None else repr(m.order_median),
                    ]
                )
    return buf.getvalue()


def run_suite(
    specs,
    store: cvs.TableStore | None = None,
    threads: int = 1,
) -> tuple[list, str]:
    """Run several experiments; returns (reports, csv text)."""
    reports = [run_experiment(s, store=store, threads=threads) for s in specs]
    return reports, reports_to_csv(reports)


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


def _method_from_dict(d: dict) -> MethodSpec:
    known = {"name", "standardized", "gamma_coef", "pbar", "J", "cv_source"}
    unknown = set(d) - known
    if unknown:
        raise DataError(f"unknown method keys {sorted(unknown)}")
    return MethodSpec(**d)


def _dgp_from_dict(d: dict) -> DgpSpec:
    known = {"kind", "df", "P", "coef", "scale", "gamma_coef", "burn_in"}
    unknown = set(d) - known
    if unknown:
        raise DataError(f"unknown dgp keys {sorted(unknown)}")
    return DgpSpec(**d)


def experiment_from_dict(d: dict) -> ExperimentSpec:
    known = {
        "name", "dgp", "n", "methods", "alphas", "replications", "seed",
        "residual_model",
    }
    unknown = set(d) - known
    if unknown:
        raise DataError(f"unknown experiment keys {sorted(unknown)}")
    residual = d.get("residual_model") or None
    return ExperimentSpec(
        name=d["name"],
        dgp=_dgp_from_dict(d["dgp"]),
        n=int(d["n"]),
        methods=tuple(_method_from_dict(m) for m in d["methods"]),
        alphas=tuple(float(a) for a in d.get("alphas", (0.10, 0.05, 0.01))),
        replications=int(d.get("replications", DEFAULT_REPLICATIONS)),
        seed=int(d.get("seed", 0)),
        residual_model=residual,
    )


def load_experiment_file(path) -> list:
    """Parse a declarative TOML experiment file into ExperimentSpecs."""
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        payload = tomllib.load(fh)
    entries = payload.get("experiment")
    if entries is None:
        raise DataError("experiment file must contain [[experiment]] tables")
    if isinstance(entries, dict):
        entries = [entries]
    return [experiment_from_dict(e) for e in entries]
