"""Complete test decisions: the adaptive test and four benchmarks.

Every public test function takes a series (raw data when a residual model
is named, in which case residuals are formed internally), picks its order,
computes the statistic and the matching critical value, and returns a
``TestOutcome``.  All tests are right-tailed: reject iff statistic >=
critical value, so decisions are exactly invariant under rescaling of the
data (both sides scale identically or are scale-free).

Methods
-------
ggl-bp / ggl-par
    Kernel-weighted portmanteau statistic at the penalized data-driven
    order, raw or standardized, against self-normalized (HAC) critical
    values: the partial-sum functional for observed series, its recursive
    counterpart for estimated residuals.  An optional chi-squared(1)
    critical value is exposed for the forced p=1 regime.
el
    Box-Pierce statistic at the two-branch penalized order, same
    self-normalized critical values.
cvm
    Weighted quadratic statistic against the tabulated limit law.
imse
    Standardized statistic at the plug-in order, standard normal critical
    values (deliberately unadjusted for estimated residuals).
max
    Normalized maximum standardized autocovariance against finite-sample
    tables simulated under the iid normal null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import covariance as cov
from . import critical_values as cvs
from . import residuals as res
from .errors import DataError, DegeneracyError
from .kernels import (
    MODIFIED_PARZEN,
    UNIFORM,
    KernelSpec,
    evaluate,
    modified_parzen_kernel,
    parzen_base,
    uniform_kernel,
)
from .selection import (
    PenaltyConfig,
    bp_star_cumulative,
    el_select,
    imse_bandwidth,
    select_order,
    select_order_star,
)
from .statistics import s_star_stat, s_stat

METHODS = ("ggl-bp", "ggl-par", "el", "imse", "cvm", "max")

_MIN_LENGTH = 8


@dataclass
class TestOutcome:
    __test__ = False  # keep pytest from collecting the dataclass

    method: str
    statistic: float
    selected_order: int | None
    critical_value: float
    alpha: float
    reject: bool
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "selected_order": self.selected_order,
            "critical_value": self.critical_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "TestOutcome":
        return cls(**payload)


class SeriesContext:
    """Shared per-series computations reused across methods and levels."""

    def __init__(self, series, residual_model: str | None = None):
        raw = np.asarray(series, dtype=float)
        if raw.size < _MIN_LENGTH:
            raise DataError(f"series must have length >= {_MIN_LENGTH}")
        self.raw = raw
        self.residual_model = residual_model
        if residual_model in (None, res.IDENTITY):
            working = raw
        else:
            working = res.residuals_for(residual_model, raw)
        self.series = working
        self.table = cov.autocov_table(working)
        self._gamma1: float | None = None

    @property
    def n(self) -> int:
        return self.table.n

    def gamma1(self) -> float:
        """Long-run lag-one scale: partial-sum form for observed series,
        recursive form when the series are estimated residuals."""
        if self._gamma1 is None:
            if self.residual_model is None:
                g = cov.lobato_gamma1(self.series)
            else:
                g = cov.kuanlee_gamma1(self.raw, self.residual_model)
            self._gamma1 = g
        g = self._gamma1
        if g <= 0.0:
            raise DegeneracyError("degenerate long-run scale gamma1")
        return g

    def tau1_sq(self) -> float:
        if self.table.tausq_degenerate[0]:
            raise DegeneracyError("standardization degenerate at lag 1")
        return float(self.table.tausq[0])

    def default_max_lag(self) -> int:
        return min(self.n - 2, self.table.maxlag)


def _ggl_critical_value(
    ctx: SeriesContext,
    kernel: KernelSpec,
    alpha: float,
    standardized: bool,
    cv_source: str,
    store: cvs.TableStore,
) -> float:
    k1sq = evaluate(kernel, 1.0) ** 2
    if cv_source == "lobato":
        table = store.get(cvs.LOBATO_SN)
        tau = ctx.tau1_sq() if standardized else None
        return cvs.lobato_cv(table, ctx.gamma1(), kernel, alpha, tau1sq=tau)
    if cv_source == "chi2":
        q = cvs.quantile("chi2_1", alpha)
        if standardized:
            return k1sq * q
        return k1sq * ctx.tau1_sq() * q
    raise DataError(f"unknown critical-value source {cv_source!r}")


def _method_name(kernel: KernelSpec) -> str:
    if kernel.kind == UNIFORM:
        return "ggl-bp"
    if kernel.kind == MODIFIED_PARZEN:
        return "ggl-par"
    return "ggl-custom"


def ggl_test(
    series,
    kernel: KernelSpec | None = None,
    cfg: PenaltyConfig | None = None,
    alpha: float = 0.05,
    standardized: bool = False,
    residual_model: str | None = None,
    store: cvs.TableStore | None = None,
    cv_source: str = "lobato",
) -> TestOutcome:
    """Adaptive portmanteau test at the penalized data-driven order."""
    ctx = series if isinstance(series, SeriesContext) else SeriesContext(series, residual_model)
    kernel = kernel or uniform_kernel()
    cfg = cfg or PenaltyConfig()
    store = store or cvs.default_store()

    if standardized:
        sel = select_order_star(ctx.table, kernel, cfg)
        stat = s_star_stat(ctx.table, kernel, sel.p_hat)
    else:
        sel = select_order(ctx.table, kernel, cfg)
        stat = s_stat(ctx.table, kernel, sel.p_hat)
    cv = _ggl_critical_value(ctx, kernel, alpha, standardized, cv_source, store)
    return TestOutcome(
        method=_method_name(kernel),
        statistic=stat,
        selected_order=sel.p_hat,
        critical_value=cv,
        alpha=alpha,
        reject=bool(stat >= cv),
        diagnostics={
            "standardized": standardized,
            "cv_source": cv_source,
            "gamma1": ctx._gamma1,
            "gamma_n": cfg.gamma_n(ctx.n),
            "pbar": cfg.effective_pbar(ctx.n, starred=standardized),
            "kernel": kernel.kind,
            "residual_model": ctx.residual_model,
        },
    )


def el_test(
    series,
    alpha: float = 0.05,
    J: int | None = None,
    residual_model: str | None = None,
    store: cvs.TableStore | None = None,
) -> TestOutcome:
    """Two-branch penalized Box-Pierce test with self-normalized CVs."""
    ctx = series if isinstance(series, SeriesContext) else SeriesContext(series, residual_model)
    store = store or cvs.default_store()
    J = ctx.default_max_lag() if J is None else J
    if not 1 <= J <= min(ctx.n - 2, ctx.table.maxlag):
        raise DataError("J outside [1, n-2]")

    sel = el_select(ctx.table, J)
    stat = float(bp_star_cumulative(ctx.table, sel.p_hat)[-1])
    cv = cvs.lobato_cv(
        store.get(cvs.LOBATO_SN), ctx.gamma1(), uniform_kernel(), alpha, tau1sq=ctx.tau1_sq()
    )
    return TestOutcome(
        method="el",
        statistic=stat,
        selected_order=sel.p_hat,
        critical_value=cv,
        alpha=alpha,
        reject=bool(stat >= cv),
        diagnostics={
            "penalty_branch": sel.penalty_branch,
            "J": J,
            "gamma1": ctx._gamma1,
            "residual_model": ctx.residual_model,
        },
    )


def cvm_test(
    series,
    alpha: float = 0.05,
    J: int | None = None,
    store: cvs.TableStore | None = None,
) -> TestOutcome:
    """Weighted quadratic test against the tabulated limit law."""
    ctx = series if isinstance(series, SeriesContext) else SeriesContext(series)
    store = store or cvs.default_store()
    n = ctx.n
    J = ctx.default_max_lag() if J is None else J
    if not 1 <= J <= min(n - 2, ctx.table.maxlag):
        raise DataError("J outside [1, n-2]")
    bad = ctx.table.tausq_degenerate[:J]
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0]) + 1
        raise DegeneracyError(f"standardization degenerate at lag {j}")
    js = np.arange(1, J + 1)
    terms = ctx.table.rhat[1 : J + 1] ** 2 / (js**2 * ctx.table.tausq[:J])
    stat = n / math.pi**2 * math.fsum(terms)
    cv = store.get(cvs.CVM_LIMIT).quantile(alpha)
    return TestOutcome(
        method="cvm",
        statistic=stat,
        selected_order=None,
        critical_value=cv,
        alpha=alpha,
        reject=bool(stat >= cv),
        diagnostics={"J": J},
    )


def imse_test(series, alpha: float = 0.05) -> TestOutcome:
    """Standardized statistic at the plug-in order, normal critical values."""
    ctx = series if isinstance(series, SeriesContext) else SeriesContext(series)
    table = ctx.table
    n = ctx.n
    bw = imse_bandwidth(table)
    jmax = min(bw.p_imse, n - 2)
    num = 0.0
    den = 0.0
    for j in range(1, jmax + 1):
        if table.tausq_degenerate[j - 1]:
            raise DegeneracyError(f"standardization degenerate at lag {j}")
        w = parzen_base(j / bw.p_real)
        taper = 1.0 - j / n
        num += w * w * (n * table.rhat[j] ** 2 / table.tausq[j - 1] - taper)
        den += w**4 * taper * taper
    if den <= 0.0:
        raise DegeneracyError("degenerate IMSE scaling")
    stat = num / math.sqrt(2.0 * den)
    cv = cvs.quantile("std_normal", alpha)
    return TestOutcome(
        method="imse",
        statistic=stat,
        selected_order=bw.p_imse,
        critical_value=cv,
        alpha=alpha,
        reject=bool(stat >= cv),
        diagnostics={
            "p_tilde": bw.p_tilde,
            "c_tilde": bw.c_tilde,
            "p_real": bw.p_real,
        },
    )


def default_max_test_lag(n: int) -> int:
    """floor(sqrt(n)), clamped to the [8, n-2] range the statistic needs."""
    return max(8, min(int(math.isqrt(n)), n - 2))


def max_test(
    series,
    alpha: float = 0.05,
    J: int | None = None,
    store: cvs.TableStore | None = None,
) -> TestOutcome:
    """Maximum standardized autocovariance against finite-sample tables."""
    ctx = series if isinstance(series, SeriesContext) else SeriesContext(series)
    store = store or cvs.default_store()
    n = ctx.n
    J = default_max_test_lag(n) if J is None else J
    if J > min(n - 2, ctx.table.maxlag):
        raise DataError("J exceeds n-2")
    bn = cvs.max_test_bn(J)
    bad = ctx.table.tausq_degenerate[:J]
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0]) + 1
        raise DegeneracyError(f"standardization degenerate at lag {j}")
    ratios = (
        math.sqrt(n)
        * np.abs(ctx.table.rhat[1 : J + 1])
        / np.sqrt(ctx.table.tausq[:J])
    )
    stat = bn * (float(ratios.max()) - bn)
    cv = store.get(cvs.MAX_TEST, n=n, max_lag=J).quantile(alpha)
    return TestOutcome(
        method="max",
        statistic=stat,
        selected_order=None,
        critical_value=cv,
        alpha=alpha,
        reject=bool(stat >= cv),
        diagnostics={"J": J, "b_n": bn},
    )


@dataclass(frozen=True)
class MethodSpec:
    """One test configuration inside an experiment."""

    name: str
    standardized: bool = True
    gamma_coef: float = 3.4
    pbar: int | None = None
    J: int | None = None
    cv_source: str = "lobato"

    def label(self) -> str:
        parts = [self.name]
        if self.name in ("ggl-bp", "ggl-par"):
            parts.append("star" if self.standardized else "raw")
            if self.cv_source != "lobato":
                parts.append(self.cv_source)
        return ":".join(parts)


def evaluate_method(
    ctx: SeriesContext,
    spec: MethodSpec,
    alphas,
    store: cvs.TableStore,
) -> list[TestOutcome]:
    """Apply one configured method at several levels, computing the
    statistic and order once."""
    if spec.name in ("ggl-bp", "ggl-par"):
        kernel = uniform_kernel() if spec.name == "ggl-bp" else modified_parzen_kernel()
        cfg = PenaltyConfig(gamma_coef=spec.gamma_coef, pbar=spec.pbar)
        first = ggl_test(
            ctx,
            kernel=kernel,
            cfg=cfg,
            alpha=alphas[0],
            standardized=spec.standardized,
            store=store,
            cv_source=spec.cv_source,
        )
        outs = [first]
        for a in alphas[1:]:
            cv = _ggl_critical_value(ctx, kernel, a, spec.standardized, spec.cv_source, store)
            outs.append(
                TestOutcome(
                    first.method,
                    first.statistic,
                    first.selected_order,
                    cv,
                    a,
                    bool(first.statistic >= cv),
                    first.diagnostics,
                )
            )
        return outs
    if spec.name == "el":
        first = el_test(ctx, alpha=alphas[0], J=spec.J, store=store)
        lob = store.get(cvs.LOBATO_SN)
        outs = [first]
        for a in alphas[1:]:
            cv = cvs.lobato_cv(lob, ctx.gamma1(), uniform_kernel(), a, tau1sq=ctx.tau1_sq())
            outs.append(
                TestOutcome(
                    "el", first.statistic, first.selected_order, cv, a,
                    bool(first.statistic >= cv), first.diagnostics,
                )
            )
        return outs
    if spec.name == "cvm":
        first = cvm_test(ctx, alpha=alphas[0], J=spec.J, store=store)
        table = store.get(cvs.CVM_LIMIT)
        outs = [first]
        for a in alphas[1:]:
            cv = table.quantile(a)
            outs.append(
                TestOutcome("cvm", first.statistic, None, cv, a,
                            bool(first.statistic >= cv), first.diagnostics)
            )
        return outs
    if spec.name == "imse":
        first = imse_test(ctx, alpha=alphas[0])
        outs = [first]
        for a in alphas[1:]:
            cv = cvs.quantile("std_normal", a)
            outs.append(
                TestOutcome("imse", first.statistic, first.selected_order, cv, a,
                            bool(first.statistic >= cv), first.diagnostics)
            )
        return outs
    if spec.name == "max":
        first = max_test(ctx, alpha=alphas[0], J=spec.J, store=store)
        table = store.get(cvs.MAX_TEST, n=ctx.n, max_lag=first.diagnostics["J"])
        outs = [first]
        for a in alphas[1:]:
            cv = table.quantile(a)
            outs.append(
                TestOutcome("max", first.statistic, None, cv, a,
                            bool(first.statistic >= cv), first.diagnostics)
            )
        return outs
    raise DataError(f"unknown method {spec.name!r}")
