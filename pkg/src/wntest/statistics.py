"""Portmanteau statistics and their centering/scaling sequences.

For a kernel K with unit support the statistic of order p is

    S_p      = n sum_{j=1}^{n-1} K^2(j/p) R_j^2
    S*_p     = n sum_{j=1}^{n-1} K^2(j/p) (R_j / tau_j)^2

and the centerings

    E(p)       = sum_j (1 - j/n) K^2(j/p)
    E_delta(p) = sum_j (1 - j/n) (K^2(j/p) - K^2(j))
    V_delta(p) = (2 sum_j (1 - j/n)^2 (K^2(j/p) - K^2(j))^2)^(1/2).

The sums formally run to j = n-1 but the unit support truncates them at
j <= p; the implementation truncates and the tests assert equality with the
full sum.  Scalar entry points accumulate with ``math.fsum`` (compensated);
the vectorized all-p helpers used by the order selectors are asserted
against the scalar path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import AutocovTable
from .errors import DataError, DegeneracyError
from .kernels import UNIFORM, KernelSpec, evaluate


@dataclass
class StatTrace:
    """Per-order diagnostic row: statistics and centering terms."""

    p: int
    s: float
    s_star: float | None
    e: float
    e_delta: float
    v_delta: float


def _check_order(p: int, n: int) -> None:
    if not 1 <= p <= n - 1:
        raise DataError(f"order {p} outside [1, n-1]")


def _sq_weights(kernel: KernelSpec, p: int, jmax: int) -> np.ndarray:
    js = np.arange(1, jmax + 1)
    w = evaluate(kernel, js / p)
    return w * w


def s_stat(table: AutocovTable, kernel: KernelSpec, p: int) -> float:
    """Kernel-weighted portmanteau statistic S_p (Box-Pierce for uniform)."""
    _check_order(p, table.n)
    jmax = min(p, table.maxlag)
    w = _sq_weights(kernel, p, jmax)
    terms = w * table.rhat[1 : jmax + 1] ** 2
    return table.n * math.fsum(terms)


def s_star_stat(table: AutocovTable, kernel: KernelSpec, p: int) -> float:
    """Standardized statistic S*_p; errors on a degenerate tau_j^2."""
    _check_order(p, table.n)
    jmax = min(p, table.maxlag)
    w = _sq_weights(kernel, p, jmax)
    bad = (w > 0.0) & table.tausq_degenerate[:jmax]
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0]) + 1
        raise DegeneracyError(f"standardization degenerate at lag {j}")
    ratios = np.zeros(jmax)
    nz = w > 0.0
    ratios[nz] = table.rhat[1 : jmax + 1][nz] ** 2 / table.tausq[:jmax][nz]
    return table.n * math.fsum(w * ratios)


def centering(kernel: KernelSpec, n: int, p: int) -> tuple[float, float, float]:
    """Return (E(p), E_delta(p), V_delta(p)) by compensated summation."""
    _check_order(p, n)
    js = np.arange(1, n)
    w_p = evaluate(kernel, js / p) ** 2
    w_1 = evaluate(kernel, js.astype(float)) ** 2
    taper = 1.0 - js / n
    e = math.fsum(taper * w_p)
    diff = w_p - w_1
    e_delta = math.fsum(taper * diff)
    v_delta = math.sqrt(2.0 * math.fsum((taper * diff) ** 2))
    return e, e_delta, v_delta


def compute_trace(table: AutocovTable, kernel: KernelSpec, p: int) -> StatTrace:
    """Assemble the diagnostic row for one order.

    ``s_star`` is None when some needed standardization is degenerate.
    """
    e, e_delta, v_delta = centering(kernel, table.n, p)
    try:
        star = s_star_stat(table, kernel, p)
    except DegeneracyError:
        star = None
    return StatTrace(
        p=p,
        s=s_stat(table, kernel, p),
        s_star=star,
        e=e,
        e_delta=e_delta,
        v_delta=v_delta,
    )


class KernelStatCache:
    """Precomputed weights and centerings for a fixed (kernel, n, pbar).

    Shared read-only by the order selectors and the simulation harness; the
    uniform kernel short-circuits to cumulative sums, other kernels hold the
    (pbar, n-1) matrix of squared weights.
    """

    def __init__(self, kernel: KernelSpec, n: int, pbar: int):
        if not 1 <= pbar <= n - 1:
            raise DataError("pbar outside [1, n-1]")
        self.kernel = kernel
        self.n = n
        self.pbar = pbar
        js = np.arange(1, n)
        taper = 1.0 - js / n
        self.ksq_at_j = evaluate(kernel, js.astype(float)) ** 2

        if kernel.kind == UNIFORM:
            # K^2(j/p) = I(j <= p) and K^2(j) = I(j == 1): cumulative sums
            # replace the weight matrix entirely.
            self.weights = None
            cum_taper = np.cumsum(taper)
            cum_taper_sq = np.cumsum(taper**2)
            ps = np.arange(1, pbar + 1)
            self.E = cum_taper[ps - 1]
            self.E_delta = self.E - taper[0]
            self.E_delta[0] = 0.0
            v2 = 2.0 * (cum_taper_sq[ps - 1] - taper[0] ** 2)
            v2[0] = 0.0
            self.V_delta = np.sqrt(np.maximum(v2, 0.0))
        else:
            W = np.zeros((pbar, n - 1))
            for p in range(1, pbar + 1):
                jmax = min(p, n - 1)
                W[p - 1, :jmax] = evaluate(kernel, js[:jmax] / p) ** 2
            self.weights = W
            taper_row = taper[np.newaxis, :]
            diff = W - self.ksq_at_j[np.newaxis, :]
            self.E = (taper_row * W).sum(axis=1)
            self.E_delta = (taper_row * diff).sum(axis=1)
            self.V_delta = np.sqrt(2.0 * ((taper_row * diff) ** 2).sum(axis=1))

    def stats_all(self, x: np.ndarray) -> np.ndarray:
        """sum_j K^2(j/p) x_j for p = 1..pbar; x is indexed by lag 1..len."""
        full = np.zeros(self.n - 1)
        full[: x.size] = x
        if self.weights is None:
            return np.cumsum(full)[: self.pbar]
        return self.weights @ full

    def max_weight_per_lag(self) -> np.ndarray:
        """max over p of K^2(j/p): identifies lags that ever get weight."""
        if self.weights is None:
            out = np.zeros(self.n - 1)
            out[: self.pbar] = 1.0
            return out
        return self.weights.max(axis=0)


_cache: dict[tuple[KernelSpec, int, int], KernelStatCache] = {}


def stat_cache(kernel: KernelSpec, n: int, pbar: int) -> KernelStatCache:
    key = (kernel, n, pbar)
    entry = _cache.get(key)
    if entry is None:
        entry = KernelStatCache(kernel, n, pbar)
        # keep the cache small; experiments use one or two configurations
        if len(_cache) > 8:
            _cache.clear()
        _cache[key] = entry
    return entry
