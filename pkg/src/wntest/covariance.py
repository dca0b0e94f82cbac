"""Sample autocovariances, lag-wise standardizations and HAC scalings.

All estimators act on a zero-mean series (no implicit demeaning): the sample
autocovariance R_j divides by n at every lag, the standardization

    tau_j^2 = (1/(n-j)) sum_t u_t^2 u_{t+j}^2 - ((n/(n-j)) R_j)^2

estimates Var(u_t u_{t-j}), and the two long-run-variance functionals scale
the lag-one statistic:

* ``lobato_gamma1``  -- partial-sum self-normalizer for directly observed
  series,
* ``kuanlee_gamma1`` -- its recursive-estimation counterpart for residuals
  of a fitted model, with the lag-one products re-evaluated under the
  parameter fitted on the first t observations.

Everything is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .errors import DataError, DegeneracyError
from . import residuals as res

#: Lags with fewer than this many cross products have a structurally
#: degenerate tau^2 (a variance needs at least two products).
_MIN_PRODUCTS = 2


def _as_series(values) -> np.ndarray:
    u = np.asarray(values, dtype=float)
    if u.ndim != 1:
        raise DataError("series must be one-dimensional")
    if u.size < 4:
        raise DataError("series must have length >= 4")
    if not np.all(np.isfinite(u)):
        raise DataError("series contains non-finite values")
    return u


def _crossprod_sums(u: np.ndarray, maxlag: int) -> np.ndarray:
    """sum_t u_t u_{t+j} for j = 0..maxlag via FFT (linear correlation)."""
    n = u.size
    m = sfft.next_fast_len(2 * n - 1)
    fu = sfft.rfft(u, m)
    acf = sfft.irfft(fu * np.conj(fu), m)[: maxlag + 1]
    return acf


def autocov(values, maxlag: int) -> np.ndarray:
    """Sample autocovariances R_0..R_maxlag with divisor n at every lag."""
    u = _as_series(values)
    n = u.size
    if not 0 <= maxlag <= n - 1:
        raise DataError("lag exceeds sample")
    return _crossprod_sums(u, maxlag) / n


def tau_sq(values, j: int) -> tuple[float, bool]:
    """Standardization tau_j^2 for a single lag; (value, degenerate flag).

    Negative rounding artifacts are clamped to zero and flagged.
    """
    u = _as_series(values)
    n = u.size
    if not 1 <= j <= n - 2:
        raise DataError(f"lag {j} outside [1, n-2]")
    m = n - j
    first = math.fsum((u[:m] ** 2) * (u[j:] ** 2)) / m
    rj = math.fsum(u[:m] * u[j:]) / n
    val = first - (n / m * rj) ** 2
    if val <= 0.0:
        return 0.0, True
    return val, False


@dataclass
class AutocovTable:
    """Autocovariances and standardizations of one series up to maxlag.

    ``tausq[j-1]`` holds tau_j^2 for j = 1..maxlag; entries flagged in
    ``tausq_degenerate`` were clamped at zero or are structurally
    undefined (lags with a single cross product).  ``tausq0`` is the j -> 0
    limit (1/n) sum u^4 - R_0^2 used by the IMSE plug-in.
    """

    n: int
    maxlag: int
    rhat: np.ndarray
    tausq: np.ndarray
    tausq_degenerate: np.ndarray
    tausq0: float
    values: np.ndarray

    @property
    def r0(self) -> float:
        return float(self.rhat[0])


def autocov_table(values, maxlag: int | None = None) -> AutocovTable:
    """Build the full table of R_j and tau_j^2 in O(n log n)."""
    u = _as_series(values)
    n = u.size
    if maxlag is None:
        maxlag = n - 1
    if not 1 <= maxlag <= n - 1:
        raise DataError("lag exceeds sample")

    rhat = _crossprod_sums(u, maxlag) / n

    sq = u**2
    sqsums = _crossprod_sums(sq, maxlag)  # sum u_t^2 u_{t+j}^2
    js = np.arange(1, maxlag + 1)
    counts = n - js
    with np.errstate(divide="ignore", invalid="ignore"):
        tausq = sqsums[1:] / counts - (n / counts * rhat[1:]) ** 2
    degenerate = (tausq <= 0.0) | (counts < _MIN_PRODUCTS)
    tausq = np.where(degenerate, 0.0, tausq)

    tausq0 = float(sqsums[0] / n - rhat[0] ** 2)
    return AutocovTable(
        n=n,
        maxlag=int(maxlag),
        rhat=rhat,
        tausq=tausq,
        tausq_degenerate=degenerate,
        tausq0=tausq0,
        values=u,
    )


def lobato_gamma1(values) -> float:
    """Self-normalizing long-run scale for the lag-one autocovariance.

    Computed from a single pass of centered partial sums of the lag-one
    products.  Returns 0.0 when all products are identical (degenerate);
    callers must reject division by a zero value.
    """
    u = _as_series(values)
    n = u.size
    if n < 3:
        raise DataError("series must have length >= 3")
    v = u[:-1] * u[1:]
    c = np.cumsum(v - v.mean())
    return float(np.sum(c * c) / (n - 1) ** 2)


def kuanlee_gamma1(data, model: str = res.AR1_OLS) -> float:
    """Recursive long-run scale for residual series (estimated parameters).

    ``data`` is the raw series; residuals and the recursive parameter path
    are produced by the named model.  For the identity model this reduces to
    ``lobato_gamma1`` (the two centerings coincide).  For each outer index t
    the lag-one residual products are evaluated under the parameter fitted
    on the first t observations; the quadratic dependence of the products on
    the AR(1) parameter lets prefix sums replace per-t re-evaluation, which
    keeps the whole computation O(n) while matching the naive evaluation
    exactly.
    """
    y = _as_series(data)

    if model == res.IDENTITY:
        u = y
        m = u.size
        v = u[:-1] * u[1:]
        r1 = v.sum() / m
        center = m / (m - 1) * r1  # equals the product mean exactly
        c = np.cumsum(v - center)
        return float(np.sum(c * c) / (m - 1) ** 2)

    if model != res.AR1_OLS:
        raise DataError(f"unknown residual model {model!r}")

    fit = res.fit_ar1(y)
    u = fit.residuals
    m = u.size
    if m < 3:
        raise DataError("too few residuals for the recursive estimator")

    r1 = float(np.sum(u[:-1] * u[1:])) / m
    center = m / (m - 1) * r1

    # Residual products under parameter th: (a_j - th b_j)(a_{j+1} - th b_{j+1})
    # with a_j = y_{j+1}, b_j = y_j; expand in powers of th and prefix-sum.
    a = y[1:]
    b = y[:-1]
    p0 = a[:-1] * a[1:]
    p1 = a[:-1] * b[1:] + b[:-1] * a[1:]
    p2 = b[:-1] * b[1:]
    A = np.cumsum(p0)
    B = np.cumsum(p1)
    C = np.cumsum(p2)

    theta_path = res.fit_ar1_recursive(y)  # theta_path[t-1]: first t obs
    total = 0.0
    for t in range(2, m):  # t=1 skipped: the AR(1) fit needs 2 observations
        th = theta_path[t - 1]
        if not np.isfinite(th):
            raise DegeneracyError("recursive AR(1) fit degenerate (zero denominator)")
        inner = A[t - 1] - th * B[t - 1] + th * th * C[t - 1] - t * center
        total += inner * inner
    return total / (m - 1) ** 2
