"""Data-driven order choices.

Four selectors live here:

* ``select_order``       -- smallest maximizer of S_p / R_0^2 - E(p)
  - gamma_n V_delta(p) over p in [1, pbar];
* ``select_order_star``  -- same with the standardized S*_p (no division
  by R_0^2); its effective pbar is capped at n-2 because tau_{n-1}^2 is
  identically degenerate;
* ``el_select``          -- argmax of BP*_p - gamma_EL p with the two-branch
  penalty (ln n, or 2 once the max standardized covariance is large);
* ``imse_bandwidth``     -- the Newey-West style plug-in order used by the
  IMSE benchmark test.

All argmax ties break toward the smallest order.  The penalized objectives
are exactly scale-invariant in the data, so the selected orders are too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .covariance import AutocovTable
from .errors import DataError, DegeneracyError
from .kernels import KernelSpec, parzen_base
from .statistics import stat_cache


@dataclass(frozen=True)
class PenaltyConfig:
    """Penalty rule gamma_n = gamma_coef * (2 ln ln(n-2))^(1/2).

    ``pbar`` is the nominal maximum order (defaults to n-1); the starred
    selector clamps it to n-2 where the standardization exists.  Requires
    n >= 5 so that ln ln(n-2) > 0.
    """

    gamma_coef: float = 3.4
    pbar: int | None = None

    def gamma_n(self, n: int) -> float:
        if n < 5:
            raise DataError("penalty rule needs n >= 5")
        return self.gamma_coef * math.sqrt(2.0 * math.log(math.log(n - 2)))

    def effective_pbar(self, n: int, starred: bool) -> int:
        cap = n - 2 if starred else n - 1
        pbar = cap if self.pbar is None else min(self.pbar, cap)
        if pbar < 1:
            raise DataError("pbar must be >= 1")
        return pbar


@dataclass
class OrderSelection:
    p_hat: int
    objective: np.ndarray  # objective value for p = 1..pbar
    variant: str
    penalty_branch: str | None = None


def _smallest_argmax(values: np.ndarray) -> int:
    return int(np.argmax(values)) + 1  # argmax returns the first maximizer


def select_order(
    table: AutocovTable, kernel: KernelSpec, cfg: PenaltyConfig
) -> OrderSelection:
    """Penalized order choice for the raw statistic S_p."""
    if table.r0 <= 0.0:
        raise DegeneracyError("zero variance")
    n = table.n
    pbar = cfg.effective_pbar(n, starred=False)
    cache = stat_cache(kernel, n, pbar)
    x = n * table.rhat[1:] ** 2
    s_all = cache.stats_all(x)
    objective = s_all / table.r0**2 - cache.E - cfg.gamma_n(n) * cache.V_delta
    return OrderSelection(_smallest_argmax(objective), objective, "raw")


def select_order_star(
    table: AutocovTable, kernel: KernelSpec, cfg: PenaltyConfig
) -> OrderSelection:
    """Penalized order choice for the standardized statistic S*_p."""
    if table.r0 <= 0.0:
        raise DegeneracyError("zero variance")
    n = table.n
    pbar = cfg.effective_pbar(n, starred=True)
    cache = stat_cache(kernel, n, pbar)

    weight_reach = cache.max_weight_per_lag()[:pbar]
    bad = table.tausq_degenerate[:pbar] & (weight_reach > 0.0)
    if np.any(bad):
        j = int(np.nonzero(bad)[0][0]) + 1
        raise DegeneracyError(f"standardization degenerate at lag {j}")

    x = np.zeros(pbar)
    ok = ~table.tausq_degenerate[:pbar]
    x[ok] = n * table.rhat[1 : pbar + 1][ok] ** 2 / table.tausq[:pbar][ok]
    objective = cache.stats_all(x) - cache.E - cfg.gamma_n(n) * cache.V_delta
    return OrderSelection(_smallest_argmax(objective), objective, "standardized")


def bp_star_cumulative(table: AutocovTable, J: int) -> np.ndarray:
    """BP*_p = n sum_{j<=p} (R_j/tau_j)^2 for p = 1..J."""
    n = table.n
    if not 1 <= J <= table.maxlag:
        raise DataError("J exceeds the table maxlag")
    if np.any(table.tausq_degenerate[:J]):
        j = int(np.nonzero(table.tausq_degenerate[:J])[0][0]) + 1
        raise DegeneracyError(f"standardization degenerate at lag {j}")
    terms = n * table.rhat[1 : J + 1] ** 2 / table.tausq[:J]
    return np.cumsum(terms)


def el_select(table: AutocovTable, J: int) -> OrderSelection:
    """Escanciano-Lobato order choice over [1, J].

    The penalty is ln n while sqrt(n) max_j |R_j/tau_j| stays below
    (2.4 ln n)^(1/2) and drops to 2 beyond; the branch taken is recorded.
    """
    n = table.n
    bp = bp_star_cumulative(table, J)
    ratios = np.sqrt(n) * np.abs(table.rhat[1 : J + 1]) / np.sqrt(table.tausq[:J])
    if ratios.max() <= math.sqrt(2.4 * math.log(n)):
        gamma_el, branch = math.log(n), "log_n"
    else:
        gamma_el, branch = 2.0, "2"
    objective = bp - gamma_el * np.arange(1, J + 1)
    return OrderSelection(_smallest_argmax(objective), objective, "el", branch)


@dataclass
class ImseBandwidth:
    p_tilde: float  # pilot bandwidth (4n/100)^(4/25)
    c_tilde: float
    p_real: float  # (1 v c~^(1/5)) n^(1/5), used inside kernel arguments
    p_imse: int  # floor(p_real), >= 1, used as the summation limit


def imse_bandwidth(table: AutocovTable) -> ImseBandwidth:
    """Plug-in order for the IMSE benchmark test.

    The pilot-weighted curvature ratio c~ uses the plain Parzen window (not
    the modified one); the symmetric sums over j = -(n-1)..n-1 reduce to the
    j = 0 term plus twice the positive lags inside the pilot support.  The
    j = 0 denominator term uses tau_0^2 = (1/n) sum u^4 - R_0^2 (the j -> 0
    limit of the lag standardization); its j^4 numerator term vanishes.
    """
    n = table.n
    p_tilde = (4.0 * n / 100.0) ** (4.0 / 25.0)
    jmax = min(int(p_tilde), n - 2)

    if table.tausq0 <= 0.0:
        raise DegeneracyError("tau_0^2 degenerate")
    num = 0.0
    den = parzen_base(0.0) * table.r0**2 / table.tausq0
    for j in range(1, jmax + 1):
        if table.tausq_degenerate[j - 1]:
            raise DegeneracyError(f"standardization degenerate at lag {j}")
        ratio = table.rhat[j] ** 2 / table.tausq[j - 1]
        w = parzen_base(j / p_tilde)
        num += 2.0 * w * j**4 * ratio
        den += 2.0 * w * ratio
    if den <= 0.0:
        raise DegeneracyError("plug-in denominator degenerate")
    c_tilde = 144.0 * num / (0.539285 * den)

    p_real = max(1.0, c_tilde ** (1.0 / 5.0)) * n ** (1.0 / 5.0)
    p_imse = max(1, int(p_real))
    return ImseBandwidth(p_tilde=p_tilde, c_tilde=c_tilde, p_real=p_real, p_imse=p_imse)
