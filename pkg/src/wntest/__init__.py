"""Adaptive weak-white-noise testing.

Kernel-weighted portmanteau statistics with a penalized data-driven order
choice and self-normalized (HAC) critical values, four benchmark tests, the
data generating processes of the accompanying simulation design, and a
replication harness.
"""

from .covariance import AutocovTable, autocov, autocov_table, kuanlee_gamma1, lobato_gamma1, tau_sq
from .critical_values import (
    CriticalValueTable,
    TableStore,
    default_store,
    lobato_cv,
    quantile,
    tabulate_cvm,
    tabulate_lobato,
    tabulate_maxtest,
)
from .dgp import DgpSpec, calibrate_lacunary, generate, generate_detailed, population_autocov
from .errors import DataError, DegeneracyError, KernelError
from .kernels import KernelSpec, evaluate, modified_parzen_kernel, tabulated_kernel, uniform_kernel, validate
from .montecarlo import ExperimentSpec, SimulationReport, load_experiment_file, run_experiment, run_suite
from .residuals import fit_ar1, fit_ar1_recursive
from .selection import (
    ImseBandwidth,
    OrderSelection,
    PenaltyConfig,
    el_select,
    imse_bandwidth,
    select_order,
    select_order_star,
)
from .statistics import centering, s_star_stat, s_stat
from .testing import MethodSpec, TestOutcome, cvm_test, el_test, ggl_test, imse_test, max_test

__version__ = "0.1.0"
