import math

import numpy as np
import pytest

import wntest as w
from wntest.covariance import AutocovTable, autocov_table
from wntest.errors import DataError, DegeneracyError
from wntest.kernels import evaluate
from wntest.statistics import centering, compute_trace, s_star_stat, s_stat, stat_cache

UNIFORM = w.uniform_kernel()
PARZEN = w.modified_parzen_kernel()

# Frozen lower/upper constants for the scaling-sequence bounds, estimated
# on a dense (n, p) sweep per kernel and fixed with a safety margin.
LEMMA_CONSTANTS = {UNIFORM: (1.0, 0.75), PARZEN: (10.0, 0.65)}


def naive_s_stat(table, kernel, p):
    # full sum to n-1 exactly as defined; the implementation truncates at
    # the kernel support and must agree
    return table.n * math.fsum(
        evaluate(kernel, j / p) ** 2 * table.rhat[j] ** 2
        for j in range(1, table.n)
        if j <= table.maxlag
    )


def naive_centering(kernel, n, p):
    e = sum((1 - j / n) * evaluate(kernel, j / p) ** 2 for j in range(1, n))
    ed = sum(
        (1 - j / n) * (evaluate(kernel, j / p) ** 2 - evaluate(kernel, float(j)) ** 2)
        for j in range(1, n)
    )
    vd2 = 2 * sum(
        (1 - j / n) ** 2
        * (evaluate(kernel, j / p) ** 2 - evaluate(kernel, float(j)) ** 2) ** 2
        for j in range(1, n)
    )
    return e, ed, math.sqrt(vd2)


def synth_table(rhat, n, tausq=None):
    rhat = np.asarray(rhat, dtype=float)
    maxlag = len(rhat) - 1
    if tausq is None:
        tausq = np.ones(maxlag)
    tausq = np.asarray(tausq, dtype=float)
    return AutocovTable(
        n=n,
        maxlag=maxlag,
        rhat=rhat,
        tausq=tausq,
        tausq_degenerate=tausq <= 0.0,
        tausq0=1.0,
        values=np.zeros(n),
    )


def test_s_stat_examples():
    table = synth_table([1.0, 0.5, 0.2], n=10)
    assert s_stat(table, UNIFORM, 2) == pytest.approx(10 * (0.25 + 0.04))
    zero = synth_table([1.0, 0.0, 0.0, 0.0], n=10)
    for p in (1, 2, 3):
        assert s_stat(zero, UNIFORM, p) == 0.0


def test_s1_is_k1_weighted_lag_one(rng):
    u = rng.standard_normal(50)
    table = autocov_table(u)
    for kernel in (UNIFORM, PARZEN):
        k1 = evaluate(kernel, 1.0)
        assert s_stat(table, kernel, 1) == pytest.approx(
            50 * k1**2 * table.rhat[1] ** 2, rel=1e-12
        )


def test_s_star_examples():
    table = synth_table([1.0, 0.5], n=10, tausq=[0.25])
    assert s_star_stat(table, UNIFORM, 1) == pytest.approx(10.0)
    degen = synth_table([1.0, 0.5], n=10, tausq=[0.0])
    with pytest.raises(DegeneracyError, match="lag 1"):
        s_star_stat(degen, UNIFORM, 1)


def test_s_star_constant_standardization_reduces_to_s(rng):
    u = rng.standard_normal(40)
    table = autocov_table(u)
    r0sq = table.r0**2
    table.tausq[:] = r0sq
    table.tausq_degenerate[:] = False
    for p in (1, 3, 10):
        assert s_star_stat(table, UNIFORM, p) == pytest.approx(
            s_stat(table, UNIFORM, p) / r0sq, rel=1e-12
        )


def test_centering_examples():
    e, ed, vd = centering(UNIFORM, 100, 3)
    assert ed == pytest.approx(0.98 + 0.97)
    assert vd**2 == pytest.approx(2 * (0.98**2 + 0.97**2))
    for kernel in (UNIFORM, PARZEN):
        e, ed, vd = centering(kernel, 64, 1)
        assert ed == 0.0 and vd == 0.0


def test_uniform_e_delta_near_p_minus_1():
    n = 10_000
    for p in range(2, 31):
        _, ed, _ = centering(UNIFORM, n, p)
        assert abs(ed - (p - 1)) <= p * p / n


def test_centering_matches_naive():
    for kernel in (UNIFORM, PARZEN):
        for n, p in ((30, 1), (30, 7), (120, 29), (120, 119)):
            e, ed, vd = centering(kernel, n, p)
            en, edn, vdn = naive_centering(kernel, n, p)
            assert e == pytest.approx(en, rel=1e-12, abs=1e-12)
            assert ed == pytest.approx(edn, rel=1e-12, abs=1e-12)
            assert vd == pytest.approx(vdn, rel=1e-12, abs=1e-12)


def test_s_stat_matches_naive_full_sum(rng):
    for n in (20, 100):
        u = rng.standard_normal(n)
        table = autocov_table(u)
        for kernel in (UNIFORM, PARZEN):
            for p in (1, 2, n // 3, n - 1):
                assert s_stat(table, kernel, p) == pytest.approx(
                    naive_s_stat(table, kernel, p), rel=1e-12
                )


def test_uniform_monotonicity(rng):
    u = rng.standard_normal(80)
    table = autocov_table(u)
    cache = stat_cache(UNIFORM, 80, 79)
    s_all = cache.stats_all(80 * table.rhat[1:] ** 2)
    assert np.all(np.diff(s_all) >= 0.0)
    assert np.all(np.diff(cache.E_delta) >= -1e-12)


def test_lemma_order_bounds():
    for kernel, (c_low, c_up) in LEMMA_CONSTANTS.items():
        for n in (64, 500):
            for p in range(2, n // 2 + 1):
                _, ed, vd = centering(kernel, n, p)
                assert ed >= 0.0
                assert vd >= c_low * math.sqrt(p - 1)
                assert ed <= c_up * math.sqrt(p) * vd


def test_cache_matches_scalar_ops(rng):
    n = 150
    u = rng.standard_normal(n)
    table = autocov_table(u)
    for kernel in (UNIFORM, PARZEN):
        pbar = n - 2
        cache = stat_cache(kernel, n, pbar)
        s_all = cache.stats_all(n * table.rhat[1:] ** 2)
        for p in (1, 2, 50, pbar):
            assert s_all[p - 1] == pytest.approx(s_stat(table, kernel, p), rel=1e-12)
            e, ed, vd = centering(kernel, n, p)
            assert cache.E[p - 1] == pytest.approx(e, rel=1e-12)
            assert cache.E_delta[p - 1] == pytest.approx(ed, rel=1e-12, abs=1e-12)
            assert cache.V_delta[p - 1] == pytest.approx(vd, rel=1e-12, abs=1e-12)
        assert cache.E_delta[0] == 0.0 and cache.V_delta[0] == 0.0


def test_order_out_of_range(rng):
    table = autocov_table(rng.standard_normal(20))
    with pytest.raises(DataError):
        s_stat(table, UNIFORM, 0)
    with pytest.raises(DataError):
        s_stat(table, UNIFORM, 20)


def test_compute_trace_reports_degenerate_star():
    table = synth_table([1.0, 0.5, 0.3], n=12, tausq=[1.0, 0.0])
    trace = compute_trace(table, UNIFORM, 2)
    assert trace.s_star is None
    assert trace.s == pytest.approx(12 * (0.25 + 0.09))
    assert trace.e_delta >= 0.0
