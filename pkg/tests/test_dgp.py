import math

import numpy as np
import pytest

import wntest as w
from wntest.dgp import (
    ALL_PASS,
    AR1_OBSERVED,
    ARCH1,
    BILINEAR,
    GARCH11,
    IID_CHI1_CENTERED,
    IID_NORMAL,
    IID_STUDENT,
    LACUNARY_AR,
    LACUNARY_MA,
    NO_MDS,
    RANDOM_MA,
    DgpSpec,
    calibrate_lacunary,
    exact_ma_autocov,
    gamma_n_value,
    generate,
    generate_detailed,
    population_autocov,
    population_autocov_randomma,
    randomma_amplitude,
)
from wntest.errors import DataError


def make_rng(seed=0):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def test_determinism_bit_reproducible():
    for kind in (IID_NORMAL, GARCH11, BILINEAR, ALL_PASS, RANDOM_MA):
        spec = DgpSpec(kind=kind, P=10 if kind == RANDOM_MA else None)
        a = generate(spec, 64, make_rng(9))
        b = generate(spec, 64, make_rng(9))
        np.testing.assert_array_equal(a, b)


def test_iid_normal_moments():
    u = generate(DgpSpec(kind=IID_NORMAL), 100_000, make_rng(1))
    assert abs(u.mean()) < 4 / math.sqrt(100_000)
    assert u.var() == pytest.approx(1.0, rel=0.05)


def test_lengths_and_kinds():
    for kind in (
        IID_NORMAL, IID_STUDENT, IID_CHI1_CENTERED, GARCH11, ARCH1,
        BILINEAR, NO_MDS, ALL_PASS, AR1_OBSERVED,
    ):
        u = generate(DgpSpec(kind=kind), 257, make_rng(2))
        assert u.shape == (257,) and np.all(np.isfinite(u))
    with pytest.raises(DataError):
        generate(DgpSpec(kind="white"), 10, make_rng(0))


def test_weak_nulls_uncorrelated():
    # lag-1 autocorrelation centered at zero across seeds; the bound is
    # self-calibrating because several of these processes are heavy-tailed
    for kind in (GARCH11, ARCH1, BILINEAR, NO_MDS):
        vals = []
        for s in range(40):
            u = generate(DgpSpec(kind=kind), 20_000, make_rng(100 + s))
            vals.append(np.sum(u[:-1] * u[1:]) / np.sum(u * u))
        vals = np.array(vals)
        assert abs(vals.mean()) < 4 * vals.std(ddof=1) / math.sqrt(len(vals)) + 1e-3


def test_all_pass_uncorrelated_first_lags():
    n = 100_000
    u = generate(DgpSpec(kind=ALL_PASS), n, make_rng(3))
    r0 = np.mean(u * u)
    for j in range(1, 6):
        rj = np.sum(u[:-j] * u[j:]) / n
        assert abs(rj / r0) < 4 / math.sqrt(n)


def test_ar1_observed_matches_theory():
    u = generate(DgpSpec(kind=AR1_OBSERVED), 200_000, make_rng(4))
    assert u.var() == pytest.approx(1 / (1 - 0.64), rel=0.05)
    rho1 = np.sum(u[:-1] * u[1:]) / np.sum(u * u)
    assert rho1 == pytest.approx(0.8, abs=0.01)


def test_lacunary_population_examples():
    pop = population_autocov(DgpSpec(kind=LACUNARY_MA, P=4, coef=0.8165), 8)
    assert pop.correlations[4] == pytest.approx(0.8165 / (1 + 0.8165**2))
    assert pop.correlations[4] == pytest.approx(0.48990, abs=1e-4)
    assert pop.r[1] == 0.0 and pop.r[5] == 0.0

    pop = population_autocov(DgpSpec(kind=LACUNARY_AR, P=6, coef=0.6849), 12)
    assert pop.correlations[6] == pytest.approx(0.6849)
    assert pop.correlations[12] == pytest.approx(0.6849**2)
    assert pop.correlations[12] == pytest.approx(0.46909, abs=1e-4)

    pop = population_autocov(DgpSpec(kind=IID_NORMAL), 3)
    assert pop.r[0] == 1.0 and np.all(pop.r[1:] == 0.0)


def test_lacunary_ma_correlation_maximized_at_unit_coef():
    # theta/(1+theta^2) peaks at 1/2 for theta = 1
    thetas = np.linspace(0.01, 0.99, 99)
    vals = thetas / (1 + thetas**2)
    assert vals.max() < 0.5
    pop = population_autocov(DgpSpec(kind=LACUNARY_MA, P=1, coef=1.0), 1)
    assert pop.correlations[1] == pytest.approx(0.5)


def test_lacunary_empirical_matches_population():
    spec = DgpSpec(kind=LACUNARY_AR, P=6, coef=0.6849)
    u = generate(spec, 300_000, make_rng(5))
    r0 = np.mean(u * u)
    r6 = np.sum(u[:-6] * u[6:]) / len(u)
    assert r6 / r0 == pytest.approx(0.6849, abs=0.01)


def test_randomma_detailed_and_amplitude():
    spec = DgpSpec(kind=RANDOM_MA, P=75)
    u, info = generate_detailed(spec, 1000, make_rng(6))
    assert u.shape == (1000,)
    assert info["psi"].shape == (75,)
    assert info["amplitude"] == pytest.approx(
        math.sqrt(2.5 * gamma_n_value(1000)) / (math.sqrt(1000) * 75**0.25)
    )
    assert gamma_n_value(1000) == pytest.approx(3.4 * math.sqrt(2 * math.log(math.log(998))))


def test_randomma_empirical_covariance_matches_exact(rng):
    # fixed psi: the mean of the debiased sample covariance equals the exact
    # MA autocovariance of the realized coefficients
    spec = DgpSpec(kind=RANDOM_MA, P=10)
    n, draws = 400, 4000
    base = make_rng(7)
    u0, info = generate_detailed(spec, n, base)
    psi = info["psi"]
    c = info["amplitude"]
    weights = np.concatenate(([1.0], c * psi))
    lags = [1, 3, 10]
    acc = {j: [] for j in lags}
    for d in range(draws):
        e = rng.standard_normal(n + 10)
        u = np.convolve(e, weights)[10 : 10 + n]
        for j in lags:
            acc[j].append(np.sum(u[:-j] * u[j:]) / (n - j))  # debiased divisor
    exact = exact_ma_autocov(weights, max(lags))
    for j in lags:
        vals = np.array(acc[j])
        se = vals.std(ddof=1) / math.sqrt(draws)
        assert abs(vals.mean() - exact[j]) < 3.5 * se


def test_randomma_population_first_order():
    spec = DgpSpec(kind=RANDOM_MA, P=20)
    _, info = generate_detailed(spec, 500, make_rng(8))
    pop = population_autocov_randomma(spec, 500, info["psi"], 25)
    c = info["amplitude"]
    np.testing.assert_allclose(pop.r[1:21], c * info["psi"], rtol=1e-12)
    assert np.all(pop.r[21:] == 0.0)
    assert pop.remainder == pytest.approx(c * c * np.sum(info["psi"] ** 2))
    assert pop.exact is not None


# ----------------------------------------------------------------- calibration
def test_calibration_reproduces_published_coefficients():
    assert calibrate_lacunary("ma", 1, 200) == pytest.approx(0.1244, abs=1e-3)
    assert calibrate_lacunary("ma", 4, 200) == pytest.approx(0.8165, abs=1e-3)
    assert calibrate_lacunary("ma", 4, 1000) == pytest.approx(0.2307, abs=1e-3)
    assert calibrate_lacunary("ar", 6, 200) == pytest.approx(0.6849, abs=1e-3)
    assert calibrate_lacunary("ar", 6, 1000) == pytest.approx(0.3242, abs=1e-3)
    assert calibrate_lacunary("ar", 1, 200) == pytest.approx(0.1233, abs=1e-2)


def test_calibration_against_dilogarithm_oracle():
    mpmath = pytest.importorskip("mpmath")
    for P, n in ((6, 200), (6, 1000), (1, 200)):
        rho = calibrate_lacunary("ar", P, n)
        lhs = float(mpmath.polylog(2, rho * rho)) / P**2
        assert lhs == pytest.approx(3.0 / n, rel=1e-8)


def test_calibration_roundtrip():
    for fam, P, n in (("ma", 4, 200), ("ar", 6, 1000), ("ma", 1, 500)):
        coef = calibrate_lacunary(fam, P, n)
        kind = LACUNARY_MA if fam == "ma" else LACUNARY_AR
        pop = population_autocov(DgpSpec(kind=kind, P=P, coef=coef), 60 * P)
        corr = pop.correlations
        total = sum(
            (corr[j]) ** 2 / (j / P) ** 2 / P**2
            for j in range(1, len(corr))
            if corr[j] != 0.0
        )
        assert total == pytest.approx(3.0 / n, abs=1e-9)


def test_calibration_errors():
    with pytest.raises(DataError):
        calibrate_lacunary("ma", 4, 40)  # n <= 3 P^2
    with pytest.raises(DataError):
        calibrate_lacunary("arma", 1, 100)
    with pytest.raises(DataError):
        calibrate_lacunary("ma", 5, 80)


def test_burn_in_applied():
    # without burn-in the lacunary AR starts at zero state; with the default
    # burn-in the first observation is already stationary
    spec0 = DgpSpec(kind=LACUNARY_AR, P=1, coef=0.9, burn_in=0)
    spec1 = DgpSpec(kind=LACUNARY_AR, P=1, coef=0.9)
    a = generate(spec0, 5, make_rng(11))
    b = generate(spec1, 5, make_rng(11))
    assert not np.allclose(a, b)
    assert abs(a[0]) < 4.0  # first draw is a bare innovation
