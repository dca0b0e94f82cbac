import numpy as np
import pytest

from wntest.errors import KernelError
from wntest.kernels import (
    KernelSpec,
    evaluate,
    kernel_by_name,
    load_kernel_csv,
    modified_parzen_kernel,
    parzen_base,
    tabulated_kernel,
    uniform_kernel,
    validate,
)


def test_parzen_base_piecewise_values():
    # direct evaluation of the piecewise cubic
    assert parzen_base(0.25) == pytest.approx(1 - 6 * 0.0625 + 6 * 0.015625)
    assert parzen_base(0.25) == pytest.approx(0.71875)
    assert parzen_base(0.75) == pytest.approx(2 * 0.25**3)
    assert parzen_base(0.75) == pytest.approx(0.03125)
    assert parzen_base(0.0) == 1.0
    assert parzen_base(1.0) == 0.0
    assert parzen_base(1.2) == 0.0


def test_uniform_values():
    k = uniform_kernel()
    assert evaluate(k, 0.5) == 1.0
    assert evaluate(k, 0.0) == 1.0
    assert evaluate(k, 1.0) == 1.0
    assert evaluate(k, 1.0 + 1e-9) == 0.0
    assert evaluate(k, 10.0) == 0.0


def test_modified_parzen_values():
    k = modified_parzen_kernel()
    # K(t) = k(t/2)/k(1/2); K(1) = 1 by construction, K(0) = 1/k(1/2) = 4
    assert evaluate(k, 1.0) == pytest.approx(1.0)
    assert evaluate(k, 0.0) == pytest.approx(4.0)
    assert evaluate(k, 0.5) == pytest.approx(0.71875 / 0.25)
    assert evaluate(k, 1.0 + 1e-9) == 0.0
    assert evaluate(k, 10.0) == 0.0


@pytest.mark.parametrize("kernel", [uniform_kernel(), modified_parzen_kernel()])
def test_shipped_kernels_validate_and_are_nonincreasing(kernel):
    report = validate(kernel)
    assert report.ok
    xs = np.linspace(0.0, 1.0, 1001)
    vals = evaluate(kernel, xs)
    assert np.all(np.diff(vals) <= 1e-12)
    assert vals[xs <= 0.5].min() > 0.0


def test_modified_parzen_flags_k0_as_warning_only():
    report = validate(modified_parzen_kernel())
    assert report.ok
    assert any("K(0)" in m for m in report.warnings)


def test_tabulated_kernel_interpolates_and_validates():
    k = tabulated_kernel([(0.0, 1.0), (0.5, 0.8), (1.0, 0.2)])
    assert evaluate(k, 0.25) == pytest.approx(0.9)
    assert evaluate(k, 0.75) == pytest.approx(0.5)
    assert evaluate(k, 2.0) == 0.0


def test_tabulated_kernel_k0_violation_detected():
    spec = KernelSpec(kind="tabulated", grid=((0.0, 0.9), (1.0, 0.2)))
    report = validate(spec)
    assert not report.ok
    assert any("K(0)" in m for m in report.violations)
    with pytest.raises(KernelError):
        tabulated_kernel([(0.0, 0.9), (1.0, 0.2)])


def test_tabulated_kernel_rejects_increasing_table():
    with pytest.raises(KernelError):
        tabulated_kernel([(0.0, 1.0), (0.5, 1.2), (1.0, 0.5)])


def test_tabulated_kernel_requires_full_grid():
    with pytest.raises(KernelError):
        tabulated_kernel([(0.1, 1.0), (1.0, 0.5)])


def test_kernel_by_name_and_csv(tmp_path):
    assert kernel_by_name("uniform").kind == "uniform"
    assert kernel_by_name("parzen").kind == "modified_parzen"
    path = tmp_path / "kern.csv"
    path.write_text("x,value\n0.0,1.0\n0.5,0.6\n1.0,0.1\n")
    k = load_kernel_csv(path)
    assert evaluate(k, 0.5) == pytest.approx(0.6)
    assert kernel_by_name(str(path)).grid == k.grid


def test_kernels_hashable_and_immutable():
    a, b = uniform_kernel(), uniform_kernel()
    assert a == b and hash(a) == hash(b)
    with pytest.raises(Exception):
        a.kind = "other"
