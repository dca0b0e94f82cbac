"""Lag-window kernels used to weight squared autocovariances.

Every shipped kernel is supported on [0, 1], nonincreasing there and bounded
away from zero on [0, 1/2].  Three kinds exist:

* ``uniform``          -- K(t) = 1 on [0, 1], 0 beyond; gives Box-Pierce sums.
* ``modified_parzen``  -- K(t) = k(t/2) / k(1/2) on [0, 1] where k is the
  piecewise-cubic Parzen window.  The rescaling keeps K(1) = 1 > 0 (the plain
  Parzen window vanishes at the edge of its support) at the price of
  K(0) = 4; ``validate`` reports the K(0) != 1 condition as a warning for
  this kind rather than an error.
* ``tabulated``        -- linear interpolation of a user grid on [0, 1].

Kernels are immutable and evaluation is pure, so they are safe to share
across threads and to use as cache keys.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import KernelError

UNIFORM = "uniform"
MODIFIED_PARZEN = "modified_parzen"
TABULATED = "tabulated"

#: Grid resolution used by validate(); smoothness is only checked at this
#: resolution, which approximates the continuity requirement.
VALIDATION_STEP = 1e-3
_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a lag-window kernel."""

    kind: str
    grid: tuple[tuple[float, float], ...] = field(default=())

    @property
    def name(self) -> str:
        return self.kind


@dataclass(frozen=True)
class KernelValidation:
    ok: bool
    violations: tuple[str, ...]
    warnings: tuple[str, ...]


def parzen_base(x):
    """Plain Parzen window k: piecewise cubic on [0, 1], zero beyond.

    k(t) = 1 - 6 t^2 + 6 |t|^3 for |t| <= 1/2, 2 (1 - |t|)^3 for
    1/2 < |t| <= 1.  Used directly by the IMSE plug-in test; the modified
    kernel is k(t/2)/k(1/2).
    """
    t = np.abs(np.asarray(x, dtype=float))
    out = np.where(
        t <= 0.5,
        1.0 - 6.0 * t**2 + 6.0 * t**3,
        np.where(t <= 1.0, 2.0 * (1.0 - t) ** 3, 0.0),
    )
    if np.isscalar(x):
        return float(out)
    return out


def evaluate(kernel: KernelSpec, x):
    """Evaluate K(x) for x >= 0 (scalar or array). Zero outside [0, 1]."""
    t = np.asarray(x, dtype=float)
    if kernel.kind == UNIFORM:
        out = np.where((t >= 0.0) & (t <= 1.0), 1.0, 0.0)
    elif kernel.kind == MODIFIED_PARZEN:
        # k(1/2) = 2 (1/2)^3 = 1/4
        out = np.where((t >= 0.0) & (t <= 1.0), parzen_base(t / 2.0) / 0.25, 0.0)
    elif kernel.kind == TABULATED:
        xs = np.array([g[0] for g in kernel.grid])
        ys = np.array([g[1] for g in kernel.grid])
        out = np.where((t >= 0.0) & (t <= 1.0), np.interp(t, xs, ys), 0.0)
    else:
        raise KernelError(f"unknown kernel kind {kernel.kind!r}")
    if np.isscalar(x):
        return float(out)
    return out


def validate(kernel: KernelSpec, step: float = VALIDATION_STEP) -> KernelValidation:
    """Check the kernel shape conditions on a dense grid.

    Checks K(0) = 1, monotone nonincreasing on [0, 1], min over [0, 1/2]
    strictly positive, zero outside the unit support, and grid-level
    smoothness (a proxy for the continuity requirement).  Never raises;
    returns the list of violated conditions.  For the ``modified_parzen``
    kind the K(0) != 1 condition is downgraded to a warning, since the
    rescaled kernel is used as defined.
    """
    violations: list[str] = []
    warnings: list[str] = []

    xs = np.arange(0.0, 1.0 + step / 2, step)
    vals = evaluate(kernel, xs)

    k0 = evaluate(kernel, 0.0)
    if abs(k0 - 1.0) > _EXACT_TOL:
        msg = f"K(0) != 1 (got {k0:g})"
        if kernel.kind == MODIFIED_PARZEN:
            warnings.append(msg)
        else:
            violations.append(msg)

    diffs = np.diff(vals)
    if diffs.max(initial=0.0) > _EXACT_TOL:
        j = int(np.argmax(diffs))
        violations.append(f"not nonincreasing on [0,1] (increase near x={xs[j]:.4f})")

    half = vals[xs <= 0.5 + _EXACT_TOL]
    if half.min() <= 0.0:
        violations.append("not bounded away from 0 on [0,1/2]")

    for x in (1.0 + 1e-9, 1.5, 2.0, 10.0):
        if evaluate(kernel, x) != 0.0:
            violations.append(f"nonzero outside the unit support (K({x:g}) != 0)")
            break

    # Smoothness proxy: successive grid jumps should be O(step * max slope).
    # This only approximates continuous differentiability.
    if np.abs(diffs).max(initial=0.0) > 0.05:
        violations.append("grid-level jump exceeds smoothness tolerance")

    return KernelValidation(
        ok=not violations, violations=tuple(violations), warnings=tuple(warnings)
    )


def _checked(spec: KernelSpec) -> KernelSpec:
    report = validate(spec)
    if not report.ok:
        raise KernelError("; ".join(report.violations))
    return spec


def uniform_kernel() -> KernelSpec:
    return _checked(KernelSpec(kind=UNIFORM))


def modified_parzen_kernel() -> KernelSpec:
    return _checked(KernelSpec(kind=MODIFIED_PARZEN))


def tabulated_kernel(points) -> KernelSpec:
    """Build a tabulated kernel from (x, value) pairs on [0, 1].

    The grid must include x = 0 and x = 1; evaluation interpolates linearly
    between grid points, which preserves monotonicity of monotone tables.
    """
    pts = sorted((float(x), float(y)) for x, y in points)
    if not pts or pts[0][0] != 0.0 or pts[-1][0] != 1.0:
        raise KernelError("tabulated kernel grid must include x=0 and x=1")
    return _checked(KernelSpec(kind=TABULATED, grid=tuple(pts)))


def load_kernel_csv(path) -> KernelSpec:
    """Load a tabulated kernel from a two-column CSV (x, value)."""
    pts = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("x", ""):
                continue
            pts.append((float(row[0]), float(row[1])))
    return tabulated_kernel(pts)


def kernel_by_name(name: str) -> KernelSpec:
    """Resolve a CLI kernel name: 'uniform', 'parzen', or a CSV path."""
    key = name.strip().lower()
    if key == "uniform":
        return uniform_kernel()
    if key in ("parzen", "modified-parzen", "modified_parzen"):
        return modified_parzen_kernel()
    return load_kernel_csv(name)
