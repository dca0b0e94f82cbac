"""Residual models and recursive parameter estimation.

Only two models ship: the identity model (series used as is) and AR(1)
fitted by OLS through the origin,

    theta = sum_t y_t y_{t+1} / sum_t y_t^2,   u_t = y_t - theta y_{t-1}.

The recursive path theta_t (fit on the first t observations) is maintained
by running sums so the final element matches the full-sample fit bit for
bit.  The model surface is deliberately small; nothing else is needed by
the estimated-residual critical values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegeneracyError

IDENTITY = "identity"
AR1_OLS = "ar1_ols"

RESIDUAL_MODELS = (IDENTITY, AR1_OLS)


@dataclass
class Ar1Fit:
    theta: float
    residuals: np.ndarray  # u_t = y_t - theta y_{t-1}, t = 2..n (length n-1)


def fit_ar1(y) -> Ar1Fit:
    """Full-sample AR(1) OLS fit and its residual series."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise DataError("AR(1) fit needs a one-dimensional series of length >= 3")
    # sequential (cumsum-order) sums so the recursive path ends bit-exactly here
    den = float(np.cumsum(y[:-1] ** 2)[-1])
    if den <= 0.0:
        raise DegeneracyError("AR(1) regressor sum of squares is zero")
    theta = float(np.cumsum(y[:-1] * y[1:])[-1]) / den
    return Ar1Fit(theta=theta, residuals=y[1:] - theta * y[:-1])


def fit_ar1_recursive(y) -> np.ndarray:
    """Recursive AR(1) estimates theta_t, t = 1..n, from running sums.

    ``out[t-1]`` is the fit on the first t observations; entries where the
    fit is undefined (t < 2, or a zero running denominator) are NaN.  The
    last element equals ``fit_ar1(y).theta`` exactly (identical sums).
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size < 2:
        raise DataError("recursive AR(1) fit needs length >= 2")
    num = np.cumsum(y[:-1] * y[1:])
    den = np.cumsum(y[:-1] ** 2)
    out = np.full(y.size, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0.0, num / den, np.nan)
    out[1:] = ratio
    return out


def residuals_for(model: str, y) -> np.ndarray:
    """Residual series of the named model (identity returns the input)."""
    if model == IDENTITY:
        return np.asarray(y, dtype=float)
    if model == AR1_OLS:
        return fit_ar1(y).residuals
    raise DataError(f"unknown residual model {model!r}")
