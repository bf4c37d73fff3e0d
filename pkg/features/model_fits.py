# features/model_fits.py - Linear trend, AR, Langevin drift and ADF features
from __future__ import annotations
import logging
import warnings
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from numpy.polynomial import polynomial as P
from scipy import stats
from statsmodels.tools.sm_exceptions import InterpolationWarning
from statsmodels.tsa.stattools import adfuller

from .extractors import NAN, as_series
from .spec import feature_suffix

logger = logging.getLogger('jobclust.features.models')

TREND_ATTRS = ("pvalue", "rvalue", "intercept", "slope", "stderr")
AR_ORDER = 10
AR_COEFFS = (0, 1, 2, 3, 4)
FRIEDRICH_M = 3
FRIEDRICH_R = 30
FRIEDRICH_COEFFS = (0, 1, 2, 3)
ADF_ATTRS = ("teststat", "pvalue", "usedlag")
ADF_MIN_LENGTH = 15


def linear_trend(x: np.ndarray) -> Dict[str, float]:
    if len(x) < 2:
        return {a: NAN for a in TREND_ATTRS}
    res = stats.linregress(np.arange(len(x), dtype=np.float64), x)
    return {
        "pvalue": float(res.pvalue),
        "rvalue": float(res.rvalue),
        "intercept": float(res.intercept),
        "slope": float(res.slope),
        "stderr": float(res.stderr),
    }


def ar_coefficients(x: np.ndarray, k: int = AR_ORDER) -> List[float]:
    """Least-squares AR(k) with intercept; [intercept, lag1, ..., lagk]."""
    n = len(x)
    if n < k + 2:
        return [NAN] * (k + 1)
    design = np.column_stack([np.ones(n - k)] + [x[k - j:n - j] for j in range(1, k + 1)])
    coef, _, rank, _ = np.linalg.lstsq(design, x[k:], rcond=None)
    if rank < k + 1:
        return [NAN] * (k + 1)
    return [float(c) for c in coef]


def friedrich_coefficients(x: np.ndarray, m: int = FRIEDRICH_M, r: int = FRIEDRICH_R) -> List[float]:
    """Polynomial drift of the Langevin model fitted on quantile-binned (x, dx) means, ascending degree."""
    undefined = [NAN] * (m + 1)
    if len(x) <= r:
        return undefined
    frame = pd.DataFrame({"signal": x[:-1], "delta": np.diff(x)})
    try:
        frame["bin"] = pd.qcut(frame["signal"], r)
    except (ValueError, IndexError):
        return undefined

    grouped = frame.groupby("bin", observed=True)
    means = pd.DataFrame({"x_mean": grouped["signal"].mean(),
                          "y_mean": grouped["delta"].mean()}).dropna()
    if len(means) < m + 1:
        return undefined
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", np.exceptions.RankWarning)
            coef = P.polyfit(means["x_mean"].to_numpy(), means["y_mean"].to_numpy(), m)
    except (np.linalg.LinAlgError, ValueError):
        return undefined
    return [float(c) for c in coef]


def adf_maxlag(n: int) -> int:
    # statsmodels rejects maxlag above nobs // 2 - ntrend - 1 ('c' has ntrend 1)
    return max(0, min(int(np.floor(12.0 * (n / 100.0) ** 0.25)), n // 2 - 2))


def augmented_dickey_fuller(x: np.ndarray) -> Dict[str, float]:
    undefined = {a: NAN for a in ADF_ATTRS}
    if len(x) < ADF_MIN_LENGTH or np.ptp(x) == 0:
        return undefined
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", InterpolationWarning)
            teststat, pvalue, usedlag, *_ = adfuller(x, maxlag=adf_maxlag(len(x)),
                                                     regression="c", autolag="AIC")
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.debug(f"ADF undefined for series of length {len(x)}: {e}")
        return undefined
    return {"teststat": float(teststat), "pvalue": float(pvalue), "usedlag": float(usedlag)}


def model_fits(x: Sequence[float]) -> Dict[str, float]:
    x = as_series(x)
    out = {}
    for attr, v in linear_trend(x).items():
        out[feature_suffix("linear_trend", attr)] = v
    ar = ar_coefficients(x)
    for c in AR_COEFFS:
        out[feature_suffix("ar_coefficient", c)] = ar[c]
    drift = friedrich_coefficients(x)
    for c in FRIEDRICH_COEFFS:
        out[feature_suffix("friedrich_coefficients", c)] = drift[c]
    for attr, v in augmented_dickey_fuller(x).items():
        out[feature_suffix("augmented_dickey_fuller", attr)] = v
    return out
