# features/extractors.py - Statistical, change, location, reoccurrence and nonlinearity features
"""
Per-series feature calculators.

Every calculator takes a 1-D real sequence and returns a dict keyed by column
suffix (see features.spec.feature_suffix). Undefined values come back as NaN;
the matrix builder applies the imputation policy.
"""
from __future__ import annotations
from typing import Dict, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import stats
from scipy.spatial.distance import pdist

from .spec import feature_suffix

QUANTILES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
PEAK_SUPPORTS = (5, 10, 15, 20, 30, 35, 40, 50, 100)
C3_LAGS = (1, 2, 3)
TREV_LAGS = (1, 2, 3)
AUTOCORR_LAGS = (1, 2, 3, 4, 5, 6, 7, 8)
ENTROPY_BINS = 10
SAMPEN_M = 2
SAMPEN_R = 0.2

NAN = float("nan")


def as_series(x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("feature calculators need a non-empty 1-D sequence")
    return arr


def _is_constant(x: np.ndarray) -> bool:
    return bool(np.ptp(x) == 0)


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return int((ends - starts).max())


# ---------------------------------------------------------------- basic
def skewness(x: np.ndarray) -> float:
    """Adjusted Fisher-Pearson G1."""
    if len(x) < 3 or _is_constant(x):
        return NAN
    return float(stats.skew(x, bias=False))


def kurtosis(x: np.ndarray) -> float:
    """Adjusted excess kurtosis G2."""
    if len(x) < 4 or _is_constant(x):
        return NAN
    return float(stats.kurtosis(x, fisher=True, bias=False))


def basic_stats(x: Sequence[float], quantiles: Sequence[float] = QUANTILES) -> Dict[str, float]:
    x = as_series(x)
    out = {
        "length": float(len(x)),
        "mean": float(np.mean(x)),
        "median": float(np.median(x)),
        "minimum": float(np.min(x)),
        "maximum": float(np.max(x)),
        "standard_deviation": float(np.std(x)),
        "variance": float(np.var(x)),
        "abs_energy": float(np.dot(x, x)),
        "skewness": skewness(x),
        "kurtosis": kurtosis(x),
    }
    values = np.quantile(x, quantiles, method="linear")
    for q, v in zip(quantiles, values):
        out[feature_suffix("quantile", q)] = float(v)
    return out


# ---------------------------------------------------------------- changes
def change_stats(x: Sequence[float]) -> Dict[str, float]:
    x = as_series(x)
    n = len(x)
    if n < 2:
        return {"absolute_sum_of_changes": NAN, "mean_abs_change": NAN,
                "mean_change": NAN, "mean_second_derivative_central": NAN}

    abs_sum = float(np.sum(np.abs(np.diff(x))))
    out = {
        "absolute_sum_of_changes": abs_sum,
        "mean_abs_change": abs_sum / (n - 1),
        "mean_change": float((x[-1] - x[0]) / (n - 1)),
    }
    # mean of (x[i+2] - 2x[i+1] + x[i]) / 2 telescopes to the end terms
    if n < 3:
        out["mean_second_derivative_central"] = NAN
    else:
        out["mean_second_derivative_central"] = float((x[-1] - x[-2] - x[1] + x[0]) / (2 * (n - 2)))
    return out


# ---------------------------------------------------------------- locations
def index_mass_quantile(x: np.ndarray, q: float) -> float:
    abs_x = np.abs(x)
    total = abs_x.sum()
    if total == 0:
        return NAN
    mass = np.cumsum(abs_x) / total
    return float((np.argmax(mass >= q) + 1) / len(x))


def number_peaks(x: np.ndarray, support: int) -> int:
    """Count x[i] strictly above its `support` neighbours on both sides."""
    width = 2 * support + 1
    if len(x) < width:
        return 0
    windows = sliding_window_view(x, width)
    centre = windows[:, support][:, None]
    neighbours = np.delete(windows, support, axis=1)
    return int(np.all(centre > neighbours, axis=1).sum())


def location_stats(x: Sequence[float],
                   peak_supports: Sequence[int] = PEAK_SUPPORTS,
                   mass_quantiles: Sequence[float] = QUANTILES) -> Dict[str, float]:
    x = as_series(x)
    n = len(x)
    mu = np.mean(x)
    above = x > mu
    below = x < mu
    out = {
        "first_location_of_maximum": float(np.argmax(x) / n),
        "first_location_of_minimum": float(np.argmin(x) / n),
        "count_above_mean": float(above.sum()),
        "count_below_mean": float(below.sum()),
        "longest_strike_above_mean": float(_longest_run(above)),
        "longest_strike_below_mean": float(_longest_run(below)),
    }
    for q in mass_quantiles:
        out[feature_suffix("index_mass_quantile", q)] = index_mass_quantile(x, q)
    for s in peak_supports:
        out[feature_suffix("number_peaks", s)] = float(number_peaks(x, s))
    return out


# ---------------------------------------------------------------- reoccurrence
def binned_entropy(x: np.ndarray, bins: int = ENTROPY_BINS) -> float:
    if _is_constant(x):
        return 0.0
    hist, _ = np.histogram(x, bins=bins)
    probs = hist[hist > 0] / len(x)
    return float(-np.sum(probs * np.log(probs)))


def reoccurrence_stats(x: Sequence[float], bins: int = ENTROPY_BINS) -> Dict[str, float]:
    x = as_series(x)
    _, counts = np.unique(x, return_counts=True)
    repeated = counts > 1
    return {
        "percentage_of_reoccurring_values_to_all_values": float(repeated.sum() / len(counts)),
        "percentage_of_reoccurring_datapoints_to_all_datapoints": float(counts[repeated].sum() / len(x)),
        "binned_entropy": binned_entropy(x, bins),
    }


# ---------------------------------------------------------------- nonlinearity
def c3(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if n <= 2 * lag:
        return NAN
    return float(np.mean(x[2 * lag:] * x[lag:n - lag] * x[:n - 2 * lag]))


def time_reversal_asymmetry_statistic(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if n <= 2 * lag:
        return NAN
    one, two, three = x[:n - 2 * lag], x[lag:n - lag], x[2 * lag:]
    return float(np.mean(three * three * two - two * one * one))


def autocorrelation(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if n <= lag or _is_constant(x):
        return NAN
    mu = np.mean(x)
    var = np.var(x)
    if var == 0:
        return NAN
    return float(np.sum((x[:n - lag] - mu) * (x[lag:] - mu)) / ((n - lag) * var))


def sample_entropy(x: np.ndarray, m: int = SAMPEN_M, r: float = SAMPEN_R) -> float:
    """-ln(A/B) with Chebyshev template matching; self-matches excluded."""
    tolerance = r * np.std(x)
    if tolerance == 0 or len(x) < m + 2:
        return NAN
    # pdist counts each unordered pair once; ordered matches are twice that
    b = 2 * np.count_nonzero(pdist(sliding_window_view(x, m), "chebyshev") <= tolerance)
    a = 2 * np.count_nonzero(pdist(sliding_window_view(x, m + 1), "chebyshev") <= tolerance)
    if a == 0 or b == 0:
        return NAN
    return float(-np.log(a / b))


def nonlinearity_stats(x: Sequence[float],
                       lags_c3: Sequence[int] = C3_LAGS,
                       lags_trev: Sequence[int] = TREV_LAGS,
                       lags_ac: Sequence[int] = AUTOCORR_LAGS) -> Dict[str, float]:
    x = as_series(x)
    out = {}
    for lag in lags_c3:
        out[feature_suffix("c3", lag)] = c3(x, lag)
    for lag in lags_trev:
        out[feature_suffix("time_reversal_asymmetry_statistic", lag)] = time_reversal_asymmetry_statistic(x, lag)
    for lag in lags_ac:
        out[feature_suffix("autocorrelation", lag)] = autocorrelation(x, lag)
    out["sample_entropy"] = sample_entropy(x)
    return out
