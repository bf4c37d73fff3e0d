# features/spectral.py - FFT moment and Welch density features
from __future__ import annotations
from typing import Dict, Sequence

import numpy as np
from scipy.signal import welch

from .extractors import NAN, as_series
from .spec import feature_suffix

FFT_AGGTYPES = ("centroid", "variance", "skew", "kurtosis")
WELCH_COEFFS = (2, 5, 8)
WELCH_MAX_SEGMENT = 256


def fft_aggregated(x: np.ndarray) -> Dict[str, float]:
    """Moments of the one-sided magnitude spectrum taken as a distribution over bin index."""
    out = {a: NAN for a in FFT_AGGTYPES}
    if len(x) < 2:
        return out
    spectrum = np.abs(np.fft.rfft(x))
    total = spectrum.sum()
    if total == 0:
        return out

    p = spectrum / total
    bins = np.arange(len(spectrum), dtype=np.float64)
    centroid = float(bins @ p)
    dev = bins - centroid
    variance = float((dev ** 2) @ p)
    out["centroid"] = centroid
    out["variance"] = variance
    # a single occupied bin (up to leakage noise) has no shape
    if variance > 1e-12 * max(1.0, centroid * centroid):
        out["skew"] = float((dev ** 3) @ p / variance ** 1.5)
        out["kurtosis"] = float((dev ** 4) @ p / variance ** 2)
    return out


def welch_density(x: np.ndarray, coeffs: Sequence[int] = WELCH_COEFFS) -> Dict[int, float]:
    nperseg = min(WELCH_MAX_SEGMENT, len(x))
    _, pxx = welch(x, fs=1.0, window="hann", nperseg=nperseg, noverlap=nperseg // 2,
                   detrend="constant", scaling="density", average="mean")
    return {c: float(pxx[c]) if c < len(pxx) else NAN for c in coeffs}


def spectral_stats(x: Sequence[float], coeffs: Sequence[int] = WELCH_COEFFS) -> Dict[str, float]:
    x = as_series(x)
    out = {feature_suffix("fft_aggregated", a): v for a, v in fft_aggregated(x).items()}
    if len(x) < 2:
        density = {c: NAN for c in coeffs}
    else:
        density = welch_density(x, coeffs)
    for c, v in density.items():
        out[feature_suffix("spkt_welch_density", c)] = v
    return out
