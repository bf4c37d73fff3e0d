# selection/scaling.py - Column-wise min-max scaling into [0, 1]
from __future__ import annotations
import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from features.matrix import FeatureMatrix
from loader.errors import PreconditionError

logger = logging.getLogger('jobclust.select.scaling')


def min_max_scale(m: FeatureMatrix) -> FeatureMatrix:
    """Map each column through (v - min) / (max - min); constant columns become 0."""
    if m.scaled:
        raise PreconditionError("Feature matrix is already scaled")

    cells = m.cells
    lo = cells.min(axis=0) if cells.size else np.zeros(cells.shape[1])
    hi = cells.max(axis=0) if cells.size else np.zeros(cells.shape[1])
    span = hi - lo
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    scaled = (cells - lo) / safe_span
    scaled[:, constant] = 0.0
    # guard the closed interval against rounding in the division
    np.clip(scaled, 0.0, 1.0, out=scaled)

    if constant.any():
        logger.info(f"{int(constant.sum())} constant columns scaled to 0")

    ranges = pd.DataFrame({"min": lo, "max": hi}, index=m.frame.columns)
    frame = pd.DataFrame(scaled, index=m.frame.index, columns=m.frame.columns)
    return replace(m, frame=frame, scaled=True, scale_ranges=ranges, imputations=[])
