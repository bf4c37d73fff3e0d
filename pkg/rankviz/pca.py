# rankviz/pca.py - One-component PCA of a jobs x nodes feature matrix
from __future__ import annotations
import logging
import warnings
from typing import Tuple

import numpy as np

from loader.errors import DegenerateMatrixWarning, TooFewRows

logger = logging.getLogger('jobclust.rankviz.pca')


def principal_direction(centered: np.ndarray) -> Tuple[np.ndarray, float]:
    """Dominant covariance eigenvector, signed so its largest-magnitude loading is positive."""
    cov = np.atleast_2d(np.cov(centered, rowvar=False, ddof=1))
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    direction = eigenvectors[:, -1]
    if direction[np.argmax(np.abs(direction))] < 0:
        direction = -direction
    return direction, float(eigenvalues[-1])


def pca_one_component(M) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.shape[0] < 2:
        raise TooFewRows(f"PCA needs at least 2 jobs, got {M.shape[0]}")

    centered = M - M.mean(axis=0)
    if np.all(np.ptp(M, axis=0) == 0):
        msg = f"All {M.shape[0]} rows identical; principal component scores set to 0"
        logger.warning(msg)
        warnings.warn(msg, DegenerateMatrixWarning, stacklevel=2)
        return np.zeros(M.shape[0])

    direction, _ = principal_direction(centered)
    return centered @ direction
