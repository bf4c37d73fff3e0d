# loader/validation.py
from typing import Dict, List
from dataclasses import dataclass, field
import logging

import numpy as np

from .dataset import Dataset

# Shortest series for which each length-sensitive feature is defined
MIN_LENGTHS: Dict[str, int] = {
    'skewness': 3,
    'kurtosis': 4,
    'sample_entropy': 4,
    'ar_coefficient': 12,
    'augmented_dickey_fuller': 15,
    'friedrich_coefficients': 31,
}


@dataclass
class ValidationResult:
    """Container for validation results."""
    is_valid: bool = True
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def add_error(self, error: str):
        self.errors.append(error)
        self.is_valid = False

    def add_warning(self, warning: str):
        self.warnings.append(warning)


class DatasetValidator:
    """Completeness and regularity checks on an assembled dataset.

    Nothing here blocks extraction: gaps and short series are zero-filled
    downstream, so every finding is a warning.
    """

    def __init__(self):
        self.logger = logging.getLogger('jobclust.ingest.validation')

    def validate(self, dataset: Dataset) -> ValidationResult:
        result = ValidationResult()
        if not dataset.series_index:
            result.add_error("Dataset contains no series")
            return result

        self._check_coverage(dataset, result)
        self._check_lengths(dataset, result)
        self._check_sampling(dataset, result)
        self.logger.debug(f"Dataset validation: {len(result.errors)} errors, {len(result.warnings)} warnings")
        return result

    def _check_coverage(self, dataset: Dataset, result: ValidationResult):
        expected = len(dataset.jobs) * len(dataset.nodes) * len(dataset.kpis)
        missing = expected - len(dataset)
        if missing:
            result.add_warning(
                f"{missing} of {expected} (job, node, kpi) series absent; their features are imputed with 0"
            )

    def _check_lengths(self, dataset: Dataset, result: ValidationResult):
        lengths = np.array([len(s) for s in dataset.series_index.values()])
        for feature, minimum in MIN_LENGTHS.items():
            short = int((lengths < minimum).sum())
            if short:
                result.add_warning(f"{short} series shorter than {minimum} samples; {feature} undefined there")

    def _check_sampling(self, dataset: Dataset, result: ValidationResult):
        irregular = 0
        for s in dataset.series_index.values():
            if len(s) > 2:
                steps = np.diff(s.timestamps)
                if steps.min() != steps.max():
                    irregular += 1
        if irregular:
            result.add_warning(f"{irregular} series have irregular sampling intervals; features use sample order")
