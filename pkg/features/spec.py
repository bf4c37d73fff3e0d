# features/spec.py - Feature set definitions, parameter expansion and column labels
from __future__ import annotations
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loader.errors import UnknownFeature

logger = logging.getLogger('jobclust.features.spec')

FEATURE_SETS_PATH = Path(__file__).resolve().parent.parent / "config" / "feature_sets.json"

Param = Union[int, float, str]

# Parameter keyword used in the column suffix, per parameterized feature
PARAM_KEYS: Dict[str, str] = {
    "quantile": "q",
    "index_mass_quantile": "q",
    "autocorrelation": "lag",
    "c3": "lag",
    "time_reversal_asymmetry_statistic": "lag",
    "number_peaks": "n",
    "linear_trend": "attr",
    "augmented_dickey_fuller": "attr",
    "ar_coefficient": "coeff",
    "friedrich_coefficients": "coeff",
    "spkt_welch_density": "coeff",
    "fft_aggregated": "aggtype",
}


def format_param(value: Param) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def feature_suffix(name: str, param: Optional[Param] = None) -> str:
    """`name` or `name__<key>_<value>` for parameterized features."""
    if param is None:
        return name
    return f"{name}__{PARAM_KEYS[name]}_{format_param(param)}"


def suffix_from_token(name: str, token: str) -> str:
    return f"{name}__{token}" if token else name


def column_label(node: str, kpi: str, suffix: str) -> str:
    return f"{node}_{kpi}_{suffix}"


@dataclass(frozen=True)
class FeatureSpec:
    """One feature and its ordered parameter settings."""
    name: str
    params: Tuple[Param, ...] = ()

    def suffixes(self) -> List[str]:
        if not self.params:
            return [feature_suffix(self.name)]
        return [feature_suffix(self.name, p) for p in self.params]

    def pairs(self) -> List[Tuple[str, str]]:
        """(feature, param token) pairs; the token is '' for parameterless features."""
        if not self.params:
            return [(self.name, "")]
        return [(self.name, f"{PARAM_KEYS[self.name]}_{format_param(p)}") for p in self.params]


@lru_cache(maxsize=1)
def _load_sets() -> Dict[str, Tuple[FeatureSpec, ...]]:
    with open(FEATURE_SETS_PATH, "r", encoding="utf-8") as f:
        raw = json.load(f)
    return {
        name: tuple(FeatureSpec(e["name"], tuple(e["params"])) for e in entries)
        for name, entries in raw.items()
    }


def full_feature_set() -> Tuple[FeatureSpec, ...]:
    return _load_sets()["full"]


def get_feature_set(name: str) -> Tuple[FeatureSpec, ...]:
    sets = _load_sets()
    if name not in sets:
        raise UnknownFeature(f"Unknown feature set: {name}")
    return sets[name]


def validate_spec(spec: Sequence[FeatureSpec]) -> None:
    """Every entry must be a known feature carrying exactly its reference parameters."""
    reference = {f.name: f.params for f in full_feature_set()}
    seen = set()
    for f in spec:
        if f.name not in reference:
            raise UnknownFeature(f"Unknown feature: {f.name}")
        if tuple(f.params) != reference[f.name]:
            raise ValueError(f"Parameters for {f.name} must be {list(reference[f.name])}, got {list(f.params)}")
        if f.name in seen:
            raise ValueError(f"Duplicate feature in spec: {f.name}")
        seen.add(f.name)


def expand(spec: Sequence[FeatureSpec]) -> List[Tuple[str, str, str]]:
    """Ordered (feature, param token, suffix) triples: features by name, params by token."""
    out = []
    for f in sorted(spec, key=lambda s: s.name):
        for (name, token), suffix in sorted(zip(f.pairs(), f.suffixes())):
            out.append((name, token, suffix))
    return out


def literature_preset_pairs() -> List[Tuple[str, str]]:
    """Preset (feature, param token) pairs that exist in the full feature set."""
    universe = {pair for f in full_feature_set() for pair in f.pairs()}
    pairs = []
    for f in get_feature_set("literature_preset"):
        for pair in f.pairs():
            if pair in universe:
                pairs.append(pair)
            else:
                logger.debug(f"Preset entry {pair} has no column in the full set; skipped")
    return pairs
