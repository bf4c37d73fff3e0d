# config.py - Centralized pipeline configuration
import logging
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from loader.errors import ConfigError, InvalidConfig

# Load environment variables from .env file
load_dotenv()

ENV_PREFIX = "JOBCLUST_"

DEFAULTS: Dict[str, str] = {
    "inputs": "",
    "input_format": "auto",
    "kpis": "",
    "feature_set": "full",
    "selection_mode": "auto",
    "p": "0.85",
    "compare_p": "",
    "experiment": "all_kpi",
    "kmin": "2",
    "kmax": "30",
    "seed": "0",
    "out_dir": "out",
    "top_n": "3",
    "workers": "1",
    "log_dir": "logs",
    "log_level": "INFO",
    "ground_truth": "",
}

INPUT_FORMATS = ("auto", "csv", "jsonl")
SELECTION_MODES = ("auto", "variance", "preset")
EXPERIMENTS = ("per_kpi", "all_kpi")
FEATURE_SETS = ("full",)
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

_KEY_LINE = re.compile(r"^\s*(?:export\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=")

Origin = Tuple[Optional[str], Optional[int]]   # (file path, line) for file-supplied keys


def _split(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


@dataclass
class PipelineConfig:
    """Resolved settings for one pipeline run."""
    inputs: List[Path] = field(default_factory=list)
    input_format: str = "auto"
    kpis: List[str] = field(default_factory=list)
    feature_set: str = "full"
    selection_mode: str = "auto"
    p: float = 0.85
    compare_p: List[float] = field(default_factory=list)
    experiment: str = "all_kpi"
    kmin: int = 2
    kmax: int = 30
    seed: int = 0
    out_dir: Path = Path("out")
    top_n: int = 3
    workers: int = 1
    log_dir: Path = Path("logs")
    log_level: str = "INFO"
    ground_truth: Optional[Path] = None
    source: Optional[Path] = None
    origins: Dict[str, Origin] = field(default_factory=dict, repr=False, compare=False)

    @property
    def resolved_selection_mode(self) -> str:
        """per_kpi pairs with the preset, all_kpi with the variance threshold, unless set."""
        if self.selection_mode != "auto":
            return self.selection_mode
        return "preset" if self.experiment == "per_kpi" else "variance"

    @property
    def format_or_none(self) -> Optional[str]:
        return None if self.input_format == "auto" else self.input_format

    def to_dict(self) -> Dict:
        data = asdict(self)
        data.pop("origins")
        data["inputs"] = [str(p) for p in self.inputs]
        data["out_dir"] = str(self.out_dir)
        data["log_dir"] = str(self.log_dir)
        data["ground_truth"] = str(self.ground_truth) if self.ground_truth else None
        data["source"] = str(self.source) if self.source else None
        data["resolved_selection_mode"] = self.resolved_selection_mode
        return data

    def validate_inputs(self) -> bool:
        """Every input file (and the ground-truth file, if any) must exist."""
        errors = []
        if not self.inputs:
            errors.append(("no input files configured", *self.origins.get("inputs", (None, None))))
        for p in self.inputs:
            if not p.exists():
                errors.append((f"input file does not exist: {p}", *self.origins.get("inputs", (None, None))))
        if self.ground_truth is not None and not self.ground_truth.exists():
            errors.append((f"ground truth file does not exist: {self.ground_truth}",
                           *self.origins.get("ground_truth", (None, None))))
        _raise(errors)
        return True


def _raise(errors: List[Tuple[str, Optional[str], Optional[int]]]) -> None:
    if not errors:
        return
    if len(errors) == 1:
        raise ConfigError(*errors[0])
    lines = [str(ConfigError(msg, path, line)) for msg, path, line in errors]
    raise InvalidConfig("Configuration validation failed:\n" + "\n".join(f"- {e}" for e in lines))


def read_config_file(path: Path) -> Tuple[Dict[str, str], Dict[str, int], List[Tuple[str, Optional[str], Optional[int]]]]:
    """Values, key -> line map and syntax errors of one key=value file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("configuration file not found", str(path))

    errors = []
    lines: Dict[str, int] = {}
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            match = _KEY_LINE.match(text)
            if not match:
                errors.append(("expected key=value", str(path), number))
                continue
            key = match.group(1)
            if key not in DEFAULTS:
                errors.append((f"unknown key '{key}'", str(path), number))
                continue
            if key in lines:
                errors.append((f"duplicate key '{key}' (first set on line {lines[key]})", str(path), number))
            lines[key] = number

    values = {k: (v or "") for k, v in dotenv_values(path).items() if k in lines}
    return values, lines, errors


def load_config(path: Optional[Path] = None, overrides: Optional[Mapping[str, object]] = None,
                environ: Optional[Mapping[str, str]] = None) -> PipelineConfig:
    """Defaults < file < JOBCLUST_<KEY> environment < overrides; collects every error before raising."""
    environ = os.environ if environ is None else environ
    raw: Dict[str, str] = dict(DEFAULTS)
    origins: Dict[str, Origin] = {}
    errors: List[Tuple[str, Optional[str], Optional[int]]] = []

    if path is not None:
        values, lines, syntax = read_config_file(path)
        errors.extend(syntax)
        for key, value in values.items():
            raw[key] = value
            origins[key] = (str(path), lines[key])

    for key in DEFAULTS:
        env_value = environ.get(ENV_PREFIX + key.upper())
        if env_value is not None:
            raw[key] = env_value
            origins[key] = (f"${ENV_PREFIX}{key.upper()}", None)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in DEFAULTS:
            raise InvalidConfig(f"Unknown configuration override: {key}")
        raw[key] = ",".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
        origins[key] = (f"--{key.replace('_', '-')}", None)

    cfg = PipelineConfig(source=Path(path) if path else None, origins=origins)

    def fail(key: str, message: str) -> None:
        where, line = origins.get(key, (None, None))
        errors.append((f"{key}: {message}", where, line))

    def parse(key: str, kind, check=None, message: str = ""):
        text = raw[key].strip()
        try:
            value = kind(text)
        except ValueError:
            fail(key, f"invalid {kind.__name__} value '{text}'")
            return None
        if check is not None and not check(value):
            fail(key, message or f"invalid value '{text}'")
            return None
        return value

    def choice(key: str, options: Tuple[str, ...], normalize=str.lower) -> Optional[str]:
        text = normalize(raw[key].strip())
        if text not in options:
            fail(key, f"must be one of {', '.join(options)}, got '{raw[key].strip()}'")
            return None
        return text

    cfg.inputs = [Path(p) for p in _split(raw["inputs"])]
    cfg.kpis = _split(raw["kpis"])
    cfg.input_format = choice("input_format", INPUT_FORMATS) or cfg.input_format
    cfg.feature_set = choice("feature_set", FEATURE_SETS) or cfg.feature_set
    cfg.selection_mode = choice("selection_mode", SELECTION_MODES) or cfg.selection_mode
    cfg.experiment = choice("experiment", EXPERIMENTS) or cfg.experiment
    cfg.log_level = choice("log_level", LOG_LEVELS, normalize=str.upper) or cfg.log_level

    in_unit = lambda v: 0.0 < v < 1.0  # noqa: E731
    p = parse("p", float, in_unit, "must lie strictly between 0 and 1")
    cfg.p = p if p is not None else cfg.p
    compare = []
    for item in _split(raw["compare_p"]):
        try:
            value = float(item)
        except ValueError:
            fail("compare_p", f"invalid float value '{item}'")
            continue
        if not in_unit(value):
            fail("compare_p", f"{item} must lie strictly between 0 and 1")
            continue
        compare.append(value)
    cfg.compare_p = compare

    kmin = parse("kmin", int, lambda v: v >= 2, "must be at least 2")
    kmax = parse("kmax", int, lambda v: v >= 2, "must be at least 2")
    if kmin is not None and kmax is not None and kmax < kmin:
        fail("kmax", f"must not be below kmin ({kmin})")
    cfg.kmin = kmin if kmin is not None else cfg.kmin
    cfg.kmax = kmax if kmax is not None else cfg.kmax
    seed = parse("seed", int, lambda v: v >= 0, "must be a non-negative integer")
    cfg.seed = seed if seed is not None else cfg.seed
    top_n = parse("top_n", int, lambda v: v >= 1, "must be at least 1")
    cfg.top_n = top_n if top_n is not None else cfg.top_n
    workers = parse("workers", int, lambda v: v >= 1, "must be at least 1")
    cfg.workers = workers if workers is not None else cfg.workers

    out_dir = raw["out_dir"].strip()
    if not out_dir:
        fail("out_dir", "must not be empty")
    cfg.out_dir = Path(out_dir or DEFAULTS["out_dir"])
    cfg.log_dir = Path(raw["log_dir"].strip() or DEFAULTS["log_dir"])
    cfg.ground_truth = Path(raw["ground_truth"].strip()) if raw["ground_truth"].strip() else None

    # file syntax problems first, in line order
    errors.sort(key=lambda e: (e[2] is None, e[1] or "", e[2] or 0))
    _raise(errors)
    logging.getLogger('jobclust.pipeline.config').debug(f"Resolved configuration: {cfg.to_dict()}")
    return cfg
