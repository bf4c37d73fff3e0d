# loader/config.py - IO tuning for input readers and stage-file handoff
import os
from dataclasses import dataclass


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value) if value and value.strip().isdigit() else default


@dataclass(frozen=True)
class IOSettings:
    """Reader parallelism and retry policy for files on shared filesystems."""
    reader_threads: int = _env_int("JOBCLUST_READER_THREADS", 4)
    retry_attempts: int = _env_int("JOBCLUST_RETRY_ATTEMPTS", 3)
    retry_backoff_ms: int = _env_int("JOBCLUST_RETRY_BACKOFF_MS", 200)


IO = IOSettings()
