from __future__ import annotations
import math
import re
from pathlib import Path
from typing import Any

from loader.errors import InvalidEncoding


class KpiPreprocessor:
    """Shared helpers: encoding, identifiers, timestamps, values."""

    IDENTIFIER_RE = re.compile(r'^[A-Za-z0-9_.\-]+$')
    NON_FINITE_TOKENS = {'nan', '+nan', '-nan', 'inf', '+inf', '-inf', 'infinity', '+infinity', '-infinity'}

    # ---------- encoding ----------
    @staticmethod
    def read_text(path: Path) -> str:
        raw = Path(path).read_bytes()
        try:
            return raw.decode('utf-8-sig')
        except UnicodeDecodeError as e:
            line = raw[:e.start].count(b"\n") + 1
            raise InvalidEncoding(str(path), line, e.reason) from e

    # ---------- identifiers ----------
    @classmethod
    def normalize_identifier(cls, val: Any) -> str:
        if isinstance(val, bool) or val is None:
            raise ValueError(f"invalid identifier {val!r}")
        if isinstance(val, int):
            val = str(val)
        if not isinstance(val, str):
            raise ValueError(f"invalid identifier {val!r}")
        val = val.strip()
        if not cls.IDENTIFIER_RE.match(val):
            raise ValueError(f"invalid identifier {val!r}")
        return val

    # ---------- timestamps ----------
    @staticmethod
    def parse_timestamp(val: Any) -> int:
        if isinstance(val, bool):
            raise ValueError(f"invalid timestamp {val!r}")
        if isinstance(val, int):
            ts = val
        elif isinstance(val, float) and val.is_integer():
            ts = int(val)
        elif isinstance(val, str):
            ts = int(val.strip())
        else:
            raise ValueError(f"invalid timestamp {val!r}")
        if ts < 0:
            raise ValueError(f"negative timestamp {ts}")
        return ts

    # ---------- values ----------
    @classmethod
    def is_non_finite_token(cls, val: Any) -> bool:
        if isinstance(val, str):
            return val.strip().lower() in cls.NON_FINITE_TOKENS
        if isinstance(val, float):
            return not math.isfinite(val)
        return False

    @staticmethod
    def parse_value(val: Any) -> float:
        """Parse a numeric KPI value; finiteness is checked by the caller."""
        if isinstance(val, bool) or val is None:
            raise ValueError(f"invalid value {val!r}")
        if isinstance(val, (int, float)):
            return float(val)
        if isinstance(val, str):
            return float(val.strip())
        raise ValueError(f"invalid value {val!r}")

    @staticmethod
    def format_value(val: float) -> str:
        # repr gives the shortest string that round-trips
        return repr(float(val))
