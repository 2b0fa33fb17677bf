# nabasin/core/config.py
import os
import json
from dataclasses import dataclass, field
from typing import List
from dotenv import load_dotenv

# Load .env into process environment early
load_dotenv()


def _get(name: str, default: str | None = None) -> str | None:
    v = os.getenv(name)
    return v if v is not None else default


def _get_list(name: str, default_list: List[str]) -> List[str]:
    raw = os.getenv(name)
    if raw is None:
        return list(default_list)
    s = raw.strip()
    # Try JSON first
    if s.startswith("[") and s.endswith("]"):
        try:
            parsed = json.loads(s)
            if isinstance(parsed, list):
                return [str(x) for x in parsed]
        except Exception:
            pass
    # Fallback to CSV
    return [x.strip() for x in s.split(",") if x.strip()]


def _get_int(name: str, default: int) -> int:
    try:
        return int(float(_get(name, str(default)) or default))
    except Exception:
        return default


def _get_float(name: str, default: float) -> float:
    try:
        return float(_get(name, str(default)) or default)
    except Exception:
        return default


@dataclass(frozen=True)
class Settings:
    THREADS: int = 1
    TOL: float = 1e-9
    HORIZON: int = 32
    MAXITER: int = 200
    R_CAP_EXP: int = 40
    ZERO_TOL: float = 1e-14
    OVERFLOW: float = 1e100
    OUT_DIR: str = "out"
    LOG_LEVEL: str = "INFO"
    SUITE_CHECKS: List[str] = field(default_factory=list)  # empty = all


def get_settings() -> Settings:
    threads = _get_int("NABASIN_THREADS", os.cpu_count() or 1)
    return Settings(
        THREADS=max(1, threads),
        TOL=_get_float("NABASIN_TOL", 1e-9),
        HORIZON=max(1, _get_int("NABASIN_HORIZON", 32)),
        MAXITER=max(0, _get_int("NABASIN_MAXITER", 200)),
        R_CAP_EXP=max(1, _get_int("NABASIN_R_CAP_EXP", 40)),
        ZERO_TOL=_get_float("NABASIN_ZERO_TOL", 1e-14),
        OVERFLOW=_get_float("NABASIN_OVERFLOW", 1e100),
        OUT_DIR=(_get("NABASIN_OUT_DIR", "out") or "out").strip(),
        LOG_LEVEL=(_get("NABASIN_LOG_LEVEL", "INFO") or "INFO").strip().upper(),
        SUITE_CHECKS=_get_list("NABASIN_SUITE_CHECKS", []),
    )
