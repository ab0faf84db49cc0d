"""Numerical policy for integration and plane scans, plus the key-value config format."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any, Mapping


class ConfigError(ValueError):
    """Invalid or unparsable configuration."""


@dataclass(frozen=True)
class ScanConfig:
    """Every tolerance, cap and resolution used by the integrator and scanner.

    ``jobs`` only controls the size of the worker pool; it does not enter the
    fingerprint because it cannot change any result.
    """

    x_max: float = 6.0
    rtol: float = 1e-12
    atol: float = 1e-12
    beta_floor: float = 1e-8
    blowup_cap: float = 1e6
    step_floor: float = 1e-12
    max_step: float = 0.05
    start_offset: float = 1e-4
    beta_min: float = -1.1
    beta_max: float = 1.1
    dbeta_min: float = -4.0
    dbeta_max: float = 1.0
    n_beta: int = 45
    n_dbeta: int = 60
    bisect_tol: float = 1e-4
    jobs: int | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        for name in ("x_max", "rtol", "atol", "beta_floor", "blowup_cap",
                     "step_floor", "max_step", "start_offset", "bisect_tol"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value!r}")
        if self.n_beta < 1 or self.n_dbeta < 1:
            raise ConfigError("grid dimensions must be at least 1")
        if not self.beta_min < self.beta_max:
            raise ConfigError("beta window is degenerate")
        if not self.dbeta_min < self.dbeta_max:
            raise ConfigError("dbeta window is degenerate")
        if self.jobs is not None and self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def replace(self, **changes: Any) -> "ScanConfig":
        return dataclasses.replace(self, **changes)

    def numeric_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d.pop("jobs")
        return d

    def fingerprint(self) -> str:
        return fingerprint(self.numeric_dict())

    @property
    def workers(self) -> int:
        return self.jobs or os.cpu_count() or 1

    @classmethod
    def from_mapping(cls, values: Mapping[str, Any]) -> "ScanConfig":
        """Build from string or typed values; unknown keys are ignored."""
        kwargs: dict[str, Any] = {}
        for f in dataclasses.fields(cls):
            if f.name not in values or values[f.name] is None:
                continue
            raw = values[f.name]
            try:
                if f.name in ("n_beta", "n_dbeta", "jobs"):
                    kwargs[f.name] = int(raw)
                else:
                    kwargs[f.name] = float(raw)
            except (TypeError, ValueError):
                raise ConfigError(f"{f.name}: cannot parse {raw!r}") from None
        return cls(**kwargs)


# ScanConfig field names (jobs excluded: it never changes results)
SCAN_KEYS = tuple(f.name for f in dataclasses.fields(ScanConfig))


def fingerprint(payload: Mapping[str, Any]) -> str:
    """Short SHA-256 of the canonical JSON form of ``payload``."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_kv(path: str | os.PathLike) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_kv(fh.read(), source=str(path))
