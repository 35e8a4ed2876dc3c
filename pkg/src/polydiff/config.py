"""Run configuration: compiled-in defaults, a flat key=value file, then command-line overrides."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # resource caps
    max_N: int = 10**7
    max_q: int = 400
    sieve_bound: int = 10**8
    max_terms: int = 50_000_000
    # iteration constants (desk-scale stand-ins for the asymptotic choices)
    c0: float = 0.5
    c1: float = 0.0  # 0 means: derive from the measured moment
    eps: float = 0.1
    Q_max: int = 12
    n_min: int = 48
    max_steps: int = 25
    c_len: float = 0.25
    refine: int = 4
    # bookkeeping
    output_dir: str = "out"
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        for name in ("max_N", "max_q", "sieve_bound", "max_terms", "Q_max", "n_min", "max_steps",
                     "refine", "threads"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("c0", "eps", "c_len"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.c1 < 0:
            raise ConfigError("c1 must be >= 0")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def updated(self, pairs: dict[str, str]) -> "RunConfig":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        types = {f.name: type(getattr(self, f.name)) for f in fields(self)}
        for k, v in pairs.items():
            if k not in kw:
                raise ConfigError(f"unknown config key {k!r}")
            try:
                kw[k] = _convert(types[k], v)
            except ValueError as exc:
                raise ConfigError(f"bad value for {k}: {v!r}") from exc
        return RunConfig(**kw)

    def canonical(self) -> str:
        """Sorted key=value lines; output_dir and threads are excluded since they do not change results."""
        skip = {"output_dir", "threads"}
        return "\n".join(f"{k}={getattr(self, k)!r}" for k in sorted(self.keys()) if k not in skip) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in self.keys()}


def _convert(tp, v: str):
    if tp is int:
        return int(float(v)) if "e" in v.lower() else int(v)
    if tp is float:
        return float(v)
    return str(v)


def parse_pairs(text: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def load_config(path=None, overrides: dict[str, str] | None = None) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        cfg = cfg.updated(parse_pairs(Path(path).read_text()))
    if overrides:
        cfg = cfg.updated(overrides)
    return cfg
