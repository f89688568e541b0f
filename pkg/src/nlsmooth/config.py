"""Experiment configuration: TOML files, flag overrides, stable hashing.

A config is a plain nested dict with one table per concern (equation, grid,
data, stepper, sweep, output, run).  CLI flags override file keys via dotted
paths.  The config hash -- sha256 of the canonicalized JSON form, truncated
to 12 hex digits -- stamps every output file so reruns can be recognised.
"""

from __future__ import annotations

import hashlib
import json

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

__all__ = [
    "ConfigError",
    "load_config",
    "merge_overrides",
    "config_hash",
    "parse_seeds",
    "validate_tables",
]

KINDS = ("simulate", "smoothing", "bounds", "infr", "report")

# Tables a config file may carry; anything else is a validation error.
TABLES = ("experiment", "equation", "grid", "data", "stepper", "sweep",
          "output", "run")


class ConfigError(ValueError):
    """Invalid configuration; the message itemizes every failure."""


def load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML: {exc}") from exc


def merge_overrides(cfg: dict, overrides: dict) -> dict:
    """Apply {'table.key': value} overrides, skipping None values."""
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in cfg.items()}
    for dotted, value in overrides.items():
        if value is None:
            continue
        table, _, key = dotted.partition(".")
        if not key:
            out[table] = value
            continue
        out.setdefault(table, {})
        out[table][key] = value
    return out


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, float) and obj == int(obj) and abs(obj) < 1e15:
        # 1.0 and 1 hash alike: flags parse numbers as float, TOML may not.
        return int(obj)
    return obj


def config_hash(cfg: dict) -> str:
    """12-hex digest of the canonical (sorted, normalized) JSON form."""
    payload = json.dumps(_canonical(cfg), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def parse_seeds(text) -> tuple[int, ...]:
    """Seed ranges: '0..8' (half-open), '0,3,5' (list), '4' (single)."""
    if isinstance(text, int):
        return (text,)
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    text = str(text).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo_i, hi_i = int(lo), int(hi)
            if hi_i <= lo_i:
                raise ConfigError(
                    f"seed range {text!r} is empty (end not past start)")
            return tuple(range(lo_i, hi_i))
        if "," in text:
            return tuple(int(v) for v in text.split(","))
        return (int(text),)
    except ValueError as exc:
        raise ConfigError(f"cannot parse seeds {text!r}") from exc


def validate_tables(cfg: dict, kind: str) -> list[str]:
    """Collect structural problems (unknown tables, bad scalar types)."""
    problems = []
    if kind not in KINDS:
        problems.append(f"unknown experiment kind {kind!r}")
    for key in cfg:
        if key not in TABLES:
            problems.append(f"unknown config table [{key}]")
    for table in ("equation", "grid", "data", "stepper", "sweep",
                  "output", "run"):
        val = cfg.get(table)
        if val is not None and not isinstance(val, dict):
            problems.append(f"[{table}] must be a table, got {type(val).__name__}")
    return problems
