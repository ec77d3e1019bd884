"""JSON run configuration: schema check, defaults, presets and dotted overrides.

A configuration is one JSON object with a ``"schema"`` version field::

    {
      "schema": 1,
      "model": {"dim": 2, "gamma": 1.0,
                "kernel": {"name": "geometric", "alpha": 2, "params": {"r": 1.0}},
                "marks": {"name": "constant", "params": {}}},
      "window": {"side": 10.0, "center": [0.0, 0.0]},
      "master_seed": 2024,
      "replication": 0,
      "functionals": ["betti:0", "euler"],
      "experiment": {"kind": "clt", "sides": [8, 16, 32], "replications": 500},
      "output": {"dir": "out", "render": false}
    }

Unknown keys anywhere are rejected with their dotted path.
"""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

from .errors import ConfigError

SCHEMA_VERSION = 1

ANY = object()
_NUM = (int, float)

SCHEMA: dict = {
    "schema": int,
    "name": str,
    "description": str,
    "model": {
        "dim": int,
        "gamma": _NUM,
        "kernel": {"name": str, "alpha": int, "params": dict},
        "marks": {"name": str, "params": dict},
    },
    "window": {"side": _NUM, "center": list},
    "master_seed": int,
    "replication": int,
    "input": str,
    "grains": ANY,
    "alpha": int,
    "functionals": list,
    "experiment": {
        "kind": str,
        "functionals": list,
        "sides": list,
        "side": _NUM,
        "replications": int,
        "inner_replications": int,
        "significance": _NUM,
        "variance_tolerance": _NUM,
        "stabilization_threshold": _NUM,
        "nested": bool,
    },
    "output": {"dir": str, "render": bool},
}

DEFAULTS: dict = {
    "schema": SCHEMA_VERSION,
    "model": {
        "dim": 2,
        "gamma": 1.0,
        "kernel": {"name": "geometric", "alpha": 2, "params": {"r": 1.0}},
        "marks": {"name": "constant", "params": {}},
    },
    "window": {"side": 10.0},
    "master_seed": 0,
    "replication": 0,
    "alpha": 2,
    "output": {"dir": "out", "render": False},
}

EXPERIMENT_DEFAULTS: dict = {
    "kind": "clt",
    "replications": 100,
    "inner_replications": 1000,
    "significance": 0.01,
    "variance_tolerance": 0.15,
    "stabilization_threshold": 0.95,
    "nested": True,
}


def _type_ok(value: Any, expected) -> bool:
    if expected is ANY:
        return True
    if expected is int or expected == (int,):
        return isinstance(value, int) and not isinstance(value, bool)
    if expected == _NUM:
        return isinstance(value, _NUM) and not isinstance(value, bool)
    return isinstance(value, expected)


def validate(cfg: dict, schema: dict = SCHEMA, path: str = "") -> None:
    """Raise ConfigError naming the first unknown key or mistyped value."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path or 'configuration'}: expected an object")
    for key, value in cfg.items():
        where = f"{path}.{key}" if path else key
        if key not in schema:
            raise ConfigError(f"unknown configuration key {where!r}")
        expected = schema[key]
        if isinstance(expected, dict):
            validate(value, expected, where)
        elif not _type_ok(value, expected):
            raise ConfigError(f"{where}: unexpected value {value!r}")
    if not path and cfg.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {cfg.get('schema')!r} (expected {SCHEMA_VERSION})")


def deep_merge(base: dict, over: dict) -> dict:
    """Recursive merge; a kernel or mark law that names itself replaces the
    base one wholesale so stale parameters never leak across."""
    out = copy.deepcopy(base)
    for k, v in over.items():
        atomic = k == "params" or (k in ("kernel", "marks") and isinstance(v, dict) and "name" in v)
        if isinstance(v, dict) and isinstance(out.get(k), dict) and not atomic:
            out[k] = deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def parse_override(text: str) -> tuple[list[str], Any]:
    """``a.b.c=value``; the value is read as JSON when possible, else as a string."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(cfg: dict, overrides: Iterable[str]) -> dict:
    cfg = copy.deepcopy(cfg)
    for text in overrides:
        keys, value = parse_override(text)
        node = cfg
        for k in keys[:-1]:
            nxt = node.setdefault(k, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"override {text!r}: {k!r} is not an object")
            node = nxt
        node[keys[-1]] = value
    return cfg


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("rcmsim.presets").iterdir() if p.name.endswith(".json"))


def _read_json(text: str, where: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: top level must be a JSON object")
    return obj


def read_config_file(ref: str) -> tuple[dict, Path | None]:
    """Load a config from a path, or from a shipped preset by name.

    Returns the raw object and the directory relative paths resolve against.
    """
    path = Path(ref)
    if path.is_file():
        return _read_json(path.read_text(), str(path)), path.resolve().parent
    preset = resources.files("rcmsim.presets") / f"{ref}.json"
    if preset.is_file():
        return _read_json(preset.read_text(), f"preset {ref}"), None
    raise ConfigError(f"no config file or preset named {ref!r} (presets: {', '.join(preset_names())})")


def load_config(ref: str | None = None, overrides: Iterable[str] = (), seed: int | None = None) -> tuple[dict, Path | None]:
    """Validated configuration with defaults filled in."""
    raw, base = read_config_file(ref) if ref else ({}, None)
    validate(raw)
    cfg = apply_overrides(raw, overrides)
    if seed is not None:
        cfg["master_seed"] = int(seed)
    validate(cfg)
    cfg = deep_merge(DEFAULTS, cfg)
    if "experiment" in cfg:
        cfg["experiment"] = deep_merge(EXPERIMENT_DEFAULTS, cfg["experiment"])
    return cfg, base
