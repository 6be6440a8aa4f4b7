"""Run configuration: a single TOML file with nested tables.

Unknown keys are rejected so configs stay reproducible records of what ran.
The expression grammar for curve components and the field is the one in
expressions.py.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .geometry import CurveSpec, FieldSpec

_SCHEMA = {
    "run": {"k": int, "stages": list, "out_dir": str, "cache_dir": str},
    "curve": {"kind": str, "radius": float, "a": float, "b": float,
              "x_expr": str, "y_expr": str},
    "field": {"expression": str},
    "band": {"xi_min": float, "xi_max": float, "grid_half_width": float,
             "grid_points": int, "taylor_order": int},
    "geometry": {"n_samples": int},
    "eikonal": {"target_h": float},
    "strip": {"n_sigma": int, "n_tau": int, "T": float, "keep_delta": bool,
              "weight_on": bool},
    "predict": {"hbar_values": list, "hbar_min": float, "hbar_max": float,
                "hbar_count": int},
    "validate": {"h_values": list, "n_eigs": int, "shift_margin": float},
}

_STAGES = ("band", "geometry", "eikonal", "wkb", "predict", "validate")

_DEFAULTS = {
    "run": {"stages": list(_STAGES), "out_dir": "out", "cache_dir": "cache"},
    "band": {"xi_min": -1.0, "xi_max": 1.0, "grid_half_width": None,
             "grid_points": 3201, "taylor_order": 8},
    "geometry": {"n_samples": 1024},
    "eikonal": {"target_h": 0.02},
    "strip": {"n_sigma": 160, "n_tau": 150, "T": 4.5, "keep_delta": True,
              "weight_on": False},
    "predict": {"hbar_values": None, "hbar_min": None, "hbar_max": None,
                "hbar_count": 25},
    "validate": {"h_values": [0.2, 0.15, 0.1], "n_eigs": 4, "shift_margin": 0.1},
}


@dataclass
class RunConfig:
    k: int
    curve: CurveSpec
    field: FieldSpec
    stages: list
    out_dir: str
    cache_dir: str
    band: dict = field(default_factory=dict)
    geometry: dict = field(default_factory=dict)
    eikonal: dict = field(default_factory=dict)
    strip: dict = field(default_factory=dict)
    predict: dict = field(default_factory=dict)
    validate: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)


def _check_section(name, table):
    schema = _SCHEMA.get(name)
    if schema is None:
        raise ConfigError(f"unknown config section [{name}]")
    out = {}
    for key, val in table.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{name}]")
        want = schema[key]
        if want is float and isinstance(val, int):
            val = float(val)
        if not isinstance(val, want):
            raise ConfigError(
                f"key {key!r} in [{name}] must be {want.__name__}, got {type(val).__name__}"
            )
        out[key] = val
    return out


def load_config(path):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML: {exc}") from exc
    return parse_config(data)


def parse_config(data):
    sections = {}
    for name, table in data.items():
        if not isinstance(table, dict):
            raise ConfigError(f"top-level entry {name!r} must be a table")
        sections[name] = _check_section(name, table)

    run = sections.get("run", {})
    if "k" not in run:
        raise ConfigError("missing required key: run.k")
    if "curve" not in sections:
        raise ConfigError("missing required section: [curve]")
    if "field" not in sections or "expression" not in sections["field"]:
        raise ConfigError("missing required key: field.expression")

    merged = {}
    for name in ("run", "band", "geometry", "eikonal", "strip", "predict", "validate"):
        merged[name] = dict(_DEFAULTS.get(name, {}))
        merged[name].update(sections.get(name, {}))

    stages = merged["run"]["stages"]
    for st in stages:
        if st not in _STAGES and st != "all":
            raise ConfigError(f"unknown stage {st!r}; valid: {_STAGES}")
    if "all" in stages:
        stages = list(_STAGES)

    curve_kw = dict(sections["curve"])
    kind = curve_kw.pop("kind", None)
    if kind is None:
        raise ConfigError("missing required key: curve.kind")
    try:
        curve = CurveSpec(kind=kind, **curve_kw)
        fspec = FieldSpec(expression=sections["field"]["expression"], k=run["k"])
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        k=run["k"], curve=curve, field=fspec, stages=stages,
        out_dir=merged["run"]["out_dir"], cache_dir=merged["run"]["cache_dir"],
        band=merged["band"], geometry=merged["geometry"],
        eikonal=merged["eikonal"], strip=merged["strip"],
        predict=merged["predict"], validate=merged["validate"],
        raw=data,
    )


def hbar_grid(cfg):
    pr = cfg.predict
    if pr.get("hbar_values"):
        return [float(x) for x in pr["hbar_values"]]
    lo, hi = pr.get("hbar_min"), pr.get("hbar_max")
    if lo is None or hi is None:
        raise ConfigError("predict needs hbar_values or hbar_min/hbar_max")
    import numpy as np

    return list(np.geomspace(float(lo), float(hi), int(pr["hbar_count"])))
