"""JSON run configurations: schemas, validation and conversion to solver inputs."""

from __future__ import annotations

import json
import math
from pathlib import Path

import jsonschema

from .effective import FAMILIES, EbcFamily, family_from_dict
from .harness import ExperimentConfig
from .radial import LayerConfig
from .regimes import ExtendedLimit, ScalingLaw
from .spectral import SphereGeometry

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


_pos = {"type": "number", "exclusiveMinimum": 0}
_num = {"type": "number"}


def _obj(props: dict, required: list[str]) -> dict:
    return {"type": "object", "properties": props, "required": required, "additionalProperties": False}


_LAW = _obj({"c_sigma": _pos, "p_sigma": _num, "c_mu": _pos, "p_mu": _num}, ["c_sigma", "p_sigma", "c_mu", "p_mu"])
_LIMIT = {
    "oneOf": [
        _obj({"kind": {"enum": ["zero", "infinite"]}}, ["kind"]),
        _obj({"kind": {"const": "finite"}, "value": _pos}, ["kind", "value"]),
    ]
}
_GEOM = _obj({"R1": _pos, "R2": _pos}, ["R1", "R2"])
_PRESET = _obj({"preset": {"type": "string"}, "params": {"type": "object"}}, ["preset"])
_TIME = _obj({"T": _pos, "dt": _pos, "theta": {"type": "number", "minimum": 0.5, "maximum": 1.0},
              "stride": {"type": "integer", "minimum": 1}}, ["T", "dt"])
_HEADER = {"schema_version": {"const": SCHEMA_VERSION}, "description": {"type": "string"}}
_COMMON = {
    **_HEADER,
    "geometry": _GEOM, "k1": _pos, "k2": _pos,
    "lmax": {"type": "integer", "minimum": 0},
    "initial": _PRESET, "forcing": _PRESET, "time": _TIME,
}
_FAMILY = {
    "type": "object",
    "properties": {
        "family": {"enum": sorted(FAMILIES)},
        "b": _pos, "gamma": _pos, "H": {"oneOf": [_pos, {"type": "null"}]}, "beta": {"type": "number", "minimum": 0},
    },
    "required": ["family"],
    "additionalProperties": False,
}

SCHEMAS = {
    "classify": {
        "type": "object",
        "properties": {**_HEADER, "law": _LAW, "limits": _obj({"b": _LIMIT, "gamma": _LIMIT, "beta": _LIMIT},
                                                              ["b", "gamma", "beta"])},
        "required": ["schema_version"],
        "oneOf": [{"required": ["law"]}, {"required": ["limits"]}],
        "additionalProperties": False,
    },
    "solve_full": _obj({
        **_COMMON,
        "layer": _obj({"delta": _pos, "sigma": _pos, "mu": _pos}, ["delta", "sigma", "mu"]),
        "mesh": _obj({"n_inner": {"type": "integer", "minimum": 4}, "n_layer": {"type": "integer", "minimum": 16},
                      "n_outer": {"type": "integer", "minimum": 4}, "stretch": {"type": "number", "minimum": 0}}, []),
    }, ["schema_version", "geometry", "k1", "k2", "lmax", "initial", "time", "layer"]),
    "solve_ebc": {
        "type": "object",
        "properties": {
            **_COMMON,
            "family": _FAMILY, "law": _LAW,
            "mesh": _obj({"n_inner": {"type": "integer", "minimum": 4}, "n_outer": {"type": "integer", "minimum": 4},
                          "stretch": {"type": "number", "minimum": 0}}, []),
        },
        "required": ["schema_version", "geometry", "k1", "k2", "lmax", "initial", "time"],
        "oneOf": [{"required": ["family"]}, {"required": ["law"]}],
        "additionalProperties": False,
    },
    "converge": _obj({
        **_COMMON,
        "law": _LAW,
        "deltas": {"type": "array", "items": _pos, "minItems": 1},
        "mesh": _obj({"cells": {"type": "array", "items": {"type": "integer", "minimum": 4},
                                "minItems": 3, "maxItems": 3},
                      "effective_cells": {"type": "array", "items": {"type": "integer", "minimum": 4},
                                          "minItems": 2, "maxItems": 2}}, []),
        "record_timing": {"type": "boolean"},
    }, ["schema_version", "law", "deltas", "geometry", "k1", "k2", "lmax", "initial", "time"]),
}


def load(path: str | Path, kind: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate(doc, kind)
    return doc


def validate(doc: dict, kind: str) -> None:
    try:
        jsonschema.validate(doc, SCHEMAS[kind])
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid {kind} config at {where}: {exc.message}") from exc


def law_from(doc: dict) -> ScalingLaw:
    return ScalingLaw(**doc["law"])


def limits_from(doc: dict) -> tuple[ExtendedLimit, ExtendedLimit, ExtendedLimit]:
    lim = doc["limits"]
    return tuple(ExtendedLimit.from_dict(lim[k]) for k in ("b", "gamma", "beta"))


def geometry_from(doc: dict) -> SphereGeometry:
    try:
        return SphereGeometry(**doc["geometry"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def layer_from(doc: dict) -> LayerConfig:
    try:
        return LayerConfig(geometry_from(doc), k1=doc["k1"], k2=doc["k2"], **doc["layer"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def family_from(doc: dict) -> EbcFamily:
    try:
        return family_from_dict(doc["family"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid family: {exc}") from exc


def time_from(doc: dict) -> tuple[float, float, float, int]:
    t = doc["time"]
    return t["T"], t["dt"], t.get("theta", 1.0), t.get("stride", 1)


def experiment_from(doc: dict, workers: int = 1) -> ExperimentConfig:
    T, dt, theta, stride = time_from(doc)
    mesh = doc.get("mesh", {})
    kwargs = {}
    if "cells" in mesh:
        kwargs["cells"] = tuple(mesh["cells"])
    if "effective_cells" in mesh:
        kwargs["effective_cells"] = tuple(mesh["effective_cells"])
    try:
        return ExperimentConfig(
            law=law_from(doc), deltas=tuple(doc["deltas"]), geom=geometry_from(doc), k1=doc["k1"], k2=doc["k2"],
            lmax=doc["lmax"], initial=doc["initial"]["preset"], initial_params=doc["initial"].get("params", {}),
            forcing=doc.get("forcing", {"preset": "zero"})["preset"],
            forcing_params=doc.get("forcing", {}).get("params", {}),
            T=T, dt=dt, theta=theta, stride=stride, record_timing=doc.get("record_timing", True), workers=workers,
            **kwargs,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_height(text: str) -> float:
    """``"inf"`` or a positive number."""
    h = math.inf if text.strip().lower() in ("inf", "infinity") else float(text)
    if not h > 0:
        raise ValueError(f"H must be positive, got {text}")
    return h
