"""Experiment configuration: JSON schema validation and object construction."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import SchemaError

SUBCOMMANDS = ("drift", "conv-comb", "fixed-point", "shalom", "grigorchuk-audit", "space-check")

_number_or_fraction = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}

PARAMS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "n_max": {"type": "integer", "minimum": 1},
        "mode": {"enum": ["exact", "monte-carlo"]},
        "method": {"enum": ["auto", "chain", "convolution"]},
        "samples": {"type": "integer", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "n_sigma": {"type": "number", "minimum": 0},
        "coefficients": {"type": "array", "items": _number_or_fraction, "minItems": 1},
        "truncation": {"type": "integer", "minimum": 1},
        "renormalize": {"type": "boolean"},
        "budget": {"type": "integer", "minimum": 1},
        "max_iter": {"type": "integer", "minimum": 1},
        "theta": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "escape_radius": {"type": "number", "exclusiveMinimum": 0},
        "starts": {"type": "integer", "minimum": 1},
        "radius": {"type": "integer", "minimum": 0},
        "cap": {"type": "integer", "minimum": 1},
        "spot_checks": {"type": "integer", "minimum": 0},
        "scale": {"type": "number", "exclusiveMinimum": 0},
        "orbit_radius": {"type": "integer", "minimum": 1},
        "trace": {"type": "boolean"},
        "start": {},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "operation": {"enum": list(SUBCOMMANDS)},
        "group": {"type": "object", "required": ["kind"]},
        "measure": {"type": "object"},
        "space": {"type": "object", "required": ["kind"]},
        "spaces": {"type": "array", "items": {"type": "object", "required": ["kind"]}, "minItems": 1},
        "action": {
            "type": "object",
            "additionalProperties": False,
            "required": ["generators"],
            "properties": {"generators": {"type": "array", "items": {"type": "object"}}},
        },
        "example": {"type": "string"},
        "params": PARAMS_SCHEMA,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "csv": {"type": "boolean"}},
        },
    },
}

_REQUIRED = {
    "drift": [("group",)],
    "conv-comb": [("group",)],
    "fixed-point": [("example",), ("group", "space", "action")],
    "shalom": [("example",), ("group", "space", "action")],
    "grigorchuk-audit": [()],
    "space-check": [("space",), ("spaces",)],
}


@dataclass
class ExperimentConfig:
    operation: str
    raw: dict
    params: dict = field(default_factory=dict)

    @property
    def hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def get(self, key, default=None):
        return self.params.get(key, default)


def validate_config(raw: dict, operation: str) -> ExperimentConfig:
    if operation not in SUBCOMMANDS:
        raise SchemaError(f"unknown operation {operation!r}")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"config invalid at {where}: {exc.message}") from None
    if raw.get("operation", operation) != operation:
        raise SchemaError(f"config is for {raw['operation']!r}, not {operation!r}")
    if not any(all(k in raw for k in keys) for keys in _REQUIRED[operation]):
        need = " or ".join("+".join(keys) for keys in _REQUIRED[operation])
        raise SchemaError(f"{operation} needs {need}")
    return ExperimentConfig(operation, raw, dict(raw.get("params", {})))


def load_config(path, operation: str, overrides: dict | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise SchemaError("config must be a JSON object")
    if overrides:
        raw = dict(raw)
        raw["params"] = {**raw.get("params", {}), **overrides}
    return validate_config(raw, operation)
