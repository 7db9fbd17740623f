"""Instance JSON: schema validation, loading and canonical saving.

Layout::

    {
      "id": "coverage2019",
      "provenance": "...",
      "claimed_bound": "20/19*2^(0/1)" | null,
      "polarity": "chores" | "goods",
      "items": ["h", "l1", ...],
      "agents": [ {"repr": "dense" | "additive" | "coverage" | "leveled" | "cs24", ...}, ... ]
    }

Exact values are strings in the numeric module's text form; bundles are
item-name arrays sorted by ground-set index.  Canonical output uses sorted
keys and two-space indentation, so save(load(x)) is byte-stable.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import jsonschema

from .instances import NamedInstance
from .numeric import ExactValue, format_value, parse_value
from .setfn import (
    Additive,
    CS24Cost,
    Coverage,
    DenseTable,
    GroundSet,
    Leveled,
    Profile,
    SetFunction,
    SizeLimitError,
)

__all__ = [
    "SchemaError",
    "function_to_json",
    "function_from_json",
    "instance_to_json",
    "instance_from_json",
    "dumps_instance",
    "loads_instance",
    "load_instance",
    "save_instance",
    "instance_hash",
]


class SchemaError(ValueError):
    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


_VALUE = {"type": "string", "minLength": 1}
_NAMES = {"type": "array", "items": {"type": "string"}}

INSTANCE_SCHEMA = {
    "type": "object",
    "required": ["items", "agents"],
    "properties": {
        "id": {"type": "string"},
        "provenance": {"type": "string"},
        "claimed_bound": {"anyOf": [_VALUE, {"type": "null"}]},
        "polarity": {"enum": ["chores", "goods"]},
        "items": {"type": "array", "items": {"type": "string", "minLength": 1}, "uniqueItems": True},
        "agents": {"type": "array", "minItems": 1, "items": {"type": "object", "required": ["repr"]}},
    },
    "additionalProperties": False,
}

FUNCTION_SCHEMAS = {
    "dense": {
        "type": "object",
        "required": ["repr", "values"],
        "properties": {"repr": {}, "values": {"type": "array", "items": _VALUE}},
        "additionalProperties": False,
    },
    "additive": {
        "type": "object",
        "required": ["repr", "weights"],
        "properties": {"repr": {}, "weights": {"type": "array", "items": _VALUE}},
        "additionalProperties": False,
    },
    "coverage": {
        "type": "object",
        "required": ["repr", "atoms"],
        "properties": {
            "repr": {},
            "atoms": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["items", "weight"],
                    "properties": {"items": _NAMES, "weight": _VALUE},
                    "additionalProperties": False,
                },
            },
        },
        "additionalProperties": False,
    },
    "leveled": {
        "type": "object",
        "required": ["repr", "levels", "values"],
        "properties": {
            "repr": {},
            "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "values": {"type": "array", "items": _VALUE, "minItems": 1},
        },
        "additionalProperties": False,
    },
    "cs24": {
        "type": "object",
        "required": ["repr", "agent", "k"],
        "properties": {"repr": {}, "agent": {"enum": [1, 2, 3]}, "k": _VALUE},
        "additionalProperties": False,
    },
}


def _validate(obj, schema, pointer: str):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        path = "".join(f"/{p}" for p in err.absolute_path)
        raise SchemaError(pointer + path, err.message)


def _value(text: str, pointer: str):
    try:
        return parse_value(text)
    except ValueError as exc:
        raise SchemaError(pointer, str(exc)) from None


def _names_mask(ground: GroundSet, names, pointer: str) -> int:
    mask = 0
    for k, name in enumerate(names):
        try:
            mask |= 1 << ground.index(name)
        except KeyError:
            raise SchemaError(f"{pointer}/{k}", f"unknown item {name!r}") from None
    return mask


def function_to_json(f: SetFunction) -> dict:
    g = f.ground
    if isinstance(f, DenseTable):
        return {"repr": "dense", "values": [format_value(v) for v in f.values]}
    if isinstance(f, Additive):
        return {"repr": "additive", "weights": [format_value(ExactValue(w)) for w in f.weights]}
    if isinstance(f, Coverage):
        return {
            "repr": "coverage",
            "atoms": [
                {"items": g.names(atom), "weight": format_value(ExactValue(w))}
                for atom, w in f.atoms
            ],
        }
    if isinstance(f, Leveled):
        return {
            "repr": "leveled",
            "levels": list(f.levels),
            "values": [format_value(v) for v in f.level_values],
        }
    if isinstance(f, CS24Cost):
        return {"repr": "cs24", "agent": f.agent, "k": format_value(ExactValue(f.k))}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def function_from_json(obj, ground: GroundSet, pointer: str = "") -> SetFunction:
    if not isinstance(obj, dict):
        raise SchemaError(pointer, "set function must be an object")
    tag = obj.get("repr")
    if tag not in FUNCTION_SCHEMAS:
        raise SchemaError(f"{pointer}/repr", f"unknown repr tag {tag!r}")
    _validate(obj, FUNCTION_SCHEMAS[tag], pointer)
    size = 1 << ground.m
    try:
        if tag == "dense":
            if len(obj["values"]) != size:
                raise SchemaError(f"{pointer}/values", f"expected {size} values, got {len(obj['values'])}")
            return DenseTable(ground, tuple(
                _value(v, f"{pointer}/values/{k}") for k, v in enumerate(obj["values"])))
        if tag == "additive":
            if len(obj["weights"]) != ground.m:
                raise SchemaError(f"{pointer}/weights", f"expected {ground.m} weights, got {len(obj['weights'])}")
            return Additive(ground, tuple(
                _value(v, f"{pointer}/weights/{k}") for k, v in enumerate(obj["weights"])))
        if tag == "coverage":
            atoms = []
            for k, atom in enumerate(obj["atoms"]):
                here = f"{pointer}/atoms/{k}"
                atoms.append((_names_mask(ground, atom["items"], f"{here}/items"),
                              _value(atom["weight"], f"{here}/weight")))
            return Coverage(ground, tuple(atoms))
        if tag == "leveled":
            if len(obj["levels"]) != size:
                raise SchemaError(f"{pointer}/levels", f"expected {size} levels, got {len(obj['levels'])}")
            values = tuple(_value(v, f"{pointer}/values/{k}") for k, v in enumerate(obj["values"]))
            return Leveled(ground, tuple(obj["levels"]), values)
        return CS24Cost(ground, obj["agent"], _value(obj["k"], f"{pointer}/k"))
    except SchemaError:
        raise
    except (ValueError, KeyError) as exc:
        raise SchemaError(pointer, str(exc)) from None


def instance_to_json(inst: NamedInstance) -> dict:
    p = inst.profile
    return {
        "id": inst.id,
        "provenance": inst.provenance,
        "claimed_bound": None if inst.claimed_bound is None else format_value(inst.claimed_bound),
        "polarity": p.polarity,
        "items": list(p.ground.items),
        "agents": [function_to_json(f) for f in p.agents],
    }


def instance_from_json(obj) -> NamedInstance:
    if not isinstance(obj, dict):
        raise SchemaError("", "instance must be a JSON object")
    _validate(obj, INSTANCE_SCHEMA, "")
    try:
        ground = GroundSet(tuple(obj["items"]))
    except (ValueError, SizeLimitError) as exc:
        raise SchemaError("/items", str(exc)) from None
    agents = tuple(
        function_from_json(f, ground, f"/agents/{k}") for k, f in enumerate(obj["agents"])
    )
    bound = obj.get("claimed_bound")
    return NamedInstance(
        id=obj.get("id", ""),
        profile=Profile(ground, agents, obj.get("polarity", "chores")),
        provenance=obj.get("provenance", ""),
        claimed_bound=None if bound is None else _value(bound, "/claimed_bound"),
    )


def dumps_instance(inst: NamedInstance) -> str:
    return json.dumps(instance_to_json(inst), sort_keys=True, indent=2) + "\n"


def loads_instance(text: str) -> NamedInstance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"malformed JSON: {exc}") from None
    return instance_from_json(obj)


def load_instance(path) -> NamedInstance:
    return loads_instance(Path(path).read_text())


def save_instance(inst: NamedInstance, path) -> None:
    Path(path).write_text(dumps_instance(inst))


def instance_hash(inst: NamedInstance) -> str:
    return hashlib.sha256(dumps_instance(inst).encode()).hexdigest()
