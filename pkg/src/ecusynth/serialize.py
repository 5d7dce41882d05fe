"""Canonical JSON form of systems and reports.

Documents carry a schema name and version, the generating seed and config
digest, and a SHA-256 ``content_digest`` over the rest of the document.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json

from . import model
from .model import Asil, SystemModel

SYSTEM_SCHEMA = "ecusynth/system"
REPORT_SCHEMA = "ecusynth/analysis-report"
FIDELITY_SCHEMA = "ecusynth/fidelity-report"
SCHEMA_VERSION = 1

_COLLECTIONS = {
    "cores": model.Core,
    "swcs": model.SwComponent,
    "runnables": model.Runnable,
    "labels": model.Label,
    "chains": model.CauseEffectChain,
    "tasks": model.Task,
    "bsw_tasks": model.BswTask,
}


class SchemaError(ValueError):
    """Malformed or incompatible document; the message starts with a path."""


def _plain(value):
    if isinstance(value, Asil):
        return value.value
    if isinstance(value, frozenset):
        return sorted(_plain(v) for v in value)
    if isinstance(value, (tuple, list)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def _record(obj):
    return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True,
                      allow_nan=False) + "\n"


def _digest(body) -> str:
    text = json.dumps(body, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()


def seal(schema, body, seed, config_digest):
    doc = {"schema": schema, "schema_version": SCHEMA_VERSION, "seed": seed,
           "config_digest": config_digest, **body}
    doc["content_digest"] = _digest(doc)
    return doc


def serialize_system(system: SystemModel) -> str:
    body = {"system": {name: [_record(x) for x in getattr(system, name)]
                       for name in _COLLECTIONS}}
    return canonical_json(seal(SYSTEM_SCHEMA, body, system.seed, system.config_digest))


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _convert(path, kind, value):
    optional = kind.startswith("Optional[")
    if optional:
        if value is None:
            return None
        kind = kind[len("Optional["):-1]
    if kind == "str" and isinstance(value, str):
        return value
    if kind == "int" and _is_int(value):
        return value
    if kind == "float" and (_is_int(value) or isinstance(value, float)):
        return float(value)
    if kind == "bool" and isinstance(value, bool):
        return value
    if kind == "Asil" and value in {a.value for a in Asil}:
        return Asil(value)
    if kind in ("tuple", "frozenset") and isinstance(value, list):
        if not all(isinstance(v, (str, int)) and not isinstance(v, bool) for v in value):
            raise SchemaError(f"{path}: list items must be ids or integers")
        return tuple(value) if kind == "tuple" else frozenset(value)
    raise SchemaError(f"{path}: expected {kind}, got {type(value).__name__}")


def _build(path, cls, data):
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected an object")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise SchemaError(f"{path}: unknown fields {sorted(unknown)}")
    kwargs = {}
    for name, f in fields.items():
        if name not in data:
            if f.default is dataclasses.MISSING:
                raise SchemaError(f"{path}.{name}: missing")
            continue
        kwargs[name] = _convert(f"{path}.{name}", f.type, data[name])
    return cls(**kwargs)


def _load(text, schema):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"$: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise SchemaError("$: expected an object")
    if doc.get("schema") != schema:
        raise SchemaError(f"$.schema: expected {schema!r}, got {doc.get('schema')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"$.schema_version: unsupported version "
                          f"{doc.get('schema_version')!r} (expected {SCHEMA_VERSION})")
    digest = doc.pop("content_digest", None)
    if digest != _digest(doc):
        raise SchemaError("$.content_digest: digest mismatch, document was altered")
    if not _is_int(doc.get("seed")) or not isinstance(doc.get("config_digest"), str):
        raise SchemaError("$: seed and config_digest are required")
    return doc


def deserialize_system(text: str) -> SystemModel:
    doc = _load(text, SYSTEM_SCHEMA)
    body = doc.get("system")
    if not isinstance(body, dict):
        raise SchemaError("$.system: expected an object")
    unknown = set(body) - set(_COLLECTIONS)
    if unknown:
        raise SchemaError(f"$.system: unknown collections {sorted(unknown)}")
    parts = {}
    for name, cls in _COLLECTIONS.items():
        items = body.get(name, [])
        if not isinstance(items, list):
            raise SchemaError(f"$.system.{name}: expected a list")
        parts[name] = tuple(_build(f"$.system.{name}[{i}]", cls, x)
                            for i, x in enumerate(items))
    return SystemModel(**parts, seed=doc["seed"], config_digest=doc["config_digest"])


def report_to_json(report, system) -> str:
    cores = []
    for c in report.cores:
        cores.append({
            "core_id": c.core_id,
            "utilization": c.utilization,
            "rom_used_kb": c.rom_used_kb, "ram_used_kb": c.ram_used_kb,
            "rom_free_kb": c.rom_free_kb, "ram_free_kb": c.ram_free_kb,
            "schedulable": c.rta.schedulable,
            "response_us": c.rta.response_us,
            "simulated_worst_us": c.simulated_worst_us,
            "diagnostics": c.rta.diagnostics,
        })
    chains = [{"chain_id": a.chain_id, "bound_us": a.bound_us,
               "measured_max_us": a.measured_max_us,
               "constraint_us": a.constraint_us, "satisfied": a.satisfied}
              for a in report.ages]
    body = {"accepted": report.accepted, "cores": cores, "chains": chains,
            "findings": [_record(f) for f in report.findings],
            "notes": list(report.notes)}
    return canonical_json(seal(REPORT_SCHEMA, _plain(body), system.seed,
                               system.config_digest))


def load_report(text: str, schema=REPORT_SCHEMA) -> dict:
    return _load(text, schema)
