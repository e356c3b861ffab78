"""Scenario files: TOML text validated against a JSON schema, then bound to model objects."""
import copy
import hashlib
import json
import math

import jsonschema

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .baths import BoseGas, FermiGasScaling, HarmonicField, WorkBath
from .errors import SchemaError

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_ID = {"type": "string", "minLength": 1}

_BATH_COMMON = {"id": _ID, "kind": {"enum": ["harmonic", "bose_gas", "fermi_gas", "work"]},
                "temperature": _NONNEG, "absorption_scale": _NONNEG, "heat_capacity_prefactor": _POS}

BATH_SCHEMA = {
    "type": "object",
    "required": ["id", "kind"],
    "properties": {
        **_BATH_COMMON,
        "dim": {"enum": [1, 2, 3]},
        "kappa": _NUM,
        "coupling": _POS,
        "cutoff": _POS,
        "omega_ir": _NONNEG,
        "out_of_band": {"enum": ["error", "zero"]},
        "density": _POS,
        "scattering_length": _POS,
        "mass": _POS,
        "critical_temperature": _POS,
        "fermi_temperature": _POS,
        "rate": _POS,
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "work"}}},
         "then": {"not": {"required": ["temperature"]}},
         "else": {"required": ["temperature"]}},
    ],
}

MODEL_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["tls", "oscillator", "tricycle", "driven_tls", "otto"]},
        "omega0": _POS,
        "omega": _POS,
        "n_max": {"type": "integer", "minimum": 4},
        "omega_h": _POS,
        "omega_c": _POS,
        "g": _NONNEG,
        "Omega": _POS,
        "couplings": {"type": "array", "items": _POS, "minItems": 3, "maxItems": 3},
        "durations": {"type": "array", "items": _NONNEG, "minItems": 4, "maxItems": 4},
        "transverse": _NUM,
        "schedule": {"enum": ["linear", "smooth"]},
        "medium": {"enum": ["tls", "oscillator"]},
        "baths": {"type": "array", "items": _ID, "minItems": 1},
        "hot": _ID,
        "cold": _ID,
        "work": _ID,
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"kind": {"const": "tls"}}},
         "then": {"required": ["omega0", "baths"]}},
        {"if": {"properties": {"kind": {"const": "oscillator"}}},
         "then": {"required": ["omega", "n_max", "baths"]}},
        {"if": {"properties": {"kind": {"const": "tricycle"}}},
         "then": {"required": ["omega_h", "omega_c", "hot", "cold", "work"]}},
        {"if": {"properties": {"kind": {"const": "driven_tls"}}},
         "then": {"required": ["omega0", "g", "Omega", "baths"]}},
        {"if": {"properties": {"kind": {"const": "otto"}}},
         "then": {"required": ["omega_h", "omega_c", "hot", "cold", "durations"]}},
    ],
}

RUN_SCHEMA = {
    "type": "object",
    "properties": {
        "mode": {"enum": ["simulate", "steady", "otto", "cool", "check"]},
        "t_end": _POS,
        "tol": {"type": "number", "minimum": 1e-12, "maximum": 1e-4},
        "samples": {"type": "integer", "minimum": 5},
        "initial_state": {"enum": ["ground", "excited", "maximally_mixed", "random"]},
        "q_max": {"type": "integer", "minimum": 1},
        "cycles": {"type": "integer", "minimum": 1},
        "max_cycles": {"type": "integer", "minimum": 1},
        "bath": _ID,
        "T0": _POS,
        "T_floor": _POS,
        "sweep": {"type": "array", "items": _POS, "minItems": 1},
        "thermoelectric": {
            "type": "object",
            "required": ["N_c", "T_c"],
            "properties": {"N_c": {"type": "integer", "minimum": 1}, "T_c": _POS},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

OUTPUT_SCHEMA = {
    "type": "object",
    "properties": {"dir": {"type": "string"}, "prefix": {"type": "string"},
                   "precision": {"const": 17}, "plot": {"type": "boolean"}},
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["run"],
    "properties": {
        "model": MODEL_SCHEMA,
        "baths": {"type": "array", "items": BATH_SCHEMA},
        "run": RUN_SCHEMA,
        "output": OUTPUT_SCHEMA,
    },
    "additionalProperties": False,
}


class Scenario:
    """Validated scenario; ``raw`` holds the parsed mapping."""

    def __init__(self, raw, text):
        self.raw = raw
        self.text = text
        self.model = raw.get("model", {})
        self.run = raw["run"]
        self.output = raw.get("output", {})
        self._bath_specs = {b["id"]: b for b in raw.get("baths", [])}

    @property
    def digest(self):
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    @property
    def bath_ids(self):
        return list(self._bath_specs)

    def bath_spec(self, bath_id):
        return self._bath_specs[bath_id]

    def bath(self, bath_id):
        return make_bath(self._bath_specs[bath_id])

    def model_bath_ids(self):
        m = self.model
        ids = list(m.get("baths", []))
        ids += [m[k] for k in ("hot", "cold", "work") if k in m]
        return ids


def make_bath(spec):
    spec = dict(spec)
    kind = spec.pop("kind")
    spec.pop("id")
    cls = {"harmonic": HarmonicField, "bose_gas": BoseGas, "fermi_gas": FermiGasScaling,
           "work": WorkBath}[kind]
    if kind == "work":
        spec.setdefault("temperature", math.inf)
    return cls(**spec)


def _path(err):
    parts = [str(p) for p in err.absolute_path]
    return "/".join(parts) if parts else "<root>"


def validate(raw):
    """Every schema and cross-reference problem as ``"path: message"`` strings."""
    validator = jsonschema.Draft7Validator(SCENARIO_SCHEMA)
    errors = [f"{_path(e)}: {e.message}" for e in
              sorted(validator.iter_errors(raw), key=lambda e: [str(p) for p in e.absolute_path])]
    baths = raw.get("baths", []) if isinstance(raw.get("baths", []), list) else []
    declared = []
    for i, b in enumerate(baths):
        if isinstance(b, dict) and "id" in b:
            if b["id"] in declared:
                errors.append(f"baths/{i}/id: duplicate bath id {b['id']!r}")
            declared.append(b["id"])
    model = raw.get("model", {}) if isinstance(raw.get("model", {}), dict) else {}
    refs = []
    if isinstance(model.get("baths"), list):
        refs += [(f"model/baths/{i}", r) for i, r in enumerate(model["baths"])]
    refs += [(f"model/{k}", model[k]) for k in ("hot", "cold", "work") if k in model]
    run = raw.get("run", {}) if isinstance(raw.get("run", {}), dict) else {}
    if "bath" in run:
        refs.append(("run/bath", run["bath"]))
    for where, ref in refs:
        if isinstance(ref, str) and ref not in declared:
            errors.append(f"{where}: bath id {ref!r} is referenced but not declared")
    for i, b in enumerate(baths):
        if not isinstance(b, dict):
            continue
        try:
            if not any(e.startswith(f"baths/{i}") for e in errors):
                make_bath(b)
        except Exception as exc:  # domain checks of the bath classes
            errors.append(f"baths/{i}: {exc}")
    if "T0" in run and "T_floor" in run and not run["T_floor"] < run["T0"]:
        errors.append("run/T_floor: must be below run/T0")
    return errors


def parse_scenario(text):
    """Parse TOML text into a :class:`Scenario`, or raise :class:`SchemaError` listing all problems."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError([f"<toml>: {exc}"]) from exc
    errors = validate(raw)
    if errors:
        raise SchemaError(errors)
    return Scenario(copy.deepcopy(raw), text)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
