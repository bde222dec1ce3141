"""JSON config documents: schemas, loading and conversion to library objects."""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .agents import SigmoidFn, agents_from_json
from .dynamics import IntegratorConfig
from .errors import ConfigError
from .experiments import DEFAULTS, KINDS, ExperimentConfig
from .lmsr import MarketState
from .signals import Constant, LorenzParams, LorenzTrace, Sinusoid

SCHEMA_VERSION = 1

_NUM = {"type": "number"}
_VEC = {"type": "array", "items": _NUM, "minItems": 1}

_BASE_AGENT = {
    "type": "object",
    "required": ["kind", "params"],
    "properties": {
        "kind": {"enum": ["constant", "coordinate", "interval", "gained"]},
        "params": {"type": "object"},
    },
}

AGENT_SCHEMA = {
    "type": "object",
    "required": ["class", "kind", "params"],
    "properties": {
        "class": {"type": "integer", "minimum": 0},
        "kind": {"enum": ["constant", "coordinate", "interval", "gained"]},
        "params": {"type": "object"},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "constant"}}},
            "then": {"properties": {"params": {"required": ["L"], "properties": {"L": _NUM}}}},
        },
        {
            "if": {"properties": {"kind": {"const": "coordinate"}}},
            "then": {"properties": {"params": {"required": ["dim"], "properties": {
                "dim": {"type": "integer", "minimum": 0}, "sign": {"enum": [-1, 1]}}}}},
        },
        {
            "if": {"properties": {"kind": {"const": "interval"}}},
            "then": {"properties": {"params": {"required": ["a", "b"], "properties": {"a": _NUM, "b": _NUM}}}},
        },
        {
            "if": {"properties": {"kind": {"const": "gained"}}},
            "then": {"properties": {"params": {"required": ["base"], "properties": {
                "base": _BASE_AGENT, "alpha": {"type": "number", "minimum": 1}, "nu": {"enum": [-1, 0, 1]}}}}},
        },
    ],
}

SIGNAL_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["constant", "sinusoid", "lorenz"]},
        "value": _VEC,
        "amplitude": _NUM,
        "omega": {"type": "number", "exclusiveMinimum": 0},
        "ic": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
        "params": {"type": "object", "properties": {"s": _NUM, "sigma_L": _NUM, "rho": _NUM, "alpha_L": _NUM},
                   "additionalProperties": False},
        "form": {"enum": ["paper", "textbook"]},
        "step": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

SIMULATE_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "agents", "signal"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "simulate"},
        "seed": {"type": "integer", "minimum": 0},
        "beta": {"type": "number", "exclusiveMinimum": 0},
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "record_stride": {"type": "integer", "minimum": 1},
        "convergence_window": {"type": "number", "exclusiveMinimum": 0},
        "convergence_tol": {"type": "number", "exclusiveMinimum": 0},
        "n_assets": {"type": "integer", "minimum": 2},
        "p0": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 2},
        "q0": {"type": "array", "items": _NUM, "minItems": 2},
        "sigma": {"enum": ["logistic", "tanh", "clipped_linear"]},
        "signal": SIGNAL_SCHEMA,
        "agents": {"type": "array", "items": AGENT_SCHEMA},
        "classify": {"type": "boolean"},
    },
    "additionalProperties": False,
}

_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_PARAM_TYPES = {
    "n_instances": {"type": "integer", "minimum": 1},
    "n_assets": {"type": "integer", "minimum": 2},
    "per_class": {"type": "integer", "minimum": 1},
    "reps": {"type": "integer", "minimum": 2},
    "record_stride": {"type": "integer", "minimum": 1},
    "beta": {"type": "number", "exclusiveMinimum": 0},
    "epsilon": {"type": "number", "exclusiveMinimum": 0},
    "t_end": {"type": "number", "exclusiveMinimum": 0},
    "omega": {"type": "number", "exclusiveMinimum": 0},
    "alpha": {"type": "number", "minimum": 1},
    "nu": {"enum": [-1, 0, 1]},
    "alphas": {"type": "array", "items": {"type": "number", "minimum": 1}, "minItems": 1},
    "nus": {"type": "array", "items": {"enum": [-1, 0, 1]}, "minItems": 1},
    "L_range": _RANGE,
    "p0_range": _RANGE,
    "class_size_range": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2},
    "ics": {"type": "array", "items": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}, "minItems": 1},
    "lorenz_form": {"enum": ["paper", "textbook"]},
    "burn_in_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    "confidence": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
    "amplitude": {"type": "number", "minimum": 0},
    "burn_in_periods": {"type": "integer", "minimum": 0},
    "max_reversals": {"type": "integer", "minimum": 0},
    "convergence_window": {"type": "number", "exclusiveMinimum": 0},
    "convergence_tol": {"type": "number", "exclusiveMinimum": 0},
    "lorenz": {"type": "object", "properties": {"s": _NUM, "sigma_L": _NUM, "rho": _NUM, "alpha_L": _NUM},
               "additionalProperties": False},
}


def experiment_schema(kind: str) -> dict:
    props = {name: _PARAM_TYPES.get(name, {}) for name in DEFAULTS[kind]}
    return {
        "type": "object",
        "required": ["schema_version"],
        "properties": {
            "schema_version": {"const": SCHEMA_VERSION},
            "kind": {"const": kind},
            "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
            "params": {"type": "object", "properties": props, "additionalProperties": False},
        },
        "additionalProperties": False,
    }


def _validate(doc: Any, schema: dict) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {where}: {exc.message}") from None


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None


def experiment_from_doc(doc: dict | None, kind: str, seed: int | None = None) -> ExperimentConfig:
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    doc = copy.deepcopy(doc) if doc else {"schema_version": SCHEMA_VERSION}
    _validate(doc, experiment_schema(kind))
    return ExperimentConfig(kind, seed if seed is not None else int(doc.get("seed", 0)), doc.get("params", {}))


def experiment_to_doc(cfg: ExperimentConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": cfg.kind, "seed": int(cfg.seed), "params": cfg.resolved()}


def signal_from_doc(doc: dict, t_end: float, epsilon: float):
    kind = doc["kind"]
    if kind == "constant":
        return Constant(doc.get("value", [0.0]))
    if kind == "sinusoid":
        return Sinusoid(doc.get("amplitude", 1.0), doc.get("omega", Sinusoid().omega))
    if "ic" not in doc:
        raise ConfigError("lorenz signal needs an 'ic'")
    step = doc.get("step", epsilon / 10)
    store = max(1, int(round(epsilon / step))) if abs(epsilon / step - round(epsilon / step)) < 1e-9 else 1
    return LorenzTrace.compute(doc["ic"], t_end, LorenzParams(**doc.get("params", {})), step=step,
                               form=doc.get("form", "paper"), store_every=store)


def simulation_from_doc(doc: dict):
    """Build ``(market, agents, signal, integrator config, sigma, classify)`` from a simulate document."""
    _validate(doc, SIMULATE_SCHEMA)
    beta = doc.get("beta", 0.01)
    M = doc.get("n_assets", 2)
    if "q0" in doc and "p0" in doc:
        raise ConfigError("give at most one of q0 and p0")
    try:
        if "q0" in doc:
            market = MarketState(doc["q0"], beta)
        elif "p0" in doc:
            p0 = np.asarray(doc["p0"], dtype=float)
            if abs(p0.sum() - 1) > 1e-9:
                raise ConfigError("p0 must sum to 1")
            market = MarketState.from_prices(p0 / p0.sum(), beta)
        else:
            market = MarketState(np.zeros(M), beta)
        if market.n_assets != M and "n_assets" in doc:
            raise ConfigError("n_assets disagrees with the initial state length")
        icfg = IntegratorConfig(
            doc.get("epsilon", 0.01), doc.get("t_end", 5000.0), doc.get("record_stride", 1),
            doc.get("convergence_window", 100.0), doc.get("convergence_tol", 1e-6),
        )
        agents = agents_from_json(doc["agents"])
        for a in agents:
            if a.asset_class >= market.n_assets:
                raise ConfigError(f"agent class {a.asset_class} out of range for {market.n_assets} assets")
        signal = signal_from_doc(doc["signal"], icfg.t_end, icfg.epsilon)
        sigma = SigmoidFn.named(doc.get("sigma", "logistic"))
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    classify = doc.get("classify", isinstance(signal, Constant))
    return market, agents, signal, icfg, sigma, classify
