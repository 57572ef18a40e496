"""Run configuration: JSON schema, defaults, and conversion to engine objects."""
from __future__ import annotations

import copy
import json
from pathlib import Path

import jsonschema

from .dataset import PreprocessOptions
from .engine import EslSpec, Library
from .errors import ConfigError, SuperLearnerError
from .folds import SCHEMES
from .learners import BASES, SCREENERS, LearnerSpec
from .metrics import METRICS

MODES = ("dsl", "esl", "dsl_with_esl")

_LEARNER = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "base"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "base": {"enum": list(BASES)},
        "hyperparams": {"type": "object"},
        "screener": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"enum": list(SCREENERS)}, "params": {"type": "object"}},
        },
        "interactions": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
        },
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["data", "outcome", "outcome_type", "library"],
    "properties": {
        "data": {"type": "string"},
        "outcome": {"type": "string"},
        "covariates": {"type": ["array", "null"], "items": {"type": "string"}},
        "cluster": {"type": ["string", "null"]},
        "outcome_type": {"enum": ["continuous", "binary"]},
        "metric": {"enum": list(METRICS)},
        "cv": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "scheme": {"enum": list(SCHEMES)},
                "v": {"type": ["integer", "null"], "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**63 - 1},
            },
        },
        "library": {"type": "array", "minItems": 1, "items": _LEARNER},
        "esl": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name"],
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "meta": {"enum": ["nnls", "nnls_convex"]},
                    "members": {"type": ["array", "null"], "items": {"type": "string"}},
                },
            },
        },
        "mode": {"enum": list(MODES)},
        "inner_v": {"type": ["integer", "null"], "minimum": 2},
        "threads": {"type": "integer", "minimum": 1},
        "preprocess": {
            "type": ["object", "null"],
            "additionalProperties": False,
            "properties": {
                "sparse_threshold": {"type": "number"},
                "corr_threshold": {"type": "number"},
                "omit_outliers": {"type": "boolean"},
                "outlier_k": {"type": "number"},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "fit": {"type": ["string", "null"]},
                "report": {"type": ["string", "null"]},
            },
        },
    },
}


def resolve(raw: dict) -> dict:
    """Validate ``raw`` and return a copy with every default filled in.

    Raises :class:`ConfigError` on any schema or semantic problem.
    """
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    cfg = copy.deepcopy(raw)
    binary = cfg["outcome_type"] == "binary"
    cfg.setdefault("covariates", None)
    cfg.setdefault("cluster", None)
    cfg.setdefault("metric", "nll" if binary else "mse")
    cv = cfg.setdefault("cv", {})
    default_scheme = "clustered" if cfg["cluster"] else ("stratified" if binary else "vfold")
    cv.setdefault("scheme", default_scheme)
    cv.setdefault("v", None if cv["scheme"] == "loocv" else 10)
    cv.setdefault("seed", 0)
    cfg.setdefault("esl", [])
    for e in cfg["esl"]:
        e.setdefault("meta", "nnls_convex")
        e.setdefault("members", None)
    cfg.setdefault("mode", "dsl_with_esl" if cfg["esl"] else "dsl")
    cfg.setdefault("inner_v", None)
    cfg.setdefault("threads", 1)
    cfg.setdefault("preprocess", None)
    out = cfg.setdefault("output", {})
    out.setdefault("fit", None)
    out.setdefault("report", None)
    for spec in cfg["library"]:
        spec.setdefault("hyperparams", {})
        spec.setdefault("screener", None)
        spec.setdefault("interactions", [])

    if binary is False and cfg["metric"] != "mse":
        raise ConfigError(f"metric {cfg['metric']!r} needs a binary outcome")
    if cv["scheme"] == "stratified" and cfg["cluster"]:
        raise ConfigError("stratified CV cannot be combined with clustered data")
    if cv["scheme"] == "clustered" and not cfg["cluster"]:
        raise ConfigError("clustered CV needs a cluster column")
    if cv["scheme"] == "loocv" and cv["v"] is not None:
        raise ConfigError("loocv takes no explicit v")
    if cfg["mode"] == "dsl_with_esl" and not cfg["esl"]:
        raise ConfigError("mode dsl_with_esl needs at least one esl entry")
    try:
        lib = library_from(cfg)
        # fill learner hyperparameter defaults so the echo is complete
        cfg["library"] = [s.to_dict() for s in lib.candidates]
        if cfg["preprocess"] is not None:
            cfg["preprocess"] = {**PreprocessOptions().__dict__, **cfg["preprocess"]}
            PreprocessOptions(**cfg["preprocess"])
    except SuperLearnerError as exc:
        raise ConfigError(f"config error: {exc}") from None
    return cfg


def library_from(cfg: dict) -> Library:
    cands = tuple(LearnerSpec.from_dict(s) for s in cfg["library"])
    esls = tuple(EslSpec.from_dict(e) for e in cfg.get("esl") or [])
    return Library(cands, esls)


def load_config(path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return resolve(raw)


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, indent=2) + "\n"


def recommendation_to_config(rec, data_path: str, outcome: str, outcome_type: str,
                             covariates=None, cluster=None) -> dict:
    """A complete, resolved run config from an advisor :class:`Recommendation`."""
    raw = {
        "data": data_path,
        "outcome": outcome,
        "covariates": list(covariates) if covariates is not None else None,
        "cluster": cluster,
        "outcome_type": outcome_type,
        "metric": rec.metric.id,
        "cv": {"scheme": rec.cv.scheme, "v": rec.cv.v, "seed": 0},
        "library": [s.to_dict() for s in rec.library.candidates],
        "esl": [e.to_dict() for e in rec.library.esl_specs],
        "mode": "dsl_with_esl" if rec.library.esl_specs else "dsl",
    }
    return resolve(raw)
