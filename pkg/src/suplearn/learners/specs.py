"""Learner and screener specifications."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..errors import InvalidHyperparam

BASES = ("intercept", "ols", "logistic", "ridge", "lasso", "knn", "tree", "forest")
SCREENERS = ("lasso_screen", "corr_top_k", "variance_blind", "explicit_subset")

# allowed hyperparameters and their defaults, per base
HYPERPARAMS = {
    "intercept": {},
    "ols": {},
    "logistic": {"ridge_guard": 1e-8, "tol": 1e-10, "max_iter": 100},
    "ridge": {"lambda": 1.0},
    "lasso": {"lambda": None, "lambda_ratio": None, "tol": 1e-7, "max_iter": 10_000},
    "knn": {"k": 5},
    "tree": {"max_depth": 3, "min_leaf": 5},
    "forest": {"trees": 100, "max_features": None, "bootstrap": True, "max_depth": None, "min_leaf": 5},
}
SCREENER_PARAMS = {
    "lasso_screen": {"lambda": None, "lambda_ratio": None},
    "corr_top_k": {"k": None},
    "variance_blind": {},
    "explicit_subset": {"names": None},
}


def _int_at_least(name, value, lo, allow_none=False):
    if value is None and allow_none:
        return
    if isinstance(value, bool) or not isinstance(value, int) or value < lo:
        raise InvalidHyperparam(f"{name} must be an integer >= {lo}, got {value!r}")


def _real_at_least(name, value, lo, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvalidHyperparam(f"{name} must be a finite number, got {value!r}")
    if value < lo or (strict and value == lo):
        raise InvalidHyperparam(f"{name} must be {'>' if strict else '>='} {lo}, got {value!r}")


def _check_lambda(owner, params):
    lam, ratio = params.get("lambda"), params.get("lambda_ratio")
    if (lam is None) == (ratio is None):
        raise InvalidHyperparam(f"{owner}: give exactly one of lambda, lambda_ratio")
    if ratio is not None:
        _real_at_least(f"{owner}.lambda_ratio", ratio, 0.0, strict=True)
        if ratio > 1:
            raise InvalidHyperparam(f"{owner}.lambda_ratio must be <= 1")
    return lam


@dataclass(frozen=True)
class ScreenerSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SCREENERS:
            raise InvalidHyperparam(f"unknown screener kind {self.kind!r}")
        unknown = set(self.params) - set(SCREENER_PARAMS[self.kind])
        if unknown:
            raise InvalidHyperparam(f"screener {self.kind}: unknown params {sorted(unknown)}")
        merged = {**SCREENER_PARAMS[self.kind], **self.params}
        if self.kind == "lasso_screen":
            lam = _check_lambda("lasso_screen", merged)
            if lam is not None:
                _real_at_least("lasso_screen.lambda", lam, 0.0, strict=True)
        elif self.kind == "corr_top_k":
            _int_at_least("corr_top_k.k", merged["k"], 1)
        elif self.kind == "explicit_subset":
            names = merged["names"]
            if not isinstance(names, (list, tuple)) or not names:
                raise InvalidHyperparam("explicit_subset needs a nonempty list of names")
            merged["names"] = tuple(str(s) for s in names)
        object.__setattr__(self, "params", {k: v for k, v in merged.items() if v is not None})

    def to_dict(self):
        params = {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params.items()}
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d["kind"], params=dict(d.get("params") or {}))


@dataclass(frozen=True)
class LearnerSpec:
    """A fully specified candidate: base learner, hyperparameters, optional screener."""

    name: str
    base: str
    hyperparams: dict = field(default_factory=dict)
    screener: Optional[ScreenerSpec] = None
    interactions: tuple = ()

    def __post_init__(self):
        if not self.name or not isinstance(self.name, str):
            raise InvalidHyperparam("learner name must be a nonempty string")
        if self.base not in BASES:
            raise InvalidHyperparam(f"{self.name}: unknown base learner {self.base!r}")
        allowed = HYPERPARAMS[self.base]
        unknown = set(self.hyperparams) - set(allowed)
        if unknown:
            raise InvalidHyperparam(f"{self.name}: unknown hyperparameters {sorted(unknown)} for {self.base}")
        hp = {**allowed, **self.hyperparams}
        self._validate(hp)
        object.__setattr__(self, "hyperparams", hp)
        pairs = []
        for pair in self.interactions or ():
            if len(pair) != 2:
                raise InvalidHyperparam(f"{self.name}: interaction terms are covariate pairs")
            pairs.append((str(pair[0]), str(pair[1])))
        object.__setattr__(self, "interactions", tuple(pairs))
        if isinstance(self.screener, dict):
            object.__setattr__(self, "screener", ScreenerSpec.from_dict(self.screener))

    def _validate(self, hp):
        b = self.base
        if b == "logistic":
            _real_at_least("ridge_guard", hp["ridge_guard"], 0.0)
            _real_at_least("tol", hp["tol"], 0.0, strict=True)
            _int_at_least("max_iter", hp["max_iter"], 1)
        elif b == "ridge":
            _real_at_least("lambda", hp["lambda"], 0.0)
        elif b == "lasso":
            lam = _check_lambda(self.name, hp)
            if lam is not None:
                _real_at_least("lambda", lam, 0.0)
            _real_at_least("tol", hp["tol"], 0.0, strict=True)
            _int_at_least("max_iter", hp["max_iter"], 1)
        elif b == "knn":
            _int_at_least("k", hp["k"], 1)
        elif b == "tree":
            _int_at_least("max_depth", hp["max_depth"], 1, allow_none=True)
            _int_at_least("min_leaf", hp["min_leaf"], 1)
        elif b == "forest":
            _int_at_least("trees", hp["trees"], 1)
            _int_at_least("max_features", hp["max_features"], 1, allow_none=True)
            _int_at_least("max_depth", hp["max_depth"], 1, allow_none=True)
            _int_at_least("min_leaf", hp["min_leaf"], 1)
            if not isinstance(hp["bootstrap"], bool):
                raise InvalidHyperparam("bootstrap must be true or false")

    def to_dict(self):
        out = {"name": self.name, "base": self.base, "hyperparams": dict(self.hyperparams)}
        out["screener"] = self.screener.to_dict() if self.screener else None
        out["interactions"] = [list(p) for p in self.interactions]
        return out

    @classmethod
    def from_dict(cls, d):
        scr = d.get("screener")
        return cls(
            name=d["name"],
            base=d["base"],
            hyperparams=dict(d.get("hyperparams") or {}),
            screener=ScreenerSpec.from_dict(scr) if scr else None,
            interactions=tuple(tuple(p) for p in d.get("interactions") or ()),
        )
