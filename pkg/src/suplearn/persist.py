"""Fit archives: JSON metadata with base64 little-endian array payloads.

Every number that affects prediction is stored as raw IEEE-754 bytes, so
``load_fit(save_fit(fit))`` predicts bit-for-bit like ``fit``.
"""
from __future__ import annotations

import base64
import json

import numpy as np

from .engine import CVRiskTable, CVRow, Schema, SuperLearnerFit
from .errors import CorruptArchive, VersionMismatch
from .folds import FoldAssignment
from .learners import LearnerSpec, TrainedCandidate
from .metalearners import MetaFit
from .metrics import get_metric

FORMAT = "suplearn-fit"
FORMAT_VERSION = 1
_DTYPES = {"f8": "<f8", "i8": "<i8"}


def _enc(a) -> dict:
    a = np.asarray(a)
    code = "i8" if a.dtype.kind in "iub" else "f8"
    raw = np.ascontiguousarray(a, dtype=_DTYPES[code]).tobytes()
    return {"dtype": code, "shape": list(a.shape), "data": base64.b64encode(raw).decode("ascii")}


def _dec(d) -> np.ndarray:
    raw = base64.b64decode(d["data"].encode("ascii"), validate=True)
    a = np.frombuffer(raw, dtype=_DTYPES[d["dtype"]]).reshape(d["shape"])
    return a.astype(a.dtype.newbyteorder("="))


def _f(x) -> dict:
    return _enc(np.array([x], dtype=float))


def _unf(d) -> float:
    return float(_dec(d)[0])


def _candidate_to(tc: TrainedCandidate) -> dict:
    return {
        "spec": tc.spec.to_dict(),
        "input_covariates": list(tc.input_covariates),
        "selected_covariates": list(tc.selected_covariates),
        "model_state": {k: _enc(v) for k, v in tc.model_state.items()},
        "train_y_range": _enc(np.array(tc.train_y_range, dtype=float)),
        "outcome_type": tc.outcome_type,
        "flags": list(tc.flags),
    }


def _candidate_from(d) -> TrainedCandidate:
    lo, hi = _dec(d["train_y_range"])
    return TrainedCandidate(
        spec=LearnerSpec.from_dict(d["spec"]),
        input_covariates=tuple(d["input_covariates"]),
        selected_covariates=tuple(d["selected_covariates"]),
        model_state={k: _dec(v) for k, v in d["model_state"].items()},
        train_y_range=(float(lo), float(hi)),
        outcome_type=d["outcome_type"],
        flags=tuple(d["flags"]),
    )


def _fit_to(fit: SuperLearnerFit) -> dict:
    fa = fit.fold_assignment
    return {
        "kind": fit.kind,
        "members": list(fit.members),
        "meta": {"kind": fit.meta.kind, "weights": _enc(fit.meta.weights), "selected": fit.meta.selected},
        "full_fits": {k: _candidate_to(v) for k, v in fit.full_fits.items()},
        "esl_fits": {k: _fit_to(v) for k, v in fit.esl_fits.items()},
        "cv_table": [
            {
                "name": r.name, "kind": r.kind, "per_fold": _enc(r.per_fold), "mean_risk": _f(r.mean_risk),
                "weight": _f(r.weight), "selected": r.selected, "failed": r.failed, "reason": r.reason,
            }
            for r in fit.cv_table.rows
        ],
        "metric": fit.metric.id,
        "fold_assignment": {"fold_of": _enc(fa.fold_of), "v": fa.v, "scheme": fa.scheme, "seed": fa.seed},
        "seed": fit.seed,
        "schema": {
            "covariate_names": list(fit.schema.covariate_names),
            "outcome_name": fit.schema.outcome_name,
            "outcome_type": fit.schema.outcome_type,
        },
        "y_range": _enc(np.array(fit.y_range, dtype=float)),
        "notes": list(fit.notes),
    }


def _fit_from(d) -> SuperLearnerFit:
    metric = get_metric(d["metric"])
    rows = [
        CVRow(
            name=r["name"], per_fold=_dec(r["per_fold"]), mean_risk=_unf(r["mean_risk"]),
            weight=_unf(r["weight"]), selected=r["selected"], failed=r["failed"],
            reason=r["reason"], kind=r["kind"],
        )
        for r in d["cv_table"]
    ]
    fa = d["fold_assignment"]
    lo, hi = _dec(d["y_range"])
    return SuperLearnerFit(
        kind=d["kind"],
        members=tuple(d["members"]),
        meta=MetaFit(d["meta"]["kind"], _dec(d["meta"]["weights"]), d["meta"]["selected"]),
        full_fits={k: _candidate_from(v) for k, v in d["full_fits"].items()},
        cv_table=CVRiskTable(rows, metric),
        metric=metric,
        fold_assignment=FoldAssignment(_dec(fa["fold_of"]), fa["v"], fa["scheme"], fa["seed"]),
        seed=d["seed"],
        schema=Schema(tuple(d["schema"]["covariate_names"]), d["schema"]["outcome_name"],
                      d["schema"]["outcome_type"]),
        y_range=(float(lo), float(hi)),
        esl_fits={k: _fit_from(v) for k, v in d["esl_fits"].items()},
        notes=list(d["notes"]),
    )


def save_fit(fit: SuperLearnerFit, config: dict | None = None) -> bytes:
    doc = {"format": FORMAT, "format_version": FORMAT_VERSION, "config": config, "fit": _fit_to(fit)}
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def load_archive(data: bytes):
    """Return ``(fit, config)`` from archive bytes."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptArchive(f"archive is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise CorruptArchive("not a suplearn fit archive")
    if doc.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"archive format_version {doc.get('format_version')!r}, this build reads {FORMAT_VERSION}"
        )
    try:
        return _fit_from(doc["fit"]), doc.get("config")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptArchive(f"archive content is malformed: {exc!r}") from None


def load_fit(data: bytes) -> SuperLearnerFit:
    return load_archive(data)[0]
