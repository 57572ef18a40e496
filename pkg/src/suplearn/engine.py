"""Super learner orchestration.

Fold-wise candidate training, assembly of the meta-level dataset, the
discrete and ensemble super learners, nested cross-validation of ensembles
as extra candidates, and prediction.

Every model fit draws its randomness from a seed derived from
``(seed, *location, candidate name)`` where ``location`` identifies the
fold (``0`` is the full dataset).  Results are reduced by (fold, candidate)
index, so the thread count never changes an answer, and dropping a
candidate from the library leaves every other candidate's numbers alone.
"""
from __future__ import annotations

import hashlib
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._rng import check_seed, derive_seed
from .dataset import AnalyticDataset
from .errors import (
    AllCandidatesFailed,
    CandidateFailure,
    DegenerateWeights,
    InputError,
    SchemaMismatch,
)
from .folds import FoldAssignment, make_folds
from .learners import predict_candidate, train_candidate
from .metalearners import MetaFit, MetaLevelDataset, discrete_select, fit_meta, meta_predict
from .metrics import Metric, get_metric, truncate_predictions

ESL_META_KINDS = ("nnls", "nnls_convex")


def name_key(name: str) -> int:
    """Stable 63-bit integer for a candidate name (seed derivation key)."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little") >> 1


@dataclass(frozen=True)
class EslSpec:
    name: str
    meta: str = "nnls_convex"
    members: Optional[tuple] = None

    def __post_init__(self):
        if self.meta not in ESL_META_KINDS:
            raise InputError(f"eSL {self.name!r}: meta must be one of {ESL_META_KINDS}")
        if self.members is not None:
            object.__setattr__(self, "members", tuple(self.members))
            if not self.members:
                raise InputError(f"eSL {self.name!r}: members list is empty")

    def to_dict(self):
        return {"name": self.name, "meta": self.meta,
                "members": None if self.members is None else list(self.members)}

    @classmethod
    def from_dict(cls, d):
        return cls(name=d["name"], meta=d.get("meta", "nnls_convex"), members=d.get("members"))


@dataclass(frozen=True)
class Library:
    candidates: tuple
    esl_specs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "esl_specs", tuple(self.esl_specs))
        if not self.candidates:
            raise InputError("library needs at least one candidate")
        names = [c.name for c in self.candidates] + [e.name for e in self.esl_specs]
        dup = sorted({s for s in names if names.count(s) > 1})
        if dup:
            raise InputError(f"duplicate names in library: {dup}")
        cand = {c.name for c in self.candidates}
        for e in self.esl_specs:
            for m in e.members or ():
                if m not in cand:
                    raise InputError(f"eSL {e.name!r} references unknown candidate {m!r}")

    @property
    def names(self):
        return tuple(c.name for c in self.candidates)

    def esl_members(self, esl: EslSpec):
        return esl.members if esl.members is not None else self.names


@dataclass
class CVRow:
    name: str
    per_fold: np.ndarray
    mean_risk: float
    weight: float = 0.0
    selected: bool = False
    failed: bool = False
    reason: str = ""
    kind: str = "candidate"


@dataclass
class CVRiskTable:
    rows: list
    metric: Metric

    @property
    def names(self):
        return [r.name for r in self.rows]

    def row(self, name) -> CVRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def survivors(self):
        return [r for r in self.rows if not r.failed]

    def selected(self):
        return [r for r in self.rows if r.selected]


@dataclass(frozen=True)
class Schema:
    covariate_names: tuple
    outcome_name: str
    outcome_type: str


@dataclass(eq=False)
class SuperLearnerFit:
    kind: str
    members: tuple
    meta: MetaFit
    full_fits: dict
    cv_table: CVRiskTable
    metric: Metric
    fold_assignment: FoldAssignment
    seed: int
    schema: Schema
    y_range: tuple
    esl_fits: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def selected_name(self):
        if self.meta.kind == "discrete":
            return self.members[self.meta.selected]
        return None


class Provenance:
    """Optional recorder of which rows trained each model and which it predicted.

    Row indices are absolute (relative to the dataset handed to the public
    entry point).
    """

    def __init__(self):
        self.events = []

    def record(self, label, train_rows, predict_rows):
        self.events.append((label, np.asarray(train_rows).copy(), np.asarray(predict_rows).copy()))


# ------------------------------------------------------------------ helpers

def _check_metric(d: AnalyticDataset, metric: Metric):
    if not metric.supports(d.outcome_type):
        raise InputError(f"metric {metric.id!r} does not apply to a {d.outcome_type} outcome")


def _check_auc_folds(d, fa, metric):
    if metric.id != "auc":
        return
    for v in range(1, fa.v + 1):
        yv = d.y[fa.validation_rows(v)]
        if yv.min() == yv.max():
            raise InputError(
                f"validation fold {v} contains a single outcome class, so its AUC is undefined; "
                "use stratified CV with V no larger than the minority class count"
            )


def _fold_risk(metric, y, yhat, cluster_id):
    if metric.id == "auc":
        return metric(y, yhat)
    return metric(y, yhat, cluster_id=cluster_id)


def _run_tasks(fn, tasks, threads):
    if threads is None or threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _fit_one(spec, d, rows, seed, location):
    task_seed = derive_seed(seed, *location, name_key(spec.name))
    sub = d.subset(rows)
    return train_candidate(spec, sub.x, sub.y, d.outcome_type, task_seed, d.covariate_names)


def _cv_predictions(d, fa, specs, seed, prefix, threads, recorder=None, index_map=None, tag="outer"):
    """Out-of-fold predictions for ``specs`` under ``fa``.

    Returns ``(z, failures)`` where failed candidates have NaN columns and
    ``failures`` maps name to a reason string.
    """
    n, k = d.n, len(specs)
    index_map = np.arange(n) if index_map is None else index_map
    tasks = [(v, j) for v in range(1, fa.v + 1) for j in range(k)]

    def work(task):
        v, j = task
        spec = specs[j]
        train, valid = fa.training_rows(v), fa.validation_rows(v)
        try:
            tc = _fit_one(spec, d, train, seed, prefix + (v,))
            pred = predict_candidate(tc, d.x[valid])
            if not np.all(np.isfinite(pred)):
                raise FloatingPointError("non-finite predictions")
        except Exception as exc:  # noqa: BLE001 - isolate any learner failure
            return task, None, CandidateFailure(spec.name, v, exc)
        return task, pred, None

    z = np.full((n, k), np.nan)
    failures = {}
    for (v, j), pred, err in _run_tasks(work, tasks, threads):
        name = specs[j].name
        if err is not None:
            failures.setdefault(name, str(err))
            continue
        valid = fa.validation_rows(v)
        z[valid, j] = pred
        if recorder is not None:
            recorder.record((tag,) + prefix + (v, name), index_map[fa.training_rows(v)], index_map[valid])
    for name in failures:
        z[:, [s.name for s in specs].index(name)] = np.nan
    return z, failures


def _risk_rows(d, fa, names, z, failures, metric, kind="candidate"):
    rows = []
    cid = d.cluster_id
    for j, name in enumerate(names):
        if name in failures:
            rows.append(CVRow(name, np.full(fa.v, np.nan), float("nan"), failed=True,
                              reason=failures[name], kind=kind))
            continue
        per_fold = np.empty(fa.v)
        for v in range(1, fa.v + 1):
            valid = fa.validation_rows(v)
            per_fold[v - 1] = _fold_risk(metric, d.y[valid], z[valid, j], None if cid is None else cid[valid])
        rows.append(CVRow(name, per_fold, float(np.mean(per_fold)), kind=kind))
    return rows


def _warn_auc_clusters(d, metric):
    if metric.id == "auc" and d.cluster_id is not None:
        warnings.warn("AUC has no cluster-level form here; validation rows are pooled", stacklevel=3)


# -------------------------------------------------------------- public API

def cross_validate_library(
    d: AnalyticDataset,
    fa: FoldAssignment,
    lib: Library,
    metric,
    seed: int = 0,
    threads: int = 1,
    recorder: Optional[Provenance] = None,
):
    """Train every candidate on every training fold and predict its validation fold.

    Returns ``(MetaLevelDataset, CVRiskTable)``.  The meta-level dataset
    holds only candidates that succeeded in every fold; failed candidates
    stay in the table flagged with a reason.
    """
    metric = get_metric(metric)
    seed = check_seed(seed)
    _check_metric(d, metric)
    if fa.n != d.n:
        raise InputError(f"fold assignment covers {fa.n} rows, dataset has {d.n}")
    _check_auc_folds(d, fa, metric)
    _warn_auc_clusters(d, metric)
    specs = lib.candidates
    z, failures = _cv_predictions(d, fa, specs, seed, (), threads, recorder)
    names = [s.name for s in specs]
    table = CVRiskTable(_risk_rows(d, fa, names, z, failures, metric), metric)
    ok = [j for j, s in enumerate(names) if s not in failures]
    if not ok:
        raise AllCandidatesFailed("every candidate failed during cross-validation: "
                                  + "; ".join(failures.values()))
    mld = MetaLevelDataset(z[:, ok], d.y, tuple(names[j] for j in ok), fa.fold_of)
    return mld, table


def _refit_full(d, specs, names, seed, threads):
    by_name = {s.name: s for s in specs}

    def work(name):
        try:
            return _fit_one(by_name[name], d, np.arange(d.n), seed, (0,))
        except Exception as exc:  # noqa: BLE001
            raise CandidateFailure(name, None, exc) from exc

    fits = _run_tasks(work, list(names), threads)
    return dict(zip(names, fits))


def _schema(d):
    return Schema(d.covariate_names, d.outcome_name, d.outcome_type)


def _y_range(d):
    return (float(d.y.min()), float(d.y.max()))


def _esl_meta(kind, mld, metric, notes, label):
    """NNLS (or convex NNLS) meta fit; falls back to discrete selection on degenerate weights."""
    try:
        return fit_meta(kind, mld)
    except DegenerateWeights:
        pooled = [_fold_risk(metric, mld.y, mld.z[:, j], None) for j in range(mld.z.shape[1])]
        mf = discrete_select(pooled, metric.orientation, mld.candidate_names)
        notes.append(f"{label}: {kind} weights were all zero; fell back to discrete selection "
                     f"of {mld.candidate_names[mf.selected]!r}")
        return mf


def fit_dsl(d, fa, lib, metric, seed: int = 0, threads: int = 1, recorder=None) -> SuperLearnerFit:
    """Discrete super learner: the candidate with the best CV risk, refit on all rows."""
    metric = get_metric(metric)
    mld, table = cross_validate_library(d, fa, lib, metric, seed, threads, recorder)
    return _select_and_refit(d, fa, lib, metric, seed, threads, table, notes=[])


def _select_and_refit(d, fa, lib, metric, seed, threads, table, notes, inner_v=None):
    surv = table.survivors()
    if not surv:
        raise AllCandidatesFailed("no candidate survived cross-validation")
    members = tuple(r.name for r in surv)
    mf = discrete_select([r.mean_risk for r in surv], metric.orientation, members)
    chosen = surv[mf.selected]
    chosen.selected = True
    chosen.weight = 1.0
    full_fits, esl_fits = {}, {}
    if chosen.kind == "esl":
        esl = next(e for e in lib.esl_specs if e.name == chosen.name)
        esl_fits[esl.name] = _fit_esl_full(d, fa, lib, esl, metric, seed, threads, inner_v)
    else:
        full_fits = _refit_full(d, lib.candidates, [chosen.name], seed, threads)
    return SuperLearnerFit(
        kind="dsl", members=members, meta=mf, full_fits=full_fits, cv_table=table,
        metric=metric, fold_assignment=fa, seed=seed, schema=_schema(d),
        y_range=_y_range(d), esl_fits=esl_fits, notes=notes,
    )


def fit_esl(d, fa, lib, metric, meta_kind: str = "nnls_convex", seed: int = 0,
            threads: int = 1, members=None, recorder=None) -> SuperLearnerFit:
    """Ensemble super learner: NNLS weights over the meta-level dataset.

    Only candidates with nonzero weight are refit on the full data.  If
    every weight is zero the fit falls back to discrete selection and says
    so in ``notes``.
    """
    metric = get_metric(metric)
    if meta_kind not in ESL_META_KINDS:
        raise InputError(f"meta_kind must be one of {ESL_META_KINDS}")
    mld, table = cross_validate_library(d, fa, lib, metric, seed, threads, recorder)
    if members is not None:
        keep = [s for s in members if s in mld.candidate_names]
        if not keep:
            raise AllCandidatesFailed("no eSL member survived cross-validation")
        mld = mld.columns(keep)
    notes = []
    mf = _esl_meta(meta_kind, mld, metric, notes, "eSL")
    for name, w in zip(mld.candidate_names, mf.weights):
        table.row(name).weight = float(w)
    if mf.kind == "discrete":
        table.row(mld.candidate_names[mf.selected]).selected = True
    nonzero = [s for s, w in zip(mld.candidate_names, mf.weights) if w != 0]
    full = _refit_full(d, lib.candidates, nonzero, seed, threads)
    return SuperLearnerFit(
        kind="esl", members=mld.candidate_names, meta=mf, full_fits=full, cv_table=table,
        metric=metric, fold_assignment=fa, seed=seed, schema=_schema(d), y_range=_y_range(d),
        notes=notes,
    )


def _inner_folds(d_train, outer_scheme, inner_v, seed):
    """Inner folds for nested CV, same scheme as the outer split, V clamped to what fits."""
    if outer_scheme == "loocv":
        return make_folds("loocv", None, seed, n=d_train.n)
    if outer_scheme == "clustered":
        units = np.unique(d_train.cluster_id).size
    else:
        units = d_train.n
    v = max(2, min(inner_v, units))
    cid = d_train.cluster_id if outer_scheme == "clustered" else None
    return make_folds(outer_scheme, v, seed, n=d_train.n, y=d_train.y, cluster_id=cid)


def _esl_weights_on(d_train, lib, esls, outer_scheme, inner_v, seed, location, threads,
                    metric, notes, recorder, index_map):
    """Inner CV on ``d_train`` and one meta fit per eSL.  Returns ``{esl name: (members, MetaFit)}``."""
    ifa = _inner_folds(d_train, outer_scheme, inner_v, derive_seed(seed, *location))
    union = [s for s in lib.candidates if any(s.name in lib.esl_members(e) for e in esls)]
    z, failures = _cv_predictions(d_train, ifa, union, seed, location, threads, recorder,
                                  index_map, tag="inner")
    names = [s.name for s in union]
    out = {}
    for e in esls:
        cols = [names.index(m) for m in lib.esl_members(e) if m not in failures]
        if not cols:
            out[e.name] = None
            continue
        mld = MetaLevelDataset(z[:, cols], d_train.y, tuple(names[c] for c in cols), ifa.fold_of)
        out[e.name] = (mld.candidate_names, _esl_meta(e.meta, mld, metric, notes,
                                                      f"eSL {e.name!r} at {location}"))
    return out


def _fit_esl_full(d, fa, lib, esl, metric, seed, threads, inner_v):
    notes = []
    weights = _esl_weights_on(d, lib, [esl], fa.scheme, inner_v or fa.v, seed, (0,), threads,
                              metric, notes, None, np.arange(d.n))[esl.name]
    if weights is None:
        raise AllCandidatesFailed(f"every member of eSL {esl.name!r} failed on the full data")
    members, mf = weights
    nonzero = [s for s, w in zip(members, mf.weights) if w != 0]
    full = _refit_full(d, lib.candidates, nonzero, seed, threads)
    table = CVRiskTable([], metric)
    return SuperLearnerFit(
        kind="esl", members=members, meta=mf, full_fits=full, cv_table=table, metric=metric,
        fold_assignment=fa, seed=seed, schema=_schema(d), y_range=_y_range(d), notes=notes,
    )


def fit_dsl_with_esl_candidates(d, fa, lib, metric, inner_v: Optional[int] = None, seed: int = 0,
                                threads: int = 1, recorder: Optional[Provenance] = None) -> SuperLearnerFit:
    """Discrete selection over the candidates *and* the library's eSLs.

    Each eSL's CV risk comes from nested CV: for outer fold ``v`` the eSL's
    weights are learned by an inner CV on the outer training rows only, and
    its members are the candidates already fit on those same rows.  The
    eSL's outer-validation predictions therefore never use a validation
    row.
    """
    metric = get_metric(metric)
    seed = check_seed(seed)
    if not lib.esl_specs:
        raise InputError("library has no eSL specs to evaluate")
    inner_v = fa.v if inner_v is None else int(inner_v)
    if inner_v < 2:
        raise InputError("inner_v must be at least 2")
    mld, table = cross_validate_library(d, fa, lib, metric, seed, threads, recorder)
    names = list(lib.names)
    z_outer = np.full((d.n, len(names)), np.nan)
    for j, s in enumerate(mld.candidate_names):
        z_outer[:, names.index(s)] = mld.z[:, j]
    failed = {r.name for r in table.rows if r.failed}

    notes = []
    per_esl = {e.name: np.empty(fa.v) for e in lib.esl_specs}
    esl_fail = {}
    cid = d.cluster_id
    for v in range(1, fa.v + 1):
        train, valid = fa.training_rows(v), fa.validation_rows(v)
        d_train = d.subset(train)
        fits = _esl_weights_on(d_train, lib, lib.esl_specs, fa.scheme, inner_v, seed, (v,), threads,
                               metric, notes, recorder, train)
        for e in lib.esl_specs:
            got = fits[e.name]
            if got is None:
                esl_fail.setdefault(e.name, f"every member failed in the inner CV of outer fold {v}")
                continue
            members, mf = got
            usable = [m for m in members if m not in failed]
            if len(usable) != len(members):
                keep = [i for i, m in enumerate(members) if m not in failed]
                members = tuple(members[i] for i in keep)
                mf = _reweight(mf, keep)
                if mf is None:
                    esl_fail.setdefault(e.name, f"all weighted members failed in outer fold {v}")
                    continue
            cols = [names.index(m) for m in members]
            pred = meta_predict(mf, z_outer[np.ix_(valid, cols)])
            pred = truncate_predictions(pred, d.y[train], d.outcome_type)
            if recorder is not None:
                recorder.record(("esl", v, e.name), train, valid)
            per_esl[e.name][v - 1] = _fold_risk(metric, d.y[valid], pred, None if cid is None else cid[valid])

    for e in lib.esl_specs:
        if e.name in esl_fail:
            table.rows.append(CVRow(e.name, np.full(fa.v, np.nan), float("nan"), failed=True,
                                    reason=esl_fail[e.name], kind="esl"))
        else:
            pf = per_esl[e.name]
            table.rows.append(CVRow(e.name, pf, float(np.mean(pf)), kind="esl"))
    return _select_and_refit(d, fa, lib, metric, seed, threads, table, notes, inner_v)


def _reweight(mf, keep):
    if mf.kind == "discrete":
        if mf.selected not in keep:
            return None
        return MetaFit("discrete", mf.weights[keep], keep.index(mf.selected))
    w = mf.weights[keep]
    if not w.sum() > 0:
        return None
    if mf.kind == "nnls_convex":
        w = w / w.sum()
    return MetaFit(mf.kind, w)


def _align_new(fit, x_new, covariate_names):
    x_new = np.asarray(x_new, dtype=float)
    p = len(fit.schema.covariate_names)
    if x_new.ndim == 1:
        x_new = x_new.reshape(0, p) if x_new.size == 0 else x_new.reshape(1, -1)
    if covariate_names is not None:
        covariate_names = list(covariate_names)
        missing = [s for s in fit.schema.covariate_names if s not in covariate_names]
        if missing:
            raise SchemaMismatch(f"new data lacks covariates {missing}")
        x_new = x_new[:, [covariate_names.index(s) for s in fit.schema.covariate_names]]
    elif x_new.shape[1] != p:
        raise SchemaMismatch(f"expected {p} covariate columns, got {x_new.shape[1]}")
    return x_new


def sl_predict(fit: SuperLearnerFit, x_new, covariate_names=None) -> np.ndarray:
    """Predict with a fitted super learner.

    ``x_new`` columns follow ``fit.schema.covariate_names`` unless
    ``covariate_names`` is given, in which case they are matched by name.
    """
    x_new = _align_new(fit, x_new, covariate_names)
    m = x_new.shape[0]
    if m == 0:
        return np.empty(0)
    mf = fit.meta
    z = np.zeros((m, len(fit.members)))
    for j, name in enumerate(fit.members):
        if mf.kind == "discrete" and j != mf.selected:
            continue
        if mf.kind != "discrete" and mf.weights[j] == 0:
            continue
        if name in fit.esl_fits:
            z[:, j] = sl_predict(fit.esl_fits[name], x_new)
        else:
            z[:, j] = predict_candidate(fit.full_fits[name], x_new)
    pred = meta_predict(mf, z)
    return truncate_predictions(pred, np.asarray(fit.y_range), fit.schema.outcome_type)
