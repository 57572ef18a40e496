"""Analytic dataset: loading, validation, pre-processing, effective sample size."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import (
    AllCovariatesDropped,
    InputError,
    InvalidDataset,
    MissingValue,
    NonNumericCell,
    SingleClassOutcome,
    UnknownColumn,
)

OUTCOME_TYPES = ("continuous", "binary")
NA_TOKENS = frozenset({"", "na", "nan"})


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class AnalyticDataset:
    """Covariates ``x`` (n x p), outcome ``y`` and optional cluster ids.

    Arrays are copied and made read-only on construction.  Cluster ids are
    stored as dense integer codes.
    """

    x: np.ndarray
    y: np.ndarray
    outcome_type: str
    covariate_names: tuple
    outcome_name: str = "y"
    cluster_id: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.y, dtype=float).ravel()
        names = tuple(str(s) for s in self.covariate_names)
        if self.outcome_type not in OUTCOME_TYPES:
            raise InvalidDataset(f"outcome_type must be one of {OUTCOME_TYPES}, got {self.outcome_type!r}")
        if x.ndim != 2:
            raise InvalidDataset("x must be a 2-d matrix")
        n, p = x.shape
        if p < 1:
            raise InvalidDataset("need at least one covariate")
        if n < 2:
            raise InvalidDataset("need at least two observations")
        if len(y) != n:
            raise InvalidDataset(f"x has {n} rows but y has {len(y)}")
        if len(names) != p:
            raise InvalidDataset(f"{len(names)} covariate names for {p} columns")
        if len(set(names)) != p:
            raise InvalidDataset("duplicate covariate names")
        if not np.all(np.isfinite(x)):
            r, c = np.argwhere(~np.isfinite(x))[0]
            raise MissingValue(f"non-finite covariate value at row {r}, column {names[c]!r}")
        if not np.all(np.isfinite(y)):
            raise MissingValue(f"non-finite outcome value at row {int(np.flatnonzero(~np.isfinite(y))[0])}")
        if self.outcome_type == "binary":
            if not np.all((y == 0) | (y == 1)):
                raise NonNumericCell("binary outcome must contain only 0 and 1")
            if y.min() == y.max():
                raise SingleClassOutcome("binary outcome has a single class")
        object.__setattr__(self, "x", _frozen(x, float))
        object.__setattr__(self, "y", _frozen(y, float))
        object.__setattr__(self, "covariate_names", names)
        if self.cluster_id is not None:
            cid = np.asarray(self.cluster_id).ravel()
            if len(cid) != n:
                raise InvalidDataset(f"cluster_id has length {len(cid)}, expected {n}")
            _, codes = np.unique(cid, return_inverse=True)
            object.__setattr__(self, "cluster_id", _frozen(codes, np.int64))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.outcome_type == "binary"

    def subset(self, rows) -> "AnalyticDataset":
        rows = np.asarray(rows, dtype=np.intp)
        return AnalyticDataset(
            x=self.x[rows],
            y=self.y[rows],
            outcome_type=self.outcome_type,
            covariate_names=self.covariate_names,
            outcome_name=self.outcome_name,
            cluster_id=None if self.cluster_id is None else self.cluster_id[rows],
        )

    def select(self, names: Sequence[str]) -> "AnalyticDataset":
        idx = [self.covariate_names.index(s) for s in names]
        return AnalyticDataset(
            x=self.x[:, idx],
            y=self.y,
            outcome_type=self.outcome_type,
            covariate_names=tuple(names),
            outcome_name=self.outcome_name,
            cluster_id=self.cluster_id,
        )


@dataclass(frozen=True)
class EffectiveSampleSize:
    n: int
    n_eff: int
    n_rare: Optional[int] = None


@dataclass
class PreprocessLog:
    dropped_constant: list = field(default_factory=list)
    dropped_sparse: list = field(default_factory=list)
    dropped_correlated: list = field(default_factory=list)
    omitted_outlier_rows: list = field(default_factory=list)


@dataclass(frozen=True)
class PreprocessOptions:
    sparse_threshold: float = 0.01
    corr_threshold: float = 0.95
    omit_outliers: bool = False
    outlier_k: float = 1.5


def _parse_cell(text, row, column):
    s = text.strip()
    if s.lower() in NA_TOKENS:
        raise MissingValue(f"missing value at row {row}, column {column!r}")
    try:
        v = float(s)
    except ValueError:
        raise NonNumericCell(f"non-numeric value {text!r} at row {row}, column {column!r}") from None
    if not math.isfinite(v):
        raise NonNumericCell(f"non-finite value {text!r} at row {row}, column {column!r}")
    return v


def read_table(path, columns=None):
    """Read a headed CSV into ``(header, rows)`` of raw strings."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InvalidDataset(f"{path}: empty file, header row required") from None
        rows = [r for r in reader if r]
    if len(set(header)) != len(header):
        raise InvalidDataset(f"{path}: duplicate column names in header")
    for i, r in enumerate(rows, start=1):
        if len(r) != len(header):
            raise InvalidDataset(f"{path}: row {i} has {len(r)} fields, header has {len(header)}")
    if columns is not None:
        for c in columns:
            if c not in header:
                raise UnknownColumn(f"column {c!r} not found in {path}")
    return header, rows


def parse_numeric_columns(header, rows, names):
    """Parse the named columns of raw CSV rows into a float matrix."""
    idx = [header.index(c) for c in names]
    out = np.empty((len(rows), len(names)))
    for i, r in enumerate(rows):
        for j, c in enumerate(idx):
            out[i, j] = _parse_cell(r[c], i + 1, names[j])
    return out


def load_csv(
    path,
    outcome_name: str,
    covariate_names: Optional[Sequence[str]] = None,
    cluster_name: Optional[str] = None,
    outcome_type: str = "continuous",
) -> AnalyticDataset:
    """Load an analytic dataset from a CSV file with a header row.

    Empty cells and the tokens ``NA``/``NaN`` (any case) raise
    :class:`MissingValue`; the data must be complete.  Rows in error
    messages are 1-based data rows (the header is not counted).
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"data file not found: {path}")
    if outcome_type not in OUTCOME_TYPES:
        raise InputError(f"outcome_type must be one of {OUTCOME_TYPES}")
    wanted = [outcome_name] + list(covariate_names or []) + ([cluster_name] if cluster_name else [])
    header, rows = read_table(path, wanted)
    if covariate_names is None:
        covariate_names = [h for h in header if h not in (outcome_name, cluster_name)]
    covariate_names = list(covariate_names)
    if not covariate_names:
        raise InvalidDataset("no covariate columns")
    y = parse_numeric_columns(header, rows, [outcome_name])[:, 0]
    if outcome_type == "binary":
        bad = np.flatnonzero((y != 0) & (y != 1))
        if bad.size:
            i = int(bad[0])
            raise NonNumericCell(
                f"invalid binary level {rows[i][header.index(outcome_name)]!r} at row {i + 1}, "
                f"column {outcome_name!r} (expected 0 or 1)"
            )
        if y.size and y.min() == y.max():
            raise SingleClassOutcome(f"binary outcome {outcome_name!r} has a single class")
    x = parse_numeric_columns(header, rows, covariate_names)
    cluster = None
    if cluster_name:
        ci = header.index(cluster_name)
        raw = [r[ci].strip() for r in rows]
        for i, s in enumerate(raw, start=1):
            if s.lower() in NA_TOKENS:
                raise MissingValue(f"missing value at row {i}, column {cluster_name!r}")
        cluster = np.asarray(raw)
    return AnalyticDataset(
        x=x,
        y=y,
        outcome_type=outcome_type,
        covariate_names=tuple(covariate_names),
        outcome_name=outcome_name,
        cluster_id=cluster,
    )


def effective_sample_size(d: AnalyticDataset) -> EffectiveSampleSize:
    """``n_eff = n`` for continuous outcomes, ``min(n, 5 * n_rare)`` for binary.

    With cluster ids, ``n`` counts clusters and a cluster is an event when
    any of its rows has ``y = 1``.
    """
    if d.cluster_id is None:
        n = d.n
        events = int(np.count_nonzero(d.y == 1))
    else:
        n = int(np.unique(d.cluster_id).size)
        events = int(np.unique(d.cluster_id[d.y == 1]).size)
    if not d.is_binary:
        return EffectiveSampleSize(n=n, n_eff=n)
    n_rare = min(events, n - events)
    return EffectiveSampleSize(n=n, n_eff=min(n, 5 * n_rare), n_rare=n_rare)


def _two_valued_minority(col):
    vals, counts = np.unique(col, return_counts=True)
    if vals.size != 2:
        return None
    return counts.min() / col.size


def iqr_fences(y, k=1.5):
    """Boxplot fences from linear-interpolation quartiles."""
    q1, q3 = np.quantile(y, [0.25, 0.75], method="linear")
    iqr = q3 - q1
    return q1 - k * iqr, q3 + k * iqr


def preprocess(d: AnalyticDataset, opts: Optional[PreprocessOptions] = None):
    """Outcome-blind covariate reduction plus optional outlier-row omission.

    Covariate rules run on all rows and never look at ``y``: constant
    columns go first, then two-valued columns whose minority fraction is
    below ``sparse_threshold``, then, scanning in column order, any column
    whose absolute correlation with an earlier kept column exceeds
    ``corr_threshold``.  Outlier omission (continuous outcomes only) removes
    rows with ``y`` outside the ``outlier_k`` IQR fences.

    Returns ``(dataset, PreprocessLog)``.
    """
    opts = opts or PreprocessOptions()
    for label, v in (("sparse_threshold", opts.sparse_threshold), ("corr_threshold", opts.corr_threshold)):
        if not 0 < v <= 1:
            raise InputError(f"{label} must lie in (0, 1], got {v}")
    if opts.outlier_k <= 0:
        raise InputError("outlier_k must be positive")
    if opts.omit_outliers and d.is_binary:
        raise InputError("outlier omission applies to continuous outcomes only")

    log = PreprocessLog()
    x = d.x
    names = d.covariate_names
    keep = []
    for j, name in enumerate(names):
        col = x[:, j]
        if np.all(col == col[0]):
            log.dropped_constant.append(name)
            continue
        frac = _two_valued_minority(col)
        if frac is not None and frac < opts.sparse_threshold:
            log.dropped_sparse.append(name)
            continue
        keep.append(j)

    kept = []
    for j in keep:
        partner = None
        for i in kept:
            r = np.corrcoef(x[:, i], x[:, j])[0, 1]
            if abs(r) > opts.corr_threshold:
                partner = i
                break
        if partner is None:
            kept.append(j)
        else:
            log.dropped_correlated.append((names[partner], names[j]))
    if not kept:
        raise AllCovariatesDropped("pre-processing removed every covariate")

    rows = np.arange(d.n)
    if opts.omit_outliers:
        lo, hi = iqr_fences(d.y, opts.outlier_k)
        out = (d.y < lo) | (d.y > hi)
        log.omitted_outlier_rows = [int(i) for i in np.flatnonzero(out)]
        rows = np.flatnonzero(~out)

    result = AnalyticDataset(
        x=x[np.ix_(rows, kept)],
        y=d.y[rows],
        outcome_type=d.outcome_type,
        covariate_names=tuple(names[j] for j in kept),
        outcome_name=d.outcome_name,
        cluster_id=None if d.cluster_id is None else d.cluster_id[rows],
    )
    return result, log
