"""V-fold cross-validation assignments.

Folds are labelled ``1..V``; row indices are 0-based.  Every scheme builds
a balanced label vector (each label ``floor(n/V)`` or ``ceil(n/V)`` times)
and shuffles it with a PCG64 stream, so the size invariants hold exactly.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from ._rng import check_seed, make_rng
from .errors import FoldOutOfRange, IncompatibleSchemes, InputError, InvalidV, SingleClass

SCHEMES = ("vfold", "stratified", "clustered", "loocv")


@dataclass(frozen=True, eq=False)
class FoldAssignment:
    fold_of: np.ndarray
    v: int
    scheme: str
    seed: int = 0

    def __post_init__(self):
        f = np.array(self.fold_of, dtype=np.int64, copy=True)
        f.setflags(write=False)
        object.__setattr__(self, "fold_of", f)
        if self.scheme not in SCHEMES:
            raise InputError(f"unknown CV scheme {self.scheme!r}")
        if f.size and (f.min() < 1 or f.max() > self.v):
            raise InputError("fold labels must lie in 1..V")

    @property
    def n(self) -> int:
        return self.fold_of.size

    def validation_rows(self, fold: int) -> np.ndarray:
        return validation_rows(self, fold)

    def training_rows(self, fold: int) -> np.ndarray:
        return training_rows(self, fold)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.v + 1)[1:]

    def to_csv(self, path) -> None:
        """Write ``row_index,fold`` for audit."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["row_index", "fold"])
            for i, f in enumerate(self.fold_of):
                w.writerow([i, int(f)])

    def __eq__(self, other):
        if not isinstance(other, FoldAssignment):
            return NotImplemented
        return (
            self.v == other.v
            and self.scheme == other.scheme
            and np.array_equal(self.fold_of, other.fold_of)
        )

    __hash__ = None


def _check_fold(fa, fold):
    if not 1 <= int(fold) <= fa.v:
        raise FoldOutOfRange(f"fold {fold} outside 1..{fa.v}")


def validation_rows(fa: FoldAssignment, fold: int) -> np.ndarray:
    _check_fold(fa, fold)
    return np.flatnonzero(fa.fold_of == int(fold))


def training_rows(fa: FoldAssignment, fold: int) -> np.ndarray:
    _check_fold(fa, fold)
    return np.flatnonzero(fa.fold_of != int(fold))


def _balanced_labels(n, v, rng, offset=0):
    # label sequence continues a global cycle at `offset`; shuffled onto rows
    labels = (np.arange(n) + offset) % v
    return rng.permutation(labels)


def assign_vfold(n: int, v: int, seed: int = 0) -> FoldAssignment:
    n, v = int(n), int(v)
    if not 2 <= v <= n:
        raise InvalidV(f"need 2 <= V <= n, got V={v}, n={n}")
    seed = check_seed(seed)
    rng = make_rng(seed)
    relabel = rng.permutation(v)
    labels = relabel[_balanced_labels(n, v, rng)] + 1
    return FoldAssignment(labels, v, "vfold", seed)


def assign_loocv(n: int, seed: int = 0) -> FoldAssignment:
    """Row ``i`` is the sole member of fold ``i + 1``."""
    n = int(n)
    if n < 2:
        raise InvalidV("LOOCV needs n >= 2")
    return FoldAssignment(np.arange(1, n + 1), n, "loocv", check_seed(seed))


def assign_stratified(y, v: int, seed: int = 0) -> FoldAssignment:
    """Balanced assignment carried out separately within ``y == 1`` and ``y == 0``.

    The non-event stratum continues the label cycle where the event stratum
    stopped, so overall fold sizes also stay within one of each other.
    """
    y = np.asarray(y).ravel()
    n, v = y.size, int(v)
    if not 2 <= v <= n:
        raise InvalidV(f"need 2 <= V <= n, got V={v}, n={n}")
    if not np.all((y == 0) | (y == 1)):
        raise InputError("stratified CV expects a binary 0/1 outcome")
    events = np.flatnonzero(y == 1)
    nonevents = np.flatnonzero(y == 0)
    if events.size == 0 or nonevents.size == 0:
        raise SingleClass("stratified CV needs both outcome classes")
    if v > min(events.size, nonevents.size):
        warnings.warn(
            f"V={v} exceeds the minority class count {min(events.size, nonevents.size)}; "
            "some folds will contain no minority-class rows",
            stacklevel=2,
        )
    seed = check_seed(seed)
    rng = make_rng(seed)
    relabel = rng.permutation(v)
    labels = np.empty(n, dtype=np.int64)
    labels[events] = _balanced_labels(events.size, v, rng)
    labels[nonevents] = _balanced_labels(nonevents.size, v, rng, offset=events.size)
    return FoldAssignment(relabel[labels] + 1, v, "stratified", seed)


def assign_clustered(cluster_id, v: int, seed: int = 0) -> FoldAssignment:
    """Whole clusters are assigned to folds; cluster counts per fold are balanced."""
    cluster_id = np.asarray(cluster_id).ravel()
    uniq, codes = np.unique(cluster_id, return_inverse=True)
    k, v = uniq.size, int(v)
    if not 2 <= v <= k:
        raise InvalidV(f"need 2 <= V <= number of clusters, got V={v}, clusters={k}")
    seed = check_seed(seed)
    rng = make_rng(seed)
    relabel = rng.permutation(v)
    cluster_fold = relabel[_balanced_labels(k, v, rng)] + 1
    return FoldAssignment(cluster_fold[codes], v, "clustered", seed)


def make_folds(scheme: str, v, seed: int = 0, *, n=None, y=None, cluster_id=None) -> FoldAssignment:
    """Dispatch on ``scheme``.  ``v=None`` means one fold per unit (rows or clusters)."""
    if scheme == "stratified" and cluster_id is not None:
        raise IncompatibleSchemes("stratified and clustered CV cannot be combined")
    if n is None:
        n = len(y) if y is not None else len(cluster_id)
    if scheme == "loocv":
        return assign_loocv(n, seed)
    if scheme == "vfold":
        if cluster_id is not None:
            warnings.warn("row-level V-fold CV on clustered data may split clusters", stacklevel=2)
        return assign_vfold(n, n if v is None else v, seed)
    if scheme == "stratified":
        if y is None:
            raise InputError("stratified CV needs the outcome")
        return assign_stratified(y, n if v is None else v, seed)
    if scheme == "clustered":
        if cluster_id is None:
            raise InputError("clustered CV needs cluster ids")
        k = np.unique(cluster_id).size
        return assign_clustered(cluster_id, k if v is None else v, seed)
    raise InputError(f"unknown CV scheme {scheme!r}")


def folds_for_dataset(d, scheme: str, v, seed: int = 0) -> FoldAssignment:
    return make_folds(scheme, v, seed, n=d.n, y=d.y, cluster_id=d.cluster_id)
