"""Real-data loading, preprocessing and the benchmark runner."""
import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cluster import METHOD_LABELS, METHODS, KMeansConfig
from .exceptions import (
    EmptyDataset,
    LabelCardinalityMismatch,
    MissingValue,
    ParseError,
    ValidationError,
)
from .metrics import misclassification
from .rng import substream

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetSpec:
    """Where a labelled dataset lives and how to prepare it.

    ``label_column`` and entries of ``feature_columns`` are header names or
    0-based column indices; ``feature_columns=None`` takes every column but
    the label. ``standardize`` rescales each feature to zero mean and unit
    variance, ``minmax`` maps each feature onto ``[-1, 1]``.
    """

    path: str
    label_column: object = -1
    feature_columns: tuple = None
    standardize: bool = False
    minmax: bool = False
    expected_K: int = None
    name: str = field(default=None, compare=False)

    def __post_init__(self):
        if self.standardize and self.minmax:
            raise ValidationError("choose at most one of standardize and minmax")


def _resolve(col, header):
    if isinstance(col, (int, np.integer)):
        idx = int(col)
        if idx < 0:
            idx += len(header)
        if not 0 <= idx < len(header):
            raise ValidationError(f"column index {col} out of range")
        return idx
    try:
        return header.index(str(col))
    except ValueError:
        raise ValidationError(f"no column named {col!r}") from None


def load_csv(spec):
    """Read ``spec.path`` into ``(X, z)``.

    ``X`` is ``p x n`` (one column per observation). Labels are encoded as
    0-based integers in order of first appearance.
    """
    path = Path(spec.path)
    if not path.is_file():
        raise ParseError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset("CSV file is empty") from None
        label_idx = _resolve(spec.label_column, header)
        if spec.feature_columns is None:
            feat_idx = [i for i in range(len(header)) if i != label_idx]
        else:
            feat_idx = [_resolve(c, header) for c in spec.feature_columns]
        if not feat_idx:
            raise ValidationError("no feature columns selected")

        rows, raw_labels = [], []
        for line_no, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(rec)}", row=line_no)
            lab = rec[label_idx].strip()
            if lab == "":
                raise MissingValue(line_no, label_idx + 1)
            vals = []
            for j in feat_idx:
                cell = rec[j].strip()
                if cell == "":
                    raise MissingValue(line_no, j + 1)
                try:
                    v = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric value {cell!r}", row=line_no, col=j + 1) from None
                if not np.isfinite(v):
                    raise ParseError(f"non-finite value {cell!r}", row=line_no, col=j + 1)
                vals.append(v)
            rows.append(vals)
            raw_labels.append(lab)
    if not rows:
        raise EmptyDataset()

    codes = {}
    z = np.array([codes.setdefault(lab, len(codes)) for lab in raw_labels], dtype=np.intp)
    if spec.expected_K is not None and len(codes) != spec.expected_K:
        raise LabelCardinalityMismatch(
            f"found {len(codes)} distinct labels, expected {spec.expected_K}"
        )
    X = np.asarray(rows, dtype=np.float64).T.copy()
    return X, z


def preprocess(X, standardize=False, minmax=False):
    """Per-feature scaling of a ``p x n`` matrix; constant features are dropped.

    Returns the scaled matrix and the indices of the dropped features.
    """
    X = np.asarray(X, dtype=np.float64)
    if not (standardize or minmax):
        return X, np.array([], dtype=np.intp)
    if standardize:
        center = X.mean(axis=1)
        spread = X.std(axis=1)
    else:
        lo, hi = X.min(axis=1), X.max(axis=1)
        center = 0.5 * (lo + hi)
        spread = 0.5 * (hi - lo)
    dead = np.flatnonzero(spread == 0)
    if dead.size:
        log.warning("dropping %d zero-variance feature(s): %s", dead.size, dead.tolist())
    keep = spread > 0
    return (X[keep] - center[keep, None]) / spread[keep, None], dead


@dataclass(frozen=True)
class BenchmarkRow:
    dataset: str
    method: str
    errors: int
    n: int
    rate: float
    seconds: float

    @property
    def fraction(self):
        return f"{self.errors}/{self.n}"

    def to_dict(self):
        return {
            "dataset": self.dataset,
            "method": self.method,
            "errors": self.errors,
            "n": self.n,
            "fraction": self.fraction,
            "rate": self.rate,
            "seconds": self.seconds,
        }


def run_benchmark(spec, methods=("ihsc", "psc", "kmeans"), cfg=KMeansConfig(), seed=0, K=None):
    """Cluster a labelled dataset with each method and count the errors.

    Method ``m`` (by position in ``methods``) draws its k-means randomness
    from stream ``(seed, m)``, so every method sees the same data but its
    own seeding.
    """
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise ValidationError(f"unknown or empty method list: {list(methods)}")
    X, z = load_csv(spec)
    X, _ = preprocess(X, standardize=spec.standardize, minmax=spec.minmax)
    K = K or spec.expected_K or int(z.max()) + 1
    name = spec.name or Path(spec.path).stem
    out = []
    for m_idx, m in enumerate(methods):
        t0 = time.perf_counter()
        est = METHODS[m](X, K, cfg, substream(seed, m_idx))
        ev = misclassification(est.z_hat, z, K=max(K, int(z.max()) + 1))
        out.append(
            BenchmarkRow(name, METHOD_LABELS[m], ev.loss, len(z), ev.rate, time.perf_counter() - t0)
        )
    return out
