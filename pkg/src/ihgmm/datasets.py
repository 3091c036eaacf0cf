"""Catalogue of the real benchmark datasets and export of local substitutes.

The original UCI and LIBSVM files are not bundled. When the optional
``keel-ds`` package is installed, KEEL copies of several of them can be
written out as CSV files that :func:`ihgmm.data.load_csv` reads directly.
"""
import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import DatasetSpec, preprocess
from .exceptions import ValidationError

log = logging.getLogger(__name__)

#: Statlog DNA three-bit code per nucleotide; rows with ambiguity codes are dropped.
NUCLEOTIDE_BITS = {"A": (1, 0, 0), "C": (0, 1, 0), "G": (0, 0, 1), "T": (0, 0, 0)}


@dataclass(frozen=True)
class RealDataset:
    """One benchmark dataset: its class count, preferred scaling and KEEL source."""

    name: str
    K: int
    minmax: bool = False
    keel_name: str = None
    encoding: str = "numeric"
    note: str = ""

    def spec(self, data_dir):
        return DatasetSpec(
            path=str(Path(data_dir) / f"{self.name}.csv"),
            label_column="label",
            minmax=self.minmax,
            expected_K=self.K,
            name=self.name,
        )


# features are used as distributed: the LIBSVM copies of segment, satimage and
# usps come pre-scaled to [-1, 1], so their substitutes are min-max scaled too
REAL_DATASETS = {
    d.name: d
    for d in (
        RealDataset("iris", 3, keel_name="iris"),
        RealDataset("dermatology", 6, note="UCI only; no KEEL copy"),
        RealDataset("dna", 3, keel_name="splice", encoding="nucleotide", note="full Statlog set, 3-bit"),
        RealDataset("segment", 7, minmax=True, keel_name="segment"),
        RealDataset("satimage", 6, minmax=True, keel_name="satimage", note="train+test rows"),
        RealDataset("usps", 10, minmax=True, note="LIBSVM only; no KEEL copy"),
        RealDataset("pendigits", 10, keel_name="penbased", note="train+test rows"),
    )
}


def keel_raw_path(keel_name):
    """Location of a KEEL ``.dat`` file inside the ``keel_ds`` package, or None."""
    try:
        import keel_ds
    except ImportError:
        return None
    path = Path(keel_ds.__file__).parent / "data" / "balanced" / "raw" / f"{keel_name}.dat"
    return path if path.is_file() else None


def _read_keel(path, encoding):
    feats, labels = [], []
    dropped = 0
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh, skipinitialspace=True):
            if not rec or rec[0].startswith("@"):
                continue
            *xs, lab = (c.strip() for c in rec)
            if encoding == "nucleotide":
                if any(c not in NUCLEOTIDE_BITS for c in xs):
                    dropped += 1
                    continue
                row = [b for c in xs for b in NUCLEOTIDE_BITS[c]]
            else:
                row = [float(c) for c in xs]
            feats.append(row)
            labels.append(lab)
    if dropped:
        log.info("%s: dropped %d rows with ambiguous symbols", path.name, dropped)
    return np.asarray(feats, dtype=np.float64), labels


def write_csv(path, X, labels, fmt="%.10g"):
    """Write an ``n x p`` feature matrix and labels with header ``f1..fp,label``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{j + 1}" for j in range(X.shape[1])] + ["label"])
        for row, lab in zip(X, labels):
            w.writerow([fmt % v for v in row] + [lab])
    return path


def export_keel(name, out_dir):
    """Write the KEEL substitute for ``name`` to ``out_dir/<name>.csv``.

    Returns the path, or None when ``keel-ds`` or the file is unavailable.
    Min-max scaling, where the catalogue asks for it, is baked into the file.
    """
    if name not in REAL_DATASETS:
        raise ValidationError(f"unknown dataset {name!r}")
    ds = REAL_DATASETS[name]
    src = keel_raw_path(ds.keel_name) if ds.keel_name else None
    if src is None:
        return None
    X, labels = _read_keel(src, ds.encoding)
    if ds.minmax:
        X = preprocess(X.T, minmax=True)[0].T
    return write_csv(Path(out_dir) / f"{name}.csv", X, labels)


def locate(name, data_dir=None, cache_dir=None):
    """Find ``<name>.csv`` in ``data_dir``, else export a KEEL substitute into ``cache_dir``.

    Returns ``(spec, source)`` with source ``"user"`` or ``"keel"``, or
    ``(None, None)`` when neither is available. User files are read as
    given (no extra scaling); KEEL exports are already scaled.
    """
    ds = REAL_DATASETS[name]
    if data_dir is not None:
        spec = ds.spec(data_dir)
        if Path(spec.path).is_file():
            return DatasetSpec(spec.path, spec.label_column, None, False, ds.minmax, ds.K, name), "user"
    if cache_dir is not None:
        path = Path(cache_dir) / f"{name}.csv"
        if path.is_file() or export_keel(name, cache_dir) is not None:
            return DatasetSpec(str(path), "label", None, False, False, ds.K, name), "keel"
    return None, None
